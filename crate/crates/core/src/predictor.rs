//! Cue/outcome prediction motif and the prediction-error measure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::PredictError;
use crate::substrate::{ElementId, Network, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorParams {
    /// Added to both cue edge weights when reading prediction activations, so an untrained motif predicts 50/50.
    pub prior_weight: f64,
    /// Ticks from cue to the prediction snapshot.
    pub t1: u64,
    /// Ticks from cue to the outcome deadline.
    pub t2: u64,
}

impl Default for PredictorParams {
    fn default() -> Self {
        PredictorParams { prior_weight: 0.05, t1: 2, t2: 5 }
    }
}

impl PredictorParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.prior_weight.is_finite() && self.prior_weight > 0.0) {
            return Err("prior_weight must be positive".into());
        }
        if self.t1 == 0 || self.t2 <= self.t1 {
            return Err("need 0 < t1 < t2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionMotif {
    pub cue: NodeId,
    pub outcome_pos: NodeId,
    pub outcome_neg: NodeId,
    pub pred_pos: NodeId,
    pub pred_neg: NodeId,
}

impl PredictionMotif {
    /// Forward edges of the motif.
    pub fn edge_pairs(&self) -> [(NodeId, NodeId); 7] {
        [
            (self.cue, self.pred_pos),
            (self.cue, self.pred_neg),
            (self.pred_pos, self.outcome_pos),
            (self.pred_pos, self.outcome_neg),
            (self.pred_neg, self.outcome_neg),
            (self.pred_neg, self.outcome_pos),
            (self.outcome_pos, self.pred_pos),
        ]
    }

    fn check(&self, net: &Network) -> Result<(), PredictError> {
        for (s, d) in self.edge_pairs() {
            if net.edge_between(s, d).is_none() {
                return Err(PredictError::Net(crate::error::NetError::UnknownNode(format!(
                    "motif edge {}->{}",
                    s.0, d.0
                ))));
            }
        }
        Ok(())
    }

    /// Sum of motif edge weights (forward and return edges).
    pub fn total_weight(&self, net: &Network) -> f64 {
        self.edge_pairs()
            .iter()
            .flat_map(|&(s, d)| [net.weight_between(s, d), net.weight_between(d, s)])
            .sum()
    }
}

/// Activations read at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationSnapshot {
    pub tick: u64,
    pub values: BTreeMap<NodeId, f64>,
}

impl ActivationSnapshot {
    pub fn read(net: &Network, nodes: &[NodeId]) -> Result<Self, PredictError> {
        let mut values = BTreeMap::new();
        for &n in nodes {
            values.insert(n, net.node(n)?.activation);
        }
        Ok(ActivationSnapshot { tick: net.tick_count(), values })
    }

    fn get(&self, n: NodeId) -> Result<f64, PredictError> {
        self.values.get(&n).copied().ok_or(PredictError::MissingNode(n))
    }
}

fn neg_label(net: &Network, n: NodeId) -> String {
    let l = net.label(n);
    if l.is_empty() { format!("n{}", n.0) } else { l.to_string() }
}

/// Locate or create the prediction and no-outcome nodes and wire the motif.
pub fn build_motif(net: &mut Network, cue: NodeId, outcome_pos: NodeId) -> Result<PredictionMotif, PredictError> {
    net.node(cue)?;
    net.node(outcome_pos)?;
    if cue == outcome_pos {
        return Err(PredictError::Degenerate);
    }
    let (c, o) = (neg_label(net, cue), neg_label(net, outcome_pos));
    let outcome_neg = net.node_for(&format!("no-{o}"), NodeKind::Plain);
    let pred_pos = net.node_for(&format!("pred:{c}:{o}"), NodeKind::Plain);
    let pred_neg = net.node_for(&format!("pred:{c}:no-{o}"), NodeKind::Plain);
    let m = PredictionMotif { cue, outcome_pos, outcome_neg, pred_pos, pred_neg };
    let ids = [cue, outcome_pos, outcome_neg, pred_pos, pred_neg];
    for (i, a) in ids.iter().enumerate() {
        if ids[i + 1..].contains(a) {
            return Err(PredictError::Degenerate);
        }
    }
    for (s, d) in m.edge_pairs() {
        net.forward_pair(s, d)?;
    }
    Ok(m)
}

/// Predicted share of the positive outcome minus its realized share.
pub fn prediction_error(
    s1: &ActivationSnapshot,
    s2: &ActivationSnapshot,
    motif: &PredictionMotif,
) -> Result<f64, PredictError> {
    let (pp, pn) = (s1.get(motif.pred_pos)?, s1.get(motif.pred_neg)?);
    let (op, on) = (s2.get(motif.outcome_pos)?, s2.get(motif.outcome_neg)?);
    if pp + pn <= 0.0 || op + on <= 0.0 {
        return Err(PredictError::ZeroDenominator);
    }
    Ok(pp / (pp + pn) - op / (op + on))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub error: f64,
    pub s1: ActivationSnapshot,
    pub s2: ActivationSnapshot,
    /// Change of the summed motif edge weights over the trial.
    pub weight_change: f64,
}

/// One cue presentation with the outcome delivered or withheld at the deadline.
pub fn trial(
    net: &mut Network,
    motif: &PredictionMotif,
    outcome_present: bool,
    params: &PredictorParams,
) -> Result<TrialResult, PredictError> {
    motif.check(net)?;
    let p = net.params;
    let before = motif.total_weight(net);

    net.set_activation(motif.cue.into(), p.a_max)?;
    net.advance_by(params.t1);
    let w0 = params.prior_weight;
    for pred in [motif.pred_pos, motif.pred_neg] {
        let w = net.weight_between(motif.cue, pred);
        net.set_activation(pred.into(), p.a_max * (w + w0) / (p.w_max + w0))?;
    }
    let s1 = ActivationSnapshot::read(net, &[motif.pred_pos, motif.pred_neg])?;
    let ratio = s1.values[&motif.pred_pos] / (s1.values[&motif.pred_pos] + s1.values[&motif.pred_neg]);

    net.advance_by(params.t2 - params.t1);
    let (hit, miss) = if outcome_present {
        (motif.outcome_pos, motif.outcome_neg)
    } else {
        (motif.outcome_neg, motif.outcome_pos)
    };
    net.set_activation(hit.into(), p.a_max)?;
    net.set_activation(miss.into(), 0.0)?;
    let s2 = ActivationSnapshot::read(net, &[motif.outcome_pos, motif.outcome_neg])?;
    let error = prediction_error(&s1, &s2, motif)?;

    let (pred, other) = if outcome_present {
        (motif.pred_pos, motif.pred_neg)
    } else {
        (motif.pred_neg, motif.pred_pos)
    };
    let edge = |net: &Network, s, d| ElementId::Edge(net.edge_between(s, d).expect("motif edge"));
    let mut credit = vec![
        edge(net, motif.cue, pred),
        pred.into(),
        edge(net, pred, hit),
        hit.into(),
    ];
    // the cross edge from the other prediction marks surprise or disappointment
    let mismatch = if outcome_present { ratio < 0.5 } else { ratio > 0.5 };
    if mismatch {
        credit.push(edge(net, other, hit));
    }
    for id in credit {
        net.learn(id, false)?;
    }
    net.advance();
    Ok(TrialResult { error, s1, s2, weight_change: motif.total_weight(net) - before })
}
