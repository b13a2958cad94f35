//! Action selection by repeated forward and backward activation passes.
//!
//! The drive source pushes a forward signal to its candidate first hops once; after that every
//! round the goal emits a back signal that travels along reciprocal edges, and each candidate
//! accumulates what it returns to the source. A candidate's return per round equals the goal
//! value times the product of normalized weights along all its paths to the goal, so repeated
//! rounds rank candidates by path value while the first forward pass favours strong first hops.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{NetError, PlanError};
use crate::substrate::{EdgeKind, ElementId, Firing, Network, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    pub t_act: f64,
    pub t_rel: f64,
    pub max_rounds: u32,
    /// Drive magnitude in signal units, 1 to 3.
    pub source_strength: u8,
    pub goal_value: f64,
    /// Back passes read the forward edge's weight instead of the reciprocal edge's own.
    pub back_uses_forward_weight: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            t_act: 0.6,
            t_rel: 0.15,
            max_rounds: 50,
            source_strength: 1,
            goal_value: 1.0,
            back_uses_forward_weight: false,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self, a_max: f64) -> Result<(), PlanError> {
        for (name, t) in [("t_act", self.t_act), ("t_rel", self.t_rel)] {
            if !(t > 0.0 && t <= a_max) {
                return Err(PlanError::InvalidParams(format!("{name} must lie in (0, a_max]")));
            }
        }
        if self.max_rounds == 0 {
            return Err(PlanError::ZeroRounds);
        }
        if !(1..=3).contains(&self.source_strength) {
            return Err(PlanError::InvalidParams("source_strength must be 1, 2 or 3".into()));
        }
        if !(self.goal_value.is_finite() && self.goal_value > 0.0) {
            return Err(PlanError::InvalidParams("goal_value must be positive".into()));
        }
        Ok(())
    }

    fn drive(&self) -> f64 {
        self.source_strength as f64 / 3.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathQuery {
    pub source: NodeId,
    pub goal: NodeId,
    pub context: BTreeSet<NodeId>,
}

impl PathQuery {
    pub fn new(source: NodeId, goal: NodeId) -> Self {
        PathQuery { source, goal, context: BTreeSet::new() }
    }

    fn check(&self, net: &Network) -> Result<(), NetError> {
        net.node(self.source)?;
        net.node(self.goal)?;
        for &c in &self.context {
            net.node(c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub chosen: NodeId,
    pub rounds_used: u32,
    /// Candidate scores at the deciding round.
    pub scores: BTreeMap<NodeId, f64>,
}

fn norm(net: &Network, w: f64) -> f64 {
    w / net.params.w_max
}

fn node_factor(net: &Network, n: NodeId) -> f64 {
    norm(net, net.nodes()[n.index()].weight)
}

/// Forward edges leaving `n` as (target, normalized weight).
fn forward_out(net: &Network, n: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
    net.out_edges(n).iter().filter_map(move |&e| {
        let e = &net.edges()[e.index()];
        (e.kind == EdgeKind::Forward).then(|| (e.dst, norm(net, e.weight)))
    })
}

/// Back-pass hops into `n`'s predecessors as (predecessor, normalized weight).
fn backward_out(net: &Network, n: NodeId, p: &PlannerParams) -> Vec<(NodeId, f64)> {
    net.in_edges(n)
        .iter()
        .filter_map(|&e| {
            let e = &net.edges()[e.index()];
            if e.kind != EdgeKind::Forward {
                return None;
            }
            let w = if p.back_uses_forward_weight { e.weight } else { net.weight_between(e.dst, e.src) };
            Some((e.src, norm(net, w)))
        })
        .collect()
}

/// Total signal arriving at each node, summed over walks of up to `nodes` hops.
/// Nodes in `stop` receive but do not pass signals on.
fn spread<F, I>(net: &Network, seeds: &[(NodeId, f64)], stop: &[NodeId], next: F) -> HashMap<NodeId, f64>
where
    F: Fn(NodeId) -> I,
    I: IntoIterator<Item = (NodeId, f64)>,
{
    let mut total: HashMap<NodeId, f64> = HashMap::new();
    let mut frontier: BTreeMap<NodeId, f64> = seeds.iter().copied().collect();
    for _ in 0..net.nodes().len() {
        let mut nf: BTreeMap<NodeId, f64> = BTreeMap::new();
        for (&n, &s) in &frontier {
            if s == 0.0 || (stop.contains(&n) && !seeds.iter().any(|(x, _)| *x == n)) {
                continue;
            }
            for (m, w) in next(n) {
                let v = s * w * node_factor(net, m);
                if v != 0.0 {
                    *nf.entry(m).or_insert(0.0) += v;
                }
            }
        }
        if nf.is_empty() {
            break;
        }
        for (&m, &v) in &nf {
            *total.entry(m).or_insert(0.0) += v;
        }
        frontier = nf;
    }
    total
}

fn forward_pass(net: &Network, q: &PathQuery, p: &PlannerParams) -> HashMap<NodeId, f64> {
    let mut seeds = vec![(q.source, p.drive())];
    seeds.extend(q.context.iter().filter(|&&c| c != q.source).map(|&c| (c, p.drive())));
    spread(net, &seeds, &[q.goal], |n| forward_out(net, n).collect::<Vec<_>>())
}

fn backward_pass(net: &Network, q: &PathQuery, p: &PlannerParams) -> HashMap<NodeId, f64> {
    let mut m = spread(net, &[(q.goal, p.goal_value)], &[q.source], |n| backward_out(net, n, p));
    m.insert(q.goal, m.get(&q.goal).copied().unwrap_or(0.0) + p.goal_value);
    m
}

/// Activation map after `rounds` forward/backward pass pairs, starting from current activations.
pub fn propagate(net: &Network, q: &PathQuery, rounds: u32, p: &PlannerParams) -> Result<BTreeMap<NodeId, f64>, PlanError> {
    if rounds == 0 {
        return Err(PlanError::ZeroRounds);
    }
    q.check(net)?;
    let a_max = net.params.a_max;
    let mut act: BTreeMap<NodeId, f64> = net.nodes().iter().map(|n| (n.id, n.activation)).collect();
    let fwd = forward_pass(net, q, p);
    let back = backward_pass(net, q, p);
    for _ in 0..rounds {
        for pass in [&fwd, &back] {
            for (&n, &v) in pass {
                let a = act.get_mut(&n).expect("node");
                *a = (*a + v).clamp(0.0, a_max);
            }
        }
    }
    Ok(act)
}

/// First-hop candidates: forward out-neighbours of the source that are not effectors.
pub fn candidates(net: &Network, source: NodeId) -> Vec<NodeId> {
    let mut c: Vec<NodeId> = forward_out(net, source)
        .map(|(n, _)| n)
        .filter(|n| net.nodes()[n.index()].kind != NodeKind::Effector)
        .collect();
    c.sort();
    c.dedup();
    c
}

/// Per-candidate return to the source for one back pass.
pub fn candidate_returns(net: &Network, q: &PathQuery, p: &PlannerParams) -> BTreeMap<NodeId, f64> {
    let back = backward_pass(net, q, p);
    let src_f = node_factor(net, q.source);
    candidates(net, q.source)
        .into_iter()
        .map(|x| {
            let w = if p.back_uses_forward_weight {
                net.weight_between(q.source, x)
            } else {
                net.weight_between(x, q.source)
            };
            let arrived = back.get(&x).copied().unwrap_or(0.0);
            (x, arrived * norm(net, w) * src_f)
        })
        .collect()
}

fn pick(
    scores: &BTreeMap<NodeId, f64>,
    policy: Policy,
    p: &PlannerParams,
    firing: Firing,
    source: NodeId,
    round: u32,
) -> Option<NodeId> {
    let mut ranked: Vec<(NodeId, f64)> = scores.iter().map(|(&n, &s)| (n, s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (top, best) = *ranked.first()?;
    let second = ranked.get(1).map_or(0.0, |r| r.1);
    let ready = match policy {
        Policy::Absolute => best >= p.t_act,
        Policy::Relative => best - second >= p.t_rel,
    };
    if !ready {
        return None;
    }
    let tied: Vec<NodeId> = ranked.iter().take_while(|r| r.1 == best).map(|r| r.0).collect();
    if tied.len() == 1 {
        return Some(top);
    }
    match firing {
        Firing::Deterministic => None,
        Firing::Seeded(rng) => {
            let u = rng.uniform(ElementId::Node(source), round as u64);
            Some(tied[((u * tied.len() as f64) as usize).min(tied.len() - 1)])
        }
    }
}

/// Run rounds until the policy fires or `max_rounds` pass. Current activations act as priming.
pub fn decide(
    net: &Network,
    q: &PathQuery,
    policy: Policy,
    p: &PlannerParams,
    firing: Firing,
) -> Result<Option<Decision>, PlanError> {
    p.validate(net.params.a_max)?;
    q.check(net)?;
    let cands = candidates(net, q.source);
    if cands.is_empty() {
        return Err(PlanError::NoCandidates);
    }
    let prior: BTreeMap<NodeId, f64> = cands.iter().map(|&c| (c, net.nodes()[c.index()].activation)).collect();

    let fwd = forward_pass(net, q, p);
    let impulse: BTreeMap<NodeId, f64> =
        cands.iter().map(|&c| (c, prior[&c] + fwd.get(&c).copied().unwrap_or(0.0))).collect();
    if let Some(c) = pick(&impulse, policy, p, firing, q.source, 0) {
        return Ok(Some(Decision { chosen: c, rounds_used: 1, scores: impulse }));
    }

    let ret = candidate_returns(net, q, p);
    for r in 1..=p.max_rounds {
        let scores: BTreeMap<NodeId, f64> =
            cands.iter().map(|&c| (c, prior[&c] + r as f64 * ret[&c])).collect();
        if let Some(c) = pick(&scores, policy, p, firing, q.source, r) {
            return Ok(Some(Decision { chosen: c, rounds_used: r, scores }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    /// The hop won a decision round.
    Decision,
    /// The goal node itself was reached; its effector fires.
    Goal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub hop: NodeId,
    pub effector: Option<NodeId>,
    pub rounds_used: u32,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    /// Committed effector sequence.
    pub fn actions(&self) -> Vec<NodeId> {
        self.steps.iter().filter_map(|s| s.effector).collect()
    }
}

fn effector_of(net: &Network, n: NodeId) -> Option<NodeId> {
    forward_out(net, n).map(|(m, _)| m).filter(|m| net.nodes()[m.index()].kind == NodeKind::Effector).min()
}

fn reaches(net: &Network, from: NodeId, to: NodeId) -> bool {
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        if n == to {
            return true;
        }
        for (m, _) in forward_out(net, n) {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    false
}

/// Greedy hop-by-hop commitment from the source to the goal.
pub fn plan(net: &Network, q: &PathQuery, policy: Policy, p: &PlannerParams, firing: Firing) -> Result<Plan, PlanError> {
    p.validate(net.params.a_max)?;
    q.check(net)?;
    let mut out = Plan::default();
    let mut cur = q.source;
    let mut visited = BTreeSet::from([cur]);
    while cur != q.goal && reaches(net, cur, q.goal) {
        let step_q = PathQuery { source: cur, goal: q.goal, context: q.context.clone() };
        let Some(d) = (match decide(net, &step_q, policy, p, firing) {
            Ok(d) => d,
            Err(PlanError::NoCandidates) => None,
            Err(e) => return Err(e),
        }) else {
            break;
        };
        if !visited.insert(d.chosen) {
            break;
        }
        let trigger = if d.chosen == q.goal { Trigger::Goal } else { Trigger::Decision };
        out.steps.push(PlanStep {
            hop: d.chosen,
            effector: effector_of(net, d.chosen),
            rounds_used: d.rounds_used,
            trigger,
        });
        cur = d.chosen;
    }
    Ok(out)
}

/// Add edges B->X wherever A and B share at least `overlap_min` forward targets and A->X exists.
/// Repeats until nothing changes. Returns the added (source, target) pairs.
pub fn generalize(net: &mut Network, overlap_min: usize) -> Result<Vec<(NodeId, NodeId)>, PlanError> {
    if overlap_min < 2 {
        return Err(PlanError::InvalidParams("overlap_min must be at least 2".into()));
    }
    let dw = net.params.dw;
    let mut added = Vec::new();
    loop {
        let outs: Vec<BTreeSet<NodeId>> =
            net.nodes().iter().map(|n| forward_out(net, n.id).map(|(m, _)| m).collect()).collect();
        let mut round = Vec::new();
        for (a, oa) in outs.iter().enumerate() {
            for (b, ob) in outs.iter().enumerate() {
                if a == b || oa.intersection(ob).count() < overlap_min {
                    continue;
                }
                let bid = NodeId(b as u32);
                for &x in oa.difference(ob) {
                    let promotable = net.edge_between(bid, x).is_none_or(|e| net.edges()[e.index()].kind == EdgeKind::Back);
                    if x != bid && promotable && !round.contains(&(bid, x)) {
                        round.push((bid, x));
                    }
                }
            }
        }
        if round.is_empty() {
            return Ok(added);
        }
        for &(b, x) in &round {
            let e = net.forward_pair(b, x)?;
            if net.edges()[e.index()].weight < dw {
                net.set_weight(e.into(), dw)?;
            }
        }
        added.extend(round);
    }
}

/// Normalized weight advantage of `action` over `variant` in leading to `outcome`.
pub fn causal_strength(net: &Network, action: NodeId, variant: NodeId, outcome: NodeId) -> Result<f64, PlanError> {
    for n in [action, variant, outcome] {
        net.node(n)?;
    }
    Ok(norm(net, net.weight_between(action, outcome)) - norm(net, net.weight_between(variant, outcome)))
}
