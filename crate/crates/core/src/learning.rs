//! Innate wiring, Hebbian co-activation, reward reinforcement and replay.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{LearnError, NetError};
use crate::substrate::{ElementId, Network, NodeId, NodeKind, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnateNode {
    pub label: String,
    pub kind: NodeKind,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnateEdge {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardBinding {
    pub reward: String,
    pub effector: String,
}

/// Elements present (and fixated) before any experience.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnateSpec {
    pub nodes: Vec<InnateNode>,
    pub edges: Vec<InnateEdge>,
    pub reward_bindings: Vec<RewardBinding>,
}

/// Node sequence from one working-memory span.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub nodes: Vec<NodeId>,
    /// Highest reward-node activation adjacent to the span when it was captured.
    pub salience: f64,
}

impl Episode {
    pub fn new(nodes: Vec<NodeId>) -> Result<Self, LearnError> {
        if nodes.is_empty() {
            return Err(LearnError::EmptyEpisode);
        }
        Ok(Episode { nodes, salience: 0.0 })
    }

    /// Capture `nodes` with salience read off the reward nodes linked to them.
    pub fn capture(net: &Network, nodes: Vec<NodeId>) -> Result<Self, LearnError> {
        let mut ep = Episode::new(nodes)?;
        let mut sal: f64 = 0.0;
        for &n in &ep.nodes {
            net.node(n)?;
            for &e in net.out_edges(n).iter().chain(net.in_edges(n)) {
                let e = &net.edges()[e.index()];
                for end in [e.src, e.dst] {
                    let node = &net.nodes()[end.index()];
                    if node.kind == NodeKind::Reward {
                        sal = sal.max(node.activation);
                    }
                }
            }
            let node = net.node(n)?;
            if node.kind == NodeKind::Reward {
                sal = sal.max(node.activation);
            }
        }
        ep.salience = sal;
        Ok(ep)
    }

    pub fn is_cyclic(&self) -> bool {
        self.nodes.len() > 2 && self.nodes.first() == self.nodes.last()
    }
}

/// Add the declared elements at their (fixated) weights. Validation happens before any change.
pub fn inject_innate(net: &mut Network, spec: &InnateSpec) -> Result<(), LearnError> {
    let theta = net.params.theta;
    let mut declared = HashSet::new();
    for n in &spec.nodes {
        if !declared.insert(n.label.as_str()) || net.find(&n.label).is_some() {
            return Err(LearnError::DuplicateLabel(n.label.clone()));
        }
        if n.weight < theta {
            return Err(LearnError::BelowThreshold(n.label.clone()));
        }
    }
    let known = |l: &str| declared.contains(l) || net.find(l).is_some();
    for e in &spec.edges {
        for l in [&e.src, &e.dst] {
            if !known(l) {
                return Err(LearnError::DanglingEdge(l.clone()));
            }
        }
        if e.src == e.dst {
            return Err(LearnError::Net(NetError::SelfEdge(net.find(&e.src).unwrap_or(NodeId(u32::MAX)))));
        }
        if e.weight < theta {
            return Err(LearnError::BelowThreshold(format!("{}->{}", e.src, e.dst)));
        }
    }
    for b in &spec.reward_bindings {
        for l in [&b.reward, &b.effector] {
            if !known(l) {
                return Err(LearnError::DanglingEdge(l.clone()));
            }
        }
        let kind = spec
            .nodes
            .iter()
            .find(|n| n.label == b.reward)
            .map(|n| n.kind)
            .or_else(|| net.find(&b.reward).map(|id| net.nodes()[id.index()].kind));
        if kind != Some(NodeKind::Reward) {
            return Err(LearnError::NotARewardNode(net.find(&b.reward).unwrap_or(NodeId(u32::MAX))));
        }
    }

    for n in &spec.nodes {
        let id = net.add_node(Some(&n.label), n.kind)?;
        net.set_weight(id.into(), n.weight)?;
    }
    for e in &spec.edges {
        let (s, d) = (net.require(&e.src)?, net.require(&e.dst)?);
        let f = net.forward_pair(s, d)?;
        net.set_weight(f.into(), e.weight)?;
    }
    // a binding without an explicit edge gets one at theta
    for b in &spec.reward_bindings {
        let (r, x) = (net.require(&b.reward)?, net.require(&b.effector)?);
        let f = net.forward_pair(r, x)?;
        if net.edges()[f.index()].weight < theta {
            net.set_weight(f.into(), theta)?;
        }
    }
    Ok(())
}

fn coactivate(net: &mut Network, a: NodeId, b: NodeId) -> Result<(), NetError> {
    let full = Signal::FULL;
    net.excite(a.into(), full)?;
    net.excite(b.into(), full)?;
    let (ab, ba) = net.ensure_reciprocal(a, b)?;
    net.excite(ab.into(), full)?;
    net.excite(ba.into(), full)?;
    Ok(())
}

/// Drive `a` and `b` together `reps` times, `gap_ticks` of silence after each.
pub fn hebbian_episode(
    net: &mut Network,
    a: NodeId,
    b: NodeId,
    reps: u32,
    gap_ticks: u64,
) -> Result<(), LearnError> {
    if reps == 0 {
        return Err(LearnError::ZeroCount("reps"));
    }
    net.node(a)?;
    net.node(b)?;
    if a == b {
        return Err(NetError::SelfEdge(a).into());
    }
    for _ in 0..reps {
        coactivate(net, a, b)?;
        let (ab, ba) = net.ensure_reciprocal(a, b)?;
        for id in [ElementId::Node(a), ElementId::Node(b), ab.into(), ba.into()] {
            net.learn(id, false)?;
        }
        net.advance();
        net.advance_by(gap_ticks);
    }
    Ok(())
}

/// One paired trial of `stimulus` with a reward node, followed by one tick.
///
/// A fixated reward node emits a strong signal, so the stimulus-to-reward edge takes the boosted increment.
pub fn reinforce(net: &mut Network, stimulus: NodeId, reward: NodeId) -> Result<(), LearnError> {
    net.node(stimulus)?;
    let r = net.node(reward)?;
    if r.kind != NodeKind::Reward {
        return Err(LearnError::NotARewardNode(reward));
    }
    let strong = r.fixated;
    if stimulus == reward {
        return Err(NetError::SelfEdge(stimulus).into());
    }
    coactivate(net, stimulus, reward)?;
    let (sr, rs) = net.ensure_reciprocal(stimulus, reward)?;
    net.learn(stimulus.into(), false)?;
    net.learn(sr.into(), strong)?;
    net.learn(rs.into(), false)?;
    net.advance();
    Ok(())
}

/// Re-run the episode internally `rounds` times, one tick per step.
///
/// A cyclic episode (first node repeated at the end) keeps circulating afterwards: each hop
/// shrinks the signal by the edge response and activation decay, and learning stops once the
/// signal falls below one unit.
pub fn replay(net: &mut Network, episode: &Episode, rounds: u32) -> Result<(), LearnError> {
    if rounds == 0 {
        return Err(LearnError::ZeroCount("rounds"));
    }
    if episode.nodes.is_empty() {
        return Err(LearnError::EmptyEpisode);
    }
    for &n in &episode.nodes {
        net.node(n)?;
    }
    let steps: Vec<(NodeId, NodeId)> = episode
        .nodes
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(x, y)| x != y)
        .collect();
    for &(x, y) in &steps {
        net.ensure_reciprocal(x, y)?;
    }
    let inner = Signal::new(2).expect("in range");
    for _ in 0..rounds {
        for &(x, y) in &steps {
            let e = net.edge_between(x, y).expect("ensured");
            net.excite(x.into(), inner)?;
            net.excite(e.into(), inner)?;
            net.learn(x.into(), false)?;
            net.learn(e.into(), false)?;
            net.advance();
        }
        let last = *episode.nodes.last().expect("non-empty");
        if !episode.is_cyclic() {
            net.excite(last.into(), inner)?;
            net.learn(last.into(), false)?;
            net.advance();
        }
    }
    if episode.is_cyclic() && !steps.is_empty() {
        let p = net.params;
        let mut s = Signal::MAX as f64;
        'outer: loop {
            for &(x, y) in &steps {
                if s.floor() < 1.0 {
                    break 'outer;
                }
                let e = net.edge_between(x, y).expect("ensured");
                let v = Signal::saturating(s.floor() as i64);
                net.excite(e.into(), v)?;
                net.excite(y.into(), v)?;
                net.learn(e.into(), false)?;
                net.learn(y.into(), false)?;
                net.advance();
                let w = net.edges()[e.index()].weight;
                s *= (0.5 + 0.5 * w / p.w_max) * (1.0 - p.decay_a);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::Params;

    fn net() -> Network {
        Network::new(Params::default()).unwrap()
    }

    fn spec() -> InnateSpec {
        InnateSpec {
            nodes: vec![
                InnateNode { label: "sweet".into(), kind: NodeKind::Reward, weight: 2.0 },
                InnateNode { label: "eat".into(), kind: NodeKind::Effector, weight: 1.0 },
            ],
            edges: vec![InnateEdge { src: "sweet".into(), dst: "eat".into(), weight: 1.5 }],
            reward_bindings: vec![RewardBinding { reward: "sweet".into(), effector: "eat".into() }],
        }
    }

    #[test]
    fn innate_elements_start_fixated() {
        let mut n = net();
        inject_innate(&mut n, &spec()).unwrap();
        let (s, e) = (n.require("sweet").unwrap(), n.require("eat").unwrap());
        assert!(n.node(s).unwrap().fixated && n.node(e).unwrap().fixated);
        let f = n.edge_between(s, e).unwrap();
        assert_eq!(n.edge(f).unwrap().weight, 1.5);
        assert!(n.edge(f).unwrap().fixated);
        assert!(n.reciprocity_holds());
    }

    #[test]
    fn innate_empty_and_errors() {
        let mut n = net();
        inject_innate(&mut n, &InnateSpec::default()).unwrap();
        assert_eq!(n, net());
        let mut bad = spec();
        bad.edges[0].dst = "nowhere".into();
        assert_eq!(inject_innate(&mut n, &bad), Err(LearnError::DanglingEdge("nowhere".into())));
        assert!(n.nodes().is_empty());
        let mut dup = spec();
        dup.nodes.push(dup.nodes[0].clone());
        assert_eq!(inject_innate(&mut n, &dup), Err(LearnError::DuplicateLabel("sweet".into())));
        let mut low = spec();
        low.nodes[1].weight = 0.5;
        assert!(matches!(inject_innate(&mut n, &low), Err(LearnError::BelowThreshold(_))));
    }

    #[test]
    fn three_reps_fixate_edges() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Plain).unwrap();
        let b = n.add_node(Some("b"), NodeKind::Plain).unwrap();
        hebbian_episode(&mut n, a, b, 2, 5).unwrap();
        assert!(!n.edge(n.edge_between(a, b).unwrap()).unwrap().fixated);
        hebbian_episode(&mut n, a, b, 1, 5).unwrap();
        assert!(n.edge(n.edge_between(a, b).unwrap()).unwrap().fixated);
        assert!(n.edge(n.edge_between(b, a).unwrap()).unwrap().fixated);
    }

    #[test]
    fn single_rep_fades() {
        let mut n = net();
        let a = n.add_node(None, NodeKind::Plain).unwrap();
        let b = n.add_node(None, NodeKind::Plain).unwrap();
        hebbian_episode(&mut n, a, b, 1, 200).unwrap();
        assert!(n.nodes().iter().all(|x| x.weight == 0.0));
        assert!(n.edges().iter().all(|x| x.weight == 0.0));
        assert_eq!(hebbian_episode(&mut n, a, b, 0, 1), Err(LearnError::ZeroCount("reps")));
    }

    fn reward_net() -> (Network, NodeId, NodeId) {
        let mut n = net();
        let s = n.add_node(Some("bell"), NodeKind::Sensory).unwrap();
        let r = n.add_node(Some("food"), NodeKind::Reward).unwrap();
        n.set_weight(r.into(), 2.0).unwrap();
        (n, s, r)
    }

    #[test]
    fn reward_fixates_in_two_trials() {
        let (mut n, s, r) = reward_net();
        reinforce(&mut n, s, r).unwrap();
        let e = n.edge_between(s, r).unwrap();
        assert!((n.edge(e).unwrap().weight - 0.8).abs() < 1e-12);
        assert!(!n.edge(e).unwrap().fixated);
        reinforce(&mut n, s, r).unwrap();
        assert!(n.edge(e).unwrap().fixated);
        assert!((n.edge(e).unwrap().weight - 1.6).abs() < 1e-12);
    }

    #[test]
    fn large_boost_fixates_at_once() {
        let mut n = Network::new(Params { boost: 2.5, ..Params::default() }).unwrap();
        let s = n.add_node(None, NodeKind::Sensory).unwrap();
        let r = n.add_node(None, NodeKind::Reward).unwrap();
        n.set_weight(r.into(), 3.0).unwrap();
        reinforce(&mut n, s, r).unwrap();
        assert!(n.edge(n.edge_between(s, r).unwrap()).unwrap().fixated);
    }

    #[test]
    fn reinforce_errors() {
        let (mut n, s, r) = reward_net();
        assert_eq!(reinforce(&mut n, r, r), Err(LearnError::Net(NetError::SelfEdge(r))));
        assert_eq!(reinforce(&mut n, r, s), Err(LearnError::NotARewardNode(s)));
    }

    fn chain(n: &mut Network, labels: &[&str]) -> Vec<NodeId> {
        labels.iter().map(|l| n.node_for(l, NodeKind::Plain)).collect()
    }

    #[test]
    fn replay_of_a_repeated_node_terminates() {
        let mut n = net();
        let a = chain(&mut n, &["a"])[0];
        replay(&mut n, &Episode::new(vec![a, a, a]).unwrap(), 2).unwrap();
        assert_eq!(n.edges().len(), 0);
    }

    #[test]
    fn replay_three_rounds_fixates() {
        let mut n = net();
        let ids = chain(&mut n, &["a", "b", "c"]);
        let ep = Episode::new(ids.clone()).unwrap();
        let cue_before = crate::substrate::min_cue_strength(n.node(ids[0]).unwrap(), &n.params);
        replay(&mut n, &ep, 3).unwrap();
        for w in ids.windows(2) {
            assert!(n.edge(n.edge_between(w[0], w[1]).unwrap()).unwrap().fixated);
        }
        let cue_after = crate::substrate::min_cue_strength(n.node(ids[0]).unwrap(), &n.params);
        assert!(cue_after < cue_before);
        assert_eq!(replay(&mut n, &ep, 0), Err(LearnError::ZeroCount("rounds")));
        assert!(n.reciprocity_holds());
    }

    #[test]
    fn cyclic_replay_circulates() {
        let mut plain = net();
        let ids = chain(&mut plain, &["a", "b", "c"]);
        let mut cyc = plain.clone();
        replay(&mut plain, &Episode::new(ids.clone()).unwrap(), 1).unwrap();
        let mut loop_ids = ids.clone();
        loop_ids.push(ids[0]);
        let ep = Episode::new(loop_ids).unwrap();
        assert!(ep.is_cyclic());
        replay(&mut cyc, &ep, 1).unwrap();
        let ca = cyc.edge_between(ids[2], ids[0]).unwrap();
        assert!(cyc.edge(ca).unwrap().weight > 0.0);
        let ab = cyc.edge_between(ids[0], ids[1]).unwrap();
        assert!(cyc.edge(ab).unwrap().weight > plain.weight_between(ids[0], ids[1]));
    }
}
