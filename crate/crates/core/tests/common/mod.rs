//! Generators and oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use tnet_core::planner::PlannerParams;
use tnet_core::substrate::Params;
use tnet_core::transducer::{make_transducer, Outcome, Row, Transducer, TransducerSpec};
use tnet_core::{Network, NodeId, NodeKind};

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random row over the given states and outputs; some outcomes get zero mass.
fn random_row<R: Rng>(rng: &mut R, state: &str, input: &str, states: &[String], outputs: &[String]) -> Row {
    let mut outs = Vec::new();
    for s in states {
        for o in outputs {
            let w: f64 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..1.0) };
            outs.push((s.clone(), o.clone(), w));
        }
    }
    if outs.iter().all(|o| o.2 == 0.0) {
        outs[0].2 = 1.0;
    }
    let total: f64 = outs.iter().map(|o| o.2).sum();
    Row {
        state: state.into(),
        input: input.into(),
        outcomes: outs
            .into_iter()
            .filter(|o| o.2 > 0.0)
            .map(|(state, output, w)| Outcome { state, output, p: w / total })
            .collect(),
    }
}

/// Random transducer with every (state, input) row defined.
pub fn random_transducer<R: Rng>(rng: &mut R, prefix: &str, inputs: &[String], outputs: &[String]) -> Transducer {
    let states = names(prefix, rng.gen_range(1..=3));
    let mut rows = Vec::new();
    for s in &states {
        for i in inputs {
            rows.push(random_row(rng, s, i, &states, outputs));
        }
    }
    let spec = TransducerSpec { states: states.clone(), inputs: inputs.to_vec(), outputs: outputs.to_vec(), rows };
    make_transducer(&spec).expect("generated spec is valid")
}

/// A composable pair with alphabets of 1 to 3 symbols.
pub fn random_pair<R: Rng>(rng: &mut R) -> (Transducer, Transducer) {
    let a = names("a", rng.gen_range(1..=3));
    let b = names("b", rng.gen_range(1..=3));
    let c = names("c", rng.gen_range(1..=3));
    (random_transducer(rng, "p", &a, &b), random_transducer(rng, "q", &b, &c))
}

/// Random DAG: node 0 is the source, node n-1 the goal, edges only go forward in index order.
pub struct Dag {
    pub net: Network,
    pub nodes: Vec<NodeId>,
}

pub fn random_dag<R: Rng>(rng: &mut R, n: usize) -> Dag {
    let mut net = Network::new(Params::default()).unwrap();
    let wm = net.params.w_max;
    let nodes: Vec<NodeId> = (0..n)
        .map(|i| {
            let id = net.add_node(Some(&format!("v{i}")), NodeKind::Plain).unwrap();
            net.set_weight(id.into(), rng.gen_range(0.5..=1.0) * wm).unwrap();
            id
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) || (j == i + 1 && rng.gen_bool(0.5)) {
                let (f, r) = net.ensure_reciprocal(nodes[i], nodes[j]).unwrap();
                net.set_weight(f.into(), rng.gen_range(0.1..=1.0) * wm).unwrap();
                net.set_weight(r.into(), rng.gen_range(0.1..=1.0) * wm).unwrap();
            }
        }
    }
    Dag { net, nodes }
}

/// Sum over all paths from `x` to `goal` of the product of normalized back-edge weights and
/// normalized weights of every node on the path except the goal.
pub fn path_sum(net: &Network, x: NodeId, goal: NodeId) -> f64 {
    let wm = net.params.w_max;
    if x == goal {
        return 1.0;
    }
    let wx = net.node(x).unwrap().weight / wm;
    let mut total = 0.0;
    for y in net.nodes().iter().map(|n| n.id) {
        if y.0 > x.0 && net.edge_between(x, y).is_some() {
            let back = net.weight_between(y, x) / wm;
            total += wx * back * path_sum(net, y, goal);
        }
    }
    total
}

/// Exhaustive per-candidate value: goal value times all path products, including the hop back
/// to the source.
pub fn oracle_values(net: &Network, source: NodeId, goal: NodeId, goal_value: f64) -> Vec<(NodeId, f64)> {
    let wm = net.params.w_max;
    let ws = net.node(source).unwrap().weight / wm;
    net.nodes()
        .iter()
        .map(|n| n.id)
        .filter(|&x| x != source && net.edge_between(source, x).is_some() && net.nodes()[x.index()].kind != NodeKind::Effector)
        .map(|x| (x, goal_value * path_sum(net, x, goal) * net.weight_between(x, source) / wm * ws))
        .collect()
}

/// Forward signal arriving at `x` from the source, summed over every forward path.
pub fn forward_arrival(net: &Network, source: NodeId, x: NodeId, drive: f64) -> f64 {
    let wm = net.params.w_max;
    let wx = net.node(x).unwrap().weight / wm;
    let mut total = 0.0;
    for p in net.nodes().iter().map(|n| n.id) {
        if p.0 < x.0 && net.edge_between(p, x).is_some() {
            let upstream = if p == source { drive } else { forward_arrival(net, source, p, drive) };
            total += upstream * net.weight_between(p, x) / wm * wx;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    NoCandidates,
    /// Top two candidates tie; the outcome depends on the tie rule.
    Tied,
    Withheld,
    Choose(NodeId, u32),
}

/// Absolute-policy decision predicted from exhaustive path sums, with no prior activation.
pub fn expected_absolute(net: &Network, source: NodeId, goal: NodeId, p: &PlannerParams) -> Expected {
    let mut values = oracle_values(net, source, goal, p.goal_value);
    if values.is_empty() {
        return Expected::NoCandidates;
    }
    let drive = p.source_strength as f64 / 3.0;
    let mut impulse: Vec<(NodeId, f64)> =
        values.iter().map(|&(x, _)| (x, forward_arrival(net, source, x, drive))).collect();
    let by_value = |a: &(NodeId, f64), b: &(NodeId, f64)| b.1.total_cmp(&a.1);
    impulse.sort_by(by_value);
    values.sort_by(by_value);
    let impulsive = impulse[0].1 >= p.t_act;
    let ranked = if impulsive { &impulse } else { &values };
    let best = ranked[0];
    if ranked.len() > 1 && (best.1 - ranked[1].1).abs() <= 1e-12 * best.1.max(1e-300) {
        return Expected::Tied;
    }
    if impulsive {
        return Expected::Choose(best.0, 1);
    }
    match (1..=p.max_rounds).find(|&r| r as f64 * best.1 >= p.t_act) {
        Some(r) => Expected::Choose(best.0, r),
        None => Expected::Withheld,
    }
}

/// The two-route feeder scenario with each node tied to its own effector.
pub struct Feeder {
    pub net: Network,
    pub a: NodeId,
    pub b: NodeId,
    pub d: NodeId,
    pub goal: NodeId,
}

pub fn feeder() -> Feeder {
    let mut net = Network::new(Params::default()).unwrap();
    let wm = net.params.w_max;
    let add = |net: &mut Network, l: &str, k| {
        let id = net.add_node(Some(l), k).unwrap();
        net.set_weight(id.into(), wm).unwrap();
        id
    };
    let a = add(&mut net, "A", NodeKind::Sensory);
    let b = add(&mut net, "B", NodeKind::Plain);
    let c = add(&mut net, "C", NodeKind::Plain);
    let d = add(&mut net, "D", NodeKind::Plain);
    let e = add(&mut net, "E", NodeKind::Plain);
    let goal = add(&mut net, "Feeder", NodeKind::Reward);
    for (s, t, w) in [(a, b, 0.9), (b, c, 0.8), (c, goal, 0.2), (a, d, 0.5), (d, e, 0.8), (e, goal, 0.9)] {
        let (f, r) = net.ensure_reciprocal(s, t).unwrap();
        net.set_weight(f.into(), w * wm).unwrap();
        net.set_weight(r.into(), w * wm).unwrap();
    }
    for (s, l) in [(b, "go-B"), (c, "go-C"), (d, "go-D"), (e, "go-E"), (goal, "feed")] {
        let x = add(&mut net, l, NodeKind::Effector);
        let (f, _) = net.ensure_reciprocal(s, x).unwrap();
        net.set_weight(f.into(), wm).unwrap();
    }
    Feeder { net, a, b, d, goal }
}

/// Two routes s -> x -> g and s -> y -> g with equal first hops; route values are
/// `(x_val, y_val)` after the return hop.
pub fn two_routes(x_val: f64, y_val: f64) -> (Network, NodeId, NodeId, NodeId, NodeId) {
    let mut net = Network::new(Params::default()).unwrap();
    let wm = net.params.w_max;
    let ids: Vec<NodeId> = ["s", "x", "y", "g"]
        .iter()
        .map(|l| {
            let id = net.add_node(Some(l), NodeKind::Plain).unwrap();
            net.set_weight(id.into(), wm).unwrap();
            id
        })
        .collect();
    let (s, x, y, g) = (ids[0], ids[1], ids[2], ids[3]);
    for (mid, val) in [(x, x_val), (y, y_val)] {
        let (f, r) = net.ensure_reciprocal(s, mid).unwrap();
        net.set_weight(f.into(), wm).unwrap();
        net.set_weight(r.into(), wm).unwrap();
        let (f, r) = net.ensure_reciprocal(mid, g).unwrap();
        net.set_weight(f.into(), wm).unwrap();
        net.set_weight(r.into(), val * wm).unwrap();
    }
    (net, s, x, y, g)
}
