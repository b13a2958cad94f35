//! Serial-order coding: one order-insensitive and two ordered chunk nodes for a pair.
//!
//! The ordered node for A-then-B hears A through an extra delay node, so the two inputs
//! coincide only when A arrives one tick before B. The order-insensitive node hears both
//! directly but holds activation longer, so it responds to either order at reduced strength.

use std::collections::{HashMap, VecDeque};

use super::ChunkerParams;
use crate::error::ChunkError;
use crate::substrate::{EdgeKind, Network, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderVariants {
    pub a: NodeId,
    pub b: NodeId,
    pub simultaneous: NodeId,
    pub ab: NodeId,
    pub ba: NodeId,
}

fn wire(net: &mut Network, src: NodeId, dst: NodeId) -> Result<(), ChunkError> {
    net.forward_pair(src, dst)?;
    Ok(())
}

/// Ensure the three variant nodes for `a` and `b` and their input wiring.
pub fn order_variants(net: &mut Network, a: NodeId, b: NodeId) -> Result<OrderVariants, ChunkError> {
    if a == b {
        return Err(ChunkError::SameNode);
    }
    let la = net.node(a)?.label.clone().unwrap_or_else(|| format!("n{}", a.0));
    let lb = net.node(b)?.label.clone().unwrap_or_else(|| format!("n{}", b.0));
    let simultaneous = net.node_for(&format!("{la}&{lb}"), NodeKind::Chunk);
    let ab = net.node_for(&format!("{la}>{lb}"), NodeKind::Chunk);
    let ba = net.node_for(&format!("{lb}>{la}"), NodeKind::Chunk);
    let delay_a = net.node_for(&format!("{la}>{lb}/delay"), NodeKind::Plain);
    let delay_b = net.node_for(&format!("{lb}>{la}/delay"), NodeKind::Plain);
    wire(net, a, simultaneous)?;
    wire(net, b, simultaneous)?;
    wire(net, a, delay_a)?;
    wire(net, delay_a, ab)?;
    wire(net, b, ab)?;
    wire(net, b, delay_b)?;
    wire(net, delay_b, ba)?;
    wire(net, a, ba)?;
    Ok(OrderVariants { a, b, simultaneous, ab, ba })
}

/// Hop distance from `src` to every node reachable over forward edges.
fn arrival(net: &Network, src: NodeId) -> HashMap<NodeId, u64> {
    let mut dist = HashMap::from([(src, 0u64)]);
    let mut queue = VecDeque::from([src]);
    while let Some(n) = queue.pop_front() {
        let d = dist[&n];
        for e in net.out_edges(n) {
            let e = &net.edges()[e.index()];
            if e.kind == EdgeKind::Forward && !dist.contains_key(&e.dst) {
                dist.insert(e.dst, d + 1);
                queue.push_back(e.dst);
            }
        }
    }
    dist
}

/// Present `first` then `second` (one tick apart) and credit every variant whose response
/// reaches the coincidence level. Credits scale with the response. Returns the credited nodes.
///
/// `gap` silent ticks follow the pair.
pub fn present_pair(
    net: &mut Network,
    v: &OrderVariants,
    first: NodeId,
    second: NodeId,
    params: &ChunkerParams,
    gap: u64,
) -> Result<Vec<NodeId>, ChunkError> {
    if first == second || ![v.a, v.b].contains(&first) || ![v.a, v.b].contains(&second) {
        return Err(ChunkError::SameNode);
    }
    let from_first = arrival(net, first);
    let from_second = arrival(net, second);
    let mut credited = Vec::new();
    for (node, retention) in [
        (v.simultaneous, params.order_sim_retention),
        (v.ab, params.order_seq_retention),
        (v.ba, params.order_seq_retention),
    ] {
        let (Some(t1), Some(t2)) = (from_first.get(&node), from_second.get(&node)) else {
            continue;
        };
        let lag = (*t1 as i64 - (*t2 as i64 + 1)).unsigned_abs();
        let response = 0.5 * retention.powi(lag as i32) + 0.5;
        if response >= params.order_coincidence {
            net.learn_scaled(node.into(), response)?;
            credited.push(node);
        }
    }
    net.advance_by(2 + gap);
    Ok(credited)
}

/// Present a stream of ordered pairs until one variant fixates. Returns the pair index and node.
pub fn first_fixation(
    net: &mut Network,
    v: &OrderVariants,
    pairs: &[(NodeId, NodeId)],
    params: &ChunkerParams,
    gap: u64,
) -> Result<Option<(usize, NodeId)>, ChunkError> {
    for (i, &(x, y)) in pairs.iter().enumerate() {
        present_pair(net, v, x, y, params, gap)?;
        let fixated: Vec<NodeId> = [v.simultaneous, v.ab, v.ba]
            .into_iter()
            .filter(|n| net.nodes()[n.index()].fixated)
            .collect();
        match fixated.as_slice() {
            [] => {}
            [one] => return Ok(Some((i, *one))),
            // several in the same trial: the heavier one counts as first
            many => {
                let best = many
                    .iter()
                    .copied()
                    .max_by(|a, b| net.nodes()[a.index()].weight.total_cmp(&net.nodes()[b.index()].weight))
                    .expect("non-empty");
                return Ok(Some((i, best)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::Params;

    fn setup() -> (Network, OrderVariants) {
        let mut net = Network::new(Params::default()).unwrap();
        let a = net.add_node(Some("A"), NodeKind::Sensory).unwrap();
        let b = net.add_node(Some("B"), NodeKind::Sensory).unwrap();
        let v = order_variants(&mut net, a, b).unwrap();
        (net, v)
    }

    #[test]
    fn idempotent_and_distinct() {
        let (mut net, v) = setup();
        assert_eq!(order_variants(&mut net, v.a, v.b).unwrap(), v);
        assert_ne!(v.ab, v.ba);
        assert_ne!(v.ab, v.simultaneous);
        assert_eq!(order_variants(&mut net, v.a, v.a), Err(ChunkError::SameNode));
    }

    #[test]
    fn ab_pair_drives_ab_not_ba() {
        let (mut net, v) = setup();
        let got = present_pair(&mut net, &v, v.a, v.b, &ChunkerParams::default(), 2).unwrap();
        assert!(got.contains(&v.ab));
        assert!(got.contains(&v.simultaneous));
        assert!(!got.contains(&v.ba));
        assert!(net.node(v.ab).unwrap().weight > net.node(v.simultaneous).unwrap().weight);
    }

    #[test]
    fn stream_statistics_pick_the_variant() {
        let p = ChunkerParams::default();
        let (mut net, v) = setup();
        let pure = vec![(v.a, v.b); 10];
        assert_eq!(first_fixation(&mut net, &v, &pure, &p, 1).unwrap().map(|x| x.1), Some(v.ab));
        let (mut net, v) = setup();
        let mixed: Vec<_> = (0..10).map(|i| if i % 2 == 0 { (v.a, v.b) } else { (v.b, v.a) }).collect();
        assert_eq!(first_fixation(&mut net, &v, &mixed, &p, 1).unwrap().map(|x| x.1), Some(v.simultaneous));
    }
}
