//! Weighted nodes and edges, their dynamics, and the tick loop.

mod log;
mod network;
mod params;
mod rng;
mod signal;

pub use log::{Event, EventKind, EventLog};
pub use network::{
    activate, back_relay, min_cue_strength, signal_out, update_weight, update_weight_scaled, EdgeId, EdgeKind,
    EdgeState, ElementId, Network, NodeId, NodeKind, NodeState, Plastic,
};
pub use params::Params;
pub use rng::{CounterRng, Firing};
pub use signal::Signal;

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn sig(v: i8) -> Signal {
        Signal::new(v).unwrap()
    }

    fn node(w: f64, a: f64) -> NodeState {
        NodeState {
            id: NodeId(0),
            label: None,
            kind: NodeKind::Plain,
            weight: w,
            activation: a,
            fixated: w >= 1.0,
            above_threshold_increments: 0,
            members: vec![],
        }
    }

    #[test]
    fn signal_range() {
        assert!(Signal::new(4).is_none());
        assert!(Signal::new(-3).is_some());
        assert_eq!(Signal::saturating(-9).value(), -3);
    }

    #[test]
    fn signal_out_cases() {
        let p = Params::default();
        assert_eq!(signal_out(&node(3.0, 1.0), sig(3), &p), sig(3));
        assert!(signal_out(&node(1.0, 0.5), sig(-2), &p).value() < 0);
        assert_eq!(signal_out(&node(0.0, 0.1), sig(1), &p), sig(1));
    }

    #[test]
    fn signal_out_monotone_on_grid() {
        let p = Params::default();
        let ws: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let acts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        for m in 1..=3i8 {
            for (wi, &w) in ws.iter().enumerate() {
                for (ai, &a) in acts.iter().enumerate() {
                    let here = signal_out(&node(w, a), sig(m), &p).value();
                    if wi + 1 < ws.len() {
                        assert!(signal_out(&node(ws[wi + 1], a), sig(m), &p).value() >= here);
                    }
                    if ai + 1 < acts.len() {
                        assert!(signal_out(&node(w, acts[ai + 1]), sig(m), &p).value() >= here);
                    }
                    if m < 3 {
                        assert!(signal_out(&node(w, a), sig(m + 1), &p).value() >= here);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_schedule() {
        let p = Params::default();
        let mut n = node(0.5, 0.0);
        assert!((update_weight(&mut n, sig(3), false, &p) - 0.9).abs() < 1e-12);
        let mut n = node(1.2, 0.0);
        n.above_threshold_increments = 1;
        assert!((update_weight(&mut n, sig(3), false, &p) - 1.4).abs() < 1e-12);
        assert_eq!(n.above_threshold_increments, 2);
        let mut n = node(3.0, 0.0);
        assert_eq!(update_weight(&mut n, sig(3), false, &p), 3.0);
        let mut n = node(0.0, 0.0);
        update_weight(&mut n, sig(1), true, &p);
        assert!((n.weight - 0.8).abs() < 1e-12);
        assert_eq!(update_weight(&mut n, sig(-2), false, &p), n.weight);
    }

    #[test]
    fn three_observations_fixate() {
        let p = Params::default();
        let mut n = node(0.0, 0.0);
        for _ in 0..2 {
            update_weight(&mut n, sig(3), false, &p);
        }
        assert!(!n.fixated);
        update_weight(&mut n, sig(3), false, &p);
        assert!(n.fixated);
    }

    fn net() -> Network {
        Network::new(Params::default()).unwrap()
    }

    #[test]
    fn decay_examples() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Plain).unwrap();
        let b = n.add_node(Some("b"), NodeKind::Plain).unwrap();
        let c = n.add_node(Some("c"), NodeKind::Plain).unwrap();
        n.set_weight(a.into(), 0.4).unwrap();
        n.set_weight(b.into(), 1.2).unwrap();
        n.set_weight(c.into(), 0.002).unwrap();
        n.advance();
        assert_eq!(n.node(c).unwrap().weight, 0.0);
        n.advance_by(29);
        assert!((n.node(a).unwrap().weight - 0.25).abs() < 1e-12);
        n.advance_by(970);
        assert_eq!(n.node(b).unwrap().weight, 1.2);
    }

    #[test]
    fn observed_elements_skip_decay() {
        let mut n = net();
        let a = n.add_node(None, NodeKind::Plain).unwrap();
        n.learn(a.into(), false).unwrap();
        n.advance();
        assert!((n.node(a).unwrap().weight - 0.4).abs() < 1e-12);
        n.advance();
        assert!((n.node(a).unwrap().weight - 0.395).abs() < 1e-12);
    }

    #[test]
    fn nightly_reset_cases() {
        let mut n = net();
        let a = n.add_node(None, NodeKind::Plain).unwrap();
        let b = n.add_node(None, NodeKind::Plain).unwrap();
        let c = n.add_node(None, NodeKind::Plain).unwrap();
        n.set_weight(a.into(), 1.5).unwrap();
        n.set_weight(b.into(), 1.0).unwrap();
        n.set_weight(c.into(), 0.9).unwrap();
        n.node_mut(a).unwrap().above_threshold_increments = 4;
        n.nightly_reset();
        assert!((n.node(a).unwrap().weight - 1.1).abs() < 1e-12);
        assert_eq!(n.node(a).unwrap().above_threshold_increments, 0);
        assert_eq!(n.node(b).unwrap().weight, 1.0);
        assert_eq!(n.node(c).unwrap().weight, 0.9);
    }

    #[test]
    fn reciprocal_edges() {
        let mut n = net();
        let a = n.add_node(None, NodeKind::Plain).unwrap();
        let b = n.add_node(None, NodeKind::Plain).unwrap();
        let (f, r) = n.ensure_reciprocal(a, b).unwrap();
        assert_eq!(n.edge(f).unwrap().weight, 0.0);
        assert_eq!(n.edge(r).unwrap().weight, 0.0);
        assert_eq!(n.ensure_reciprocal(a, b).unwrap(), (f, r));
        assert_eq!(n.edges().len(), 2);
        assert!(n.ensure_reciprocal(a, NodeId(9)).is_err());
        assert!(n.ensure_reciprocal(a, a).is_err());
    }

    #[test]
    fn back_signal_weaker() {
        let p = Params::default();
        assert!(back_relay(sig(3), &p).magnitude() <= 2);
        assert_eq!(back_relay(sig(-3), &p), sig(-1));
        assert_eq!(back_relay(sig(1), &p), Signal::ZERO);
    }

    #[test]
    fn pure_decay_tick() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Sensory).unwrap();
        let b = n.add_node(Some("b"), NodeKind::Plain).unwrap();
        let (f, _) = n.ensure_reciprocal(a, b).unwrap();
        n.set_weight(a.into(), 0.3).unwrap();
        n.set_weight(f.into(), 0.2).unwrap();
        let log = n.tick(&BTreeMap::new(), Firing::Deterministic).unwrap();
        assert_eq!(log.count(EventKind::Fire), 0);
        assert!((n.node(a).unwrap().weight - 0.295).abs() < 1e-12);
        assert!((n.edge(f).unwrap().weight - 0.195).abs() < 1e-12);
        assert_eq!(n.tick_count(), 1);
    }

    #[test]
    fn certain_firing_reaches_out_edges() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Sensory).unwrap();
        let b = n.add_node(Some("b"), NodeKind::Plain).unwrap();
        let c = n.add_node(Some("c"), NodeKind::Plain).unwrap();
        let (ab, _) = n.ensure_reciprocal(a, b).unwrap();
        let (ac, _) = n.ensure_reciprocal(a, c).unwrap();
        n.set_activation(a.into(), 1.0).unwrap();
        let log = n.tick(&BTreeMap::new(), Firing::Deterministic).unwrap();
        assert_eq!(log.count(EventKind::Fire), 1);
        let relayed: Vec<EdgeId> = n.pending().iter().map(|(e, _)| *e).collect();
        assert!(relayed.contains(&ab) && relayed.contains(&ac));
        // delivery next tick raises the targets
        n.tick(&BTreeMap::new(), Firing::Deterministic).unwrap();
        assert!(n.node(b).unwrap().activation > 0.0);
        assert!(n.node(c).unwrap().weight > 0.0);
    }

    #[test]
    fn bernoulli_firing_rate() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Plain).unwrap();
        let firing = Firing::seeded(17);
        let mut fired = 0;
        let total = 100_000;
        for _ in 0..total {
            n.set_activation(a.into(), 0.4).unwrap();
            fired += n.tick(&BTreeMap::new(), firing).unwrap().count(EventKind::Fire);
        }
        let rate = fired as f64 / total as f64;
        assert!((rate - 0.4).abs() < 0.02 * 0.4, "rate {rate}");
    }

    #[test]
    fn external_must_target_sensory() {
        let mut n = net();
        let a = n.add_node(Some("a"), NodeKind::Plain).unwrap();
        let mut ext = BTreeMap::new();
        ext.insert(a, sig(3));
        assert!(matches!(n.tick(&ext, Firing::Deterministic), Err(crate::error::NetError::NotSensory(_))));
        let mut ext = BTreeMap::new();
        ext.insert(NodeId(42), sig(3));
        assert!(n.tick(&ext, Firing::Deterministic).is_err());
    }

    #[test]
    fn loop_signal_shrinks_to_zero() {
        let p = Params::default();
        let mut n = net();
        let a = n.add_node(None, NodeKind::Plain).unwrap();
        let b = n.add_node(None, NodeKind::Plain).unwrap();
        let (f, _) = n.ensure_reciprocal(a, b).unwrap();
        n.set_weight(f.into(), 3.0).unwrap();
        n.set_activation(f.into(), 1.0).unwrap();
        let fwd = n.edge(f).unwrap().clone();
        let mut m = sig(3);
        let mut seq = vec![m.magnitude()];
        while !m.is_zero() {
            m = back_relay(signal_out(&fwd, m, &p), &p);
            seq.push(m.magnitude());
        }
        assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    }

    #[test]
    fn cue_strength_drops_with_weight_and_activation() {
        let p = Params::default();
        let lo = node(0.0, 0.0);
        let hi = node(1.5, 0.2);
        assert!(min_cue_strength(&hi, &p) < min_cue_strength(&lo, &p));
    }

    #[test]
    fn params_validation() {
        assert!(Params::default().validate().is_ok());
        let bad = Params { theta: 4.0, ..Params::default() };
        assert!(bad.validate().is_err());
        let bad = Params { beta: 1.0, ..Params::default() };
        assert!(bad.validate().is_err());
        let bad = Params { dw: 0.0, ..Params::default() };
        assert!(bad.validate().is_err());
    }
}
