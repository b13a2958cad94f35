//! Shared fixtures for the criterion benches.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnet_core::transducer::{make_transducer, Outcome, Row, Transducer, TransducerSpec};
use tnet_core::{Network, NodeId, NodeKind, Params, Signal};

/// Random layered network: `sensory` inputs feeding `hidden` plain nodes.
pub fn layered(sensory: usize, hidden: usize, seed: u64) -> (Network, Vec<NodeId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(Params::default()).expect("default params");
    let ins: Vec<NodeId> =
        (0..sensory).map(|i| net.add_node(Some(&format!("s{i}")), NodeKind::Sensory).expect("fresh")).collect();
    let hid: Vec<NodeId> = (0..hidden).map(|_| net.add_node(None, NodeKind::Plain).expect("fresh")).collect();
    for &h in &hid {
        for _ in 0..4 {
            let src = if rng.gen_bool(0.5) { ins[rng.gen_range(0..sensory)] } else { hid[rng.gen_range(0..hidden)] };
            if src != h {
                let (f, _) = net.ensure_reciprocal(src, h).expect("valid pair");
                net.set_weight(f.into(), rng.gen_range(0.2..3.0)).expect("edge");
            }
        }
    }
    (net, ins)
}

/// Input frames for `ticks` steps, each driving a random subset of `inputs`.
pub fn frames(inputs: &[NodeId], ticks: usize, seed: u64) -> Vec<BTreeMap<NodeId, Signal>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ticks)
        .map(|_| {
            let mut frame = BTreeMap::new();
            for &n in inputs {
                if rng.gen_bool(0.3) {
                    frame.insert(n, Signal::new(rng.gen_range(1..=3)).expect("in range"));
                }
            }
            frame
        })
        .collect()
}

/// Dense random transducer over `k` states and `k` symbols.
pub fn dense_transducer(k: usize, prefix: &str, seed: u64) -> Transducer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<String> = (0..k).map(|i| format!("{prefix}{i}")).collect();
    let syms: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
    let mut rows = Vec::new();
    for s in &states {
        for a in &syms {
            let w: Vec<f64> = (0..k * k).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            let outcomes = w
                .iter()
                .enumerate()
                .map(|(i, p)| Outcome { state: states[i / k].clone(), output: syms[i % k].clone(), p: p / total })
                .collect();
            rows.push(Row { state: s.clone(), input: a.clone(), outcomes });
        }
    }
    make_transducer(&TransducerSpec { states: states.clone(), inputs: syms.clone(), outputs: syms, rows })
        .expect("rows are stochastic")
}

/// Digit stream with a few recurring words mixed into noise.
pub fn digit_stream(len: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["756", "48361", "98136", "2024"];
    let mut s = String::new();
    while s.len() < len {
        if rng.gen_bool(0.5) {
            s.push_str(words[rng.gen_range(0..words.len())]);
        } else {
            s.push(char::from(b'0' + rng.gen_range(0..10)));
        }
    }
    s.truncate(len);
    s
}
