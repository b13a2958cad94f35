use proptest::prelude::*;
use tnet_core::chunker::{decompose_units, Chunker, ChunkerParams};
use tnet_core::{Firing, Network, NodeKind, Params};

/// Every split of `s` into pieces of at least `l_min` symbols.
fn tilings(s: &[char], l_min: usize) -> Vec<Vec<String>> {
    if s.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in l_min..=s.len() {
        for mut rest in tilings(&s[k..], l_min) {
            rest.insert(0, s[..k].iter().collect());
            out.push(rest);
        }
    }
    out
}

/// Largest total length of an in-order common subsequence of blocks.
fn shared(t1: &[String], t2: &[String]) -> usize {
    let mut dp = vec![vec![0usize; t2.len() + 1]; t1.len() + 1];
    for i in (0..t1.len()).rev() {
        for j in (0..t2.len()).rev() {
            let m = if t1[i] == t2[j] { t1[i].chars().count() + dp[i + 1][j + 1] } else { 0 };
            dp[i][j] = m.max(dp[i + 1][j]).max(dp[i][j + 1]);
        }
    }
    dp[0][0]
}

fn brute_force(u1: &str, u2: &str, l_min: usize) -> usize {
    let (c1, c2): (Vec<char>, Vec<char>) = (u1.chars().collect(), u2.chars().collect());
    let (a, b) = (tilings(&c1, l_min), tilings(&c2, l_min));
    a.iter().flat_map(|x| b.iter().map(move |y| shared(x, y))).max().unwrap_or(0)
}

proptest! {
    #[test]
    fn decomposition_tiles_exactly(u1 in "[ab]{0,8}", u2 in "[abc]{0,8}", l_min in 1usize..4) {
        let best = brute_force(&u1, &u2, l_min);
        match decompose_units(&u1, &u2, l_min) {
            None => prop_assert_eq!(best, 0),
            Some(d) => {
                prop_assert_eq!(d.tiling1.concat(), u1.clone());
                prop_assert_eq!(d.tiling2.concat(), u2.clone());
                for b in d.tiling1.iter().chain(&d.tiling2).chain(&d.common) {
                    prop_assert!(b.chars().count() >= l_min);
                }
                let mut rest1 = d.tiling1.iter();
                let mut rest2 = d.tiling2.iter();
                for c in &d.common {
                    prop_assert!(rest1.any(|b| b == c), "{} not in order in {:?}", c, d.tiling1);
                    prop_assert!(rest2.any(|b| b == c), "{} not in order in {:?}", c, d.tiling2);
                }
                prop_assert_eq!(d.shared_len(), best);
            }
        }
    }

    #[test]
    fn chunking_keeps_network_consistent(stream in "[0-9]{1,80}") {
        let mut net = Network::new(Params::default()).unwrap();
        let mut ch = Chunker::new(ChunkerParams::default(), Firing::Deterministic).unwrap();
        ch.run(&mut net, stream.chars()).unwrap();
        prop_assert!(net.check_invariants().is_ok());
        prop_assert!(net.reciprocity_holds());
        for n in net.nodes().iter().filter(|n| n.kind == NodeKind::Chunk && !n.members.is_empty()) {
            let spelled: String = n.members.iter().map(|&m| net.label(m)).collect();
            prop_assert_eq!(net.label(n.id), spelled.as_str());
            prop_assert!(n.members.len() >= 2);
        }
    }

    #[test]
    fn chunking_is_deterministic(stream in "[0-9]{1,60}") {
        let run = || {
            let mut net = Network::new(Params::default()).unwrap();
            let mut ch = Chunker::new(ChunkerParams::default(), Firing::Deterministic).unwrap();
            ch.run(&mut net, stream.chars()).unwrap();
            (net, ch.take_log().to_text())
        };
        prop_assert!(run() == run());
    }
}

#[test]
fn oracle_sanity() {
    assert_eq!(tilings(&['a', 'b', 'c', 'd'], 2).len(), 2);
    assert_eq!(brute_force("75648361", "75698136", 2), 3);
    assert_eq!(brute_force("ab", "ba", 1), 1);
}
