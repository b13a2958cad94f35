//! Structural checks for the fig1a/fig1b golden networks.

use std::collections::BTreeSet;

use crate::substrate::{EdgeKind, Network, NodeKind};

use super::corpus::{STRING_A, STRING_B, STRING_C};

/// Labels of fixated chunk nodes.
pub fn fixated_chunk_labels(net: &Network) -> BTreeSet<String> {
    net.nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Chunk && n.fixated)
        .filter_map(|n| n.label.clone())
        .collect()
}

/// Forward out-neighbours of a labelled node among fixated chunks, with edge weights.
pub fn chunk_successors(net: &Network, label: &str) -> Vec<(String, f64)> {
    let Some(id) = net.find(label) else { return Vec::new() };
    let mut out: Vec<(String, f64)> = net
        .out_edges(id)
        .iter()
        .map(|&e| &net.edges()[e.index()])
        .filter(|e| e.kind == EdgeKind::Forward && e.weight > 0.0)
        .filter(|e| {
            let n = &net.nodes()[e.dst.index()];
            n.kind == NodeKind::Chunk && n.fixated
        })
        .map(|e| (net.label(e.dst).to_string(), e.weight))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn fig1a_labels() -> BTreeSet<String> {
    ["756", "48361", "98", "136", "28"].iter().map(|s| s.to_string()).collect()
}

pub fn fig1b_labels() -> BTreeSet<String> {
    [STRING_A, STRING_B, STRING_C].iter().map(|s| s.to_string()).collect()
}

fn successor_set(net: &Network, label: &str) -> BTreeSet<String> {
    chunk_successors(net, label).into_iter().map(|(l, _)| l).collect()
}

/// Label set plus the 756 fan-out relations. `exact_weights` also demands equal fan-out weights.
pub fn check_fig1a(net: &Network, exact_weights: bool) -> Result<(), String> {
    let labels = fixated_chunk_labels(net);
    if labels != fig1a_labels() {
        return Err(format!("fixated chunks {labels:?}"));
    }
    let fan = chunk_successors(net, "756");
    let targets: BTreeSet<String> = fan.iter().map(|(l, _)| l.clone()).collect();
    let want: BTreeSet<String> = ["48361", "98", "28"].iter().map(|s| s.to_string()).collect();
    if targets != want {
        return Err(format!("756 leads to {targets:?}"));
    }
    if exact_weights && fan.iter().any(|(_, w)| *w != fan[0].1) {
        return Err(format!("756 fan-out weights differ: {fan:?}"));
    }
    for l in ["98", "28"] {
        let s = successor_set(net, l);
        if s.len() != 1 || !s.contains("136") {
            return Err(format!("{l} leads to {s:?}"));
        }
    }
    Ok(())
}

pub fn check_fig1b(net: &Network) -> Result<(), String> {
    let labels = fixated_chunk_labels(net);
    if labels != fig1b_labels() {
        return Err(format!("fixated chunks {labels:?}"));
    }
    Ok(())
}
