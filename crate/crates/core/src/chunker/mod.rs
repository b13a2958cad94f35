//! Online segmentation: a working-memory buffer over the input stream, repeat detection,
//! chunk nodes, and decomposition of stored traces into shared blocks.

mod decompose;
mod order;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

pub use decompose::{decompose_units, Decomposition};
pub use order::{first_fixation, order_variants, present_pair, OrderVariants};

use crate::error::ChunkError;
use crate::substrate::{EdgeKind, ElementId, EventLog, Firing, Network, NodeId, NodeKind, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkerParams {
    /// Buffer length W in symbols.
    pub buffer_len: usize,
    pub l_min: usize,
    /// Co-activation window in ticks.
    pub window_coact: u64,
    /// Per-tick activation retention of the order-insensitive variant.
    pub order_sim_retention: f64,
    /// Per-tick activation retention of the ordered variants.
    pub order_seq_retention: f64,
    /// Minimum response for an order variant to count as co-activated.
    pub order_coincidence: f64,
}

impl Default for ChunkerParams {
    fn default() -> Self {
        ChunkerParams {
            buffer_len: 24,
            l_min: 2,
            window_coact: 3,
            order_sim_retention: 0.6,
            order_seq_retention: 0.2,
            order_coincidence: 0.75,
        }
    }
}

impl ChunkerParams {
    pub fn validate(&self) -> Result<(), ChunkError> {
        if self.l_min < 2 {
            return Err(ChunkError::InvalidParams(format!("l_min must be at least 2, got {}", self.l_min)));
        }
        if self.buffer_len < 2 * self.l_min {
            return Err(ChunkError::InvalidParams(format!(
                "buffer_len {} is below 2 * l_min",
                self.buffer_len
            )));
        }
        if self.window_coact == 0 {
            return Err(ChunkError::InvalidParams("window_coact must be positive".into()));
        }
        for (name, v) in [
            ("order_sim_retention", self.order_sim_retention),
            ("order_seq_retention", self.order_seq_retention),
            ("order_coincidence", self.order_coincidence),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ChunkError::InvalidParams(format!("{name} must lie in (0,1], got {v}")));
            }
        }
        Ok(())
    }

    /// Upper bound on working-memory elements touched through `depth` layers.
    pub fn active_cap(&self, depth: usize) -> usize {
        self.buffer_len * (depth + 1)
    }
}

/// The last W symbols with their ticks, plus the elements they keep active.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorkingBuffer {
    pub symbols: VecDeque<(u64, char)>,
    pub active_elements: BTreeSet<ElementId>,
}

impl WorkingBuffer {
    pub fn text(&self) -> String {
        self.symbols.iter().map(|(_, c)| *c).collect()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A buffer span between fixated-chunk boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub text: String,
    pub start: u64,
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    pub occurrences: usize,
    pub matched_weight: f64,
    pub length: usize,
    pub leftmost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Record {
    label: String,
    start: u64,
    end: u64,
}

impl Record {
    fn new(label: &str, start: u64) -> Record {
        let len = label.chars().count() as u64;
        Record { label: label.to_string(), start, end: start + len - 1 }
    }
}

/// Streaming segmenter bound to one network.
#[derive(Debug, Clone)]
pub struct Chunker {
    pub params: ChunkerParams,
    pub buf: WorkingBuffer,
    firing: Firing,
    t: u64,
    records: Vec<Record>,
    pending: Option<(u64, u64)>,
    prevfin: Option<Record>,
    prev_sensory: Option<NodeId>,
    log: EventLog,
}

fn label_len(s: &str) -> u64 {
    s.chars().count() as u64
}

impl Chunker {
    pub fn new(params: ChunkerParams, firing: Firing) -> Result<Self, ChunkError> {
        params.validate()?;
        Ok(Chunker {
            params,
            buf: WorkingBuffer::default(),
            firing,
            t: 0,
            records: Vec::new(),
            pending: None,
            prevfin: None,
            prev_sensory: None,
            log: EventLog::default(),
        })
    }

    /// Tick events collected since the last call.
    pub fn take_log(&mut self) -> EventLog {
        std::mem::take(&mut self.log)
    }

    /// Symbols observed so far.
    pub fn position(&self) -> u64 {
        self.t
    }

    fn buf_start(&self) -> u64 {
        self.buf.symbols.front().map_or(self.t + 1, |(t, _)| *t)
    }

    fn sym(&self, tick: u64) -> char {
        self.buf.symbols[(tick - self.buf_start()) as usize].1
    }

    fn text(&self, a: u64, b: u64) -> String {
        (a..=b).map(|i| self.sym(i)).collect()
    }

    fn last_end(&self) -> u64 {
        self.records
            .last()
            .map(|r| r.end)
            .or_else(|| self.prevfin.as_ref().map(|r| r.end))
            .unwrap_or(0)
    }

    fn unit_start(&self) -> u64 {
        (self.last_end() + 1).max(self.buf_start())
    }

    fn bounded(&self, start: u64) -> bool {
        self.last_end() + 1 == start || start == 1
    }

    /// The open span after the last recognised chunk.
    pub fn current_unit(&self) -> Unit {
        let us = self.unit_start();
        let text = if us <= self.t { self.text(us, self.t) } else { String::new() };
        let occurrences = if text.is_empty() { 0 } else { count_occurrences(&self.buf.text(), &text) };
        Unit { text, start: us, occurrences }
    }

    fn chunk_id(&self, net: &Network, label: &str) -> Option<NodeId> {
        net.find(label).filter(|id| net.nodes()[id.index()].kind == NodeKind::Chunk)
    }

    fn fixed(&self, net: &Network, label: &str) -> bool {
        self.chunk_id(net, label).is_some_and(|id| net.nodes()[id.index()].fixated)
    }

    fn weight(&self, net: &Network, label: &str) -> f64 {
        self.chunk_id(net, label).map_or(0.0, |id| net.nodes()[id.index()].weight)
    }

    fn chunk(&self, net: &mut Network, label: &str) -> Result<NodeId, ChunkError> {
        if let Some(id) = self.chunk_id(net, label) {
            return Ok(id);
        }
        let members: Vec<NodeId> = label
            .chars()
            .map(|c| net.node_for(&c.to_string(), NodeKind::Sensory))
            .collect();
        allocate_chunk_node(net, &members)
    }

    fn snapshot(&self, net: &Network) -> HashSet<String> {
        net.nodes()
            .iter()
            .filter(|n| n.kind == NodeKind::Chunk && n.fixated)
            .filter_map(|n| n.label.clone())
            .collect()
    }

    fn credit(&self, net: &mut Network, label: &str, boost: bool) -> Result<(), ChunkError> {
        let id = self.chunk(net, label)?;
        net.learn(id.into(), boost)?;
        Ok(())
    }

    fn credit_edge(&self, net: &mut Network, a: &str, b: &str, boost: bool) -> Result<(), ChunkError> {
        let (x, y) = (self.chunk(net, a)?, self.chunk(net, b)?);
        let e = net.forward_pair(x, y)?;
        net.learn(e.into(), boost)?;
        Ok(())
    }

    /// Raise a part's weight to `w` unless it is fixated or already heavier.
    fn inherit_node(&self, net: &mut Network, label: &str, w: f64) -> Result<(), ChunkError> {
        let id = self.chunk(net, label)?;
        let n = net.node(id)?;
        if !n.fixated && n.weight < w {
            net.set_weight(id.into(), w)?;
        }
        Ok(())
    }

    fn inherit_edge(&self, net: &mut Network, a: &str, b: &str, w: f64) -> Result<(), ChunkError> {
        let (x, y) = (self.chunk(net, a)?, self.chunk(net, b)?);
        let e = net.forward_pair(x, y)?;
        let es = net.edge(e)?;
        if !es.fixated && es.weight < w {
            net.set_weight(e.into(), w)?;
        }
        Ok(())
    }

    fn add_records(&mut self, net: &mut Network, new: Vec<Record>, snap: &HashSet<String>) -> Result<(), ChunkError> {
        let mut all: Vec<Record> = self.records.drain(..).chain(new.iter().cloned()).collect();
        all.sort_by_key(|r| r.start);
        let boosts: Vec<bool> = new
            .iter()
            .map(|n| {
                all.iter()
                    .any(|r| (r.end + 1 == n.start || r.start == n.end + 1) && snap.contains(&r.label))
            })
            .collect();
        for (r, b) in new.iter().zip(boosts) {
            self.credit(net, &r.label, b)?;
        }
        self.records = all;
        Ok(())
    }

    fn place(parts: &[String], start: u64) -> Vec<Record> {
        let mut pos = start;
        parts
            .iter()
            .map(|p| {
                let r = Record::new(p, pos);
                pos = r.end + 1;
                r
            })
            .collect()
    }

    /// Replace a non-fixated trace by its parts; the parts take over its weight and links.
    fn retire(&mut self, net: &mut Network, trace: &str, parts: &[String], credits: usize) -> Result<(), ChunkError> {
        let tid = self.chunk(net, trace)?;
        let tw = net.node(tid)?.weight;
        for q in parts {
            self.inherit_node(net, q, tw)?;
        }
        for pair in parts.windows(2) {
            if pair[0] != pair[1] {
                self.inherit_edge(net, &pair[0], &pair[1], tw)?;
            }
        }
        let first = self.chunk(net, &parts[0])?;
        let last = self.chunk(net, &parts[parts.len() - 1])?;
        let n_edges = net.edges().len();
        for i in 0..n_edges {
            let e = net.edges()[i].clone();
            if e.kind != EdgeKind::Forward || e.weight <= 0.0 {
                continue;
            }
            let target = if e.dst == tid && e.src != first {
                Some((e.src, first))
            } else if e.src == tid && e.dst != last {
                Some((last, e.dst))
            } else {
                None
            };
            if let Some((x, y)) = target {
                let e2 = net.forward_pair(x, y)?;
                let old = net.edge(e2)?.clone();
                let edge = net.edge_mut(e2)?;
                edge.weight = old.weight.max(e.weight);
                edge.fixated = old.fixated || e.fixated;
                net.retire_element(e.id.into())?;
            }
        }
        net.retire_element(tid.into())?;
        for _ in 0..credits {
            for (i, q) in parts.iter().enumerate() {
                let b = (i > 0 && self.fixed(net, &parts[i - 1]))
                    || (i + 1 < parts.len() && self.fixed(net, &parts[i + 1]));
                self.credit(net, q, b)?;
            }
            for pair in parts.windows(2) {
                if pair[0] != pair[1] {
                    let b = self.fixed(net, &pair[0]) || self.fixed(net, &pair[1]);
                    self.credit_edge(net, &pair[0], &pair[1], b)?;
                }
            }
        }
        Ok(())
    }

    fn commit_unit(
        &mut self,
        net: &mut Network,
        label: &str,
        starts: &[u64],
        snap: &HashSet<String>,
    ) -> Result<(), ChunkError> {
        let mut best: Option<((usize, usize, f64), String, Decomposition)> = None;
        if self.weight(net, label) <= 0.0 {
            let mut traces: Vec<(String, f64)> = net
                .nodes()
                .iter()
                .filter(|n| n.kind == NodeKind::Chunk && !n.fixated && n.weight > 0.0)
                .filter_map(|n| n.label.clone().map(|l| (l, n.weight)))
                .filter(|(l, _)| l != label)
                .collect();
            traces.sort_by(|a, b| a.0.cmp(&b.0));
            for (trace, w) in traces {
                let Some(d) = decompose_units(&trace, label, self.params.l_min) else {
                    continue;
                };
                let key = (d.shared_len(), d.common.len(), w);
                if best.as_ref().is_none_or(|(k, _, _)| key > *k) {
                    best = Some((key, trace, d));
                }
            }
        }
        if let Some((_, trace, d)) = best {
            let new: Vec<Record> = starts.iter().flat_map(|&s| Self::place(&d.tiling2, s)).collect();
            self.add_records(net, new, snap)?;
            self.retire(net, &trace, &d.tiling1, starts.len())?;
        } else {
            let new = starts.iter().map(|&s| Record::new(label, s)).collect();
            self.add_records(net, new, snap)?;
        }
        Ok(())
    }

    fn commit_match(&mut self, net: &mut Network) -> Result<(), ChunkError> {
        let Some((d, len)) = self.pending.take() else {
            return Ok(());
        };
        let l_min = self.params.l_min as u64;
        if len < l_min {
            return Ok(());
        }
        let t = self.t;
        let us = self.unit_start();
        let later = (t + 1 - len, t);
        let earlier = (t + 1 - d - len, t - d);
        let snap = self.snapshot(net);
        if len >= d {
            let span0 = earlier.0;
            if span0 < us || d < l_min {
                return Ok(());
            }
            let copies = (len + d) / d;
            let unit = self.text(span0, span0 + d - 1);
            if span0 > us && self.bounded(us) {
                if span0 - us < l_min {
                    return Ok(());
                }
                let pre = self.text(us, span0 - 1);
                self.commit_unit(net, &pre, &[us], &snap)?;
            }
            let starts: Vec<u64> = (0..copies).map(|i| span0 + i * d).collect();
            return self.commit_unit(net, &unit, &starts, &snap);
        }
        if earlier.0 >= us {
            let repeat = self.text(later.0, later.1);
            let mid = (earlier.1 + 1, later.0 - 1);
            let mid_len = later.0 - earlier.1 - 1;
            if mid_len != 0 && mid_len < l_min {
                return Ok(());
            }
            let pre_len = earlier.0 - us;
            let pre_bounded = self.bounded(us);
            if pre_bounded && pre_len != 0 && pre_len < l_min {
                return Ok(());
            }
            if pre_bounded && pre_len > 0 {
                let pre = self.text(us, earlier.0 - 1);
                self.commit_unit(net, &pre, &[us], &snap)?;
            }
            self.commit_unit(net, &repeat, &[earlier.0, later.0], &snap)?;
            if mid_len > 0 {
                let m = self.text(mid.0, mid.1);
                self.commit_unit(net, &m, &[mid.0], &snap)?;
            }
            return Ok(());
        }
        // the earlier copy sits inside an unfixated record: split that record
        let Some(pos) = self.records.iter().position(|r| r.start <= earlier.0 && earlier.1 <= r.end) else {
            return Ok(());
        };
        let rec = self.records[pos].clone();
        if self.fixed(net, &rec.label) || !self.bounded(us) {
            return Ok(());
        }
        let open = self.text(us, t);
        let Some(d2) = decompose_units(&rec.label, &open, self.params.l_min) else {
            return Ok(());
        };
        self.records.remove(pos);
        let mut new = Self::place(&d2.tiling1, rec.start);
        new.extend(Self::place(&d2.tiling2, us));
        let tid = self.chunk(net, &rec.label)?;
        let tw = net.node(tid)?.weight;
        for q in &d2.tiling1 {
            self.inherit_node(net, q, tw)?;
        }
        for pair in d2.tiling1.windows(2) {
            if pair[0] != pair[1] {
                self.inherit_edge(net, &pair[0], &pair[1], tw)?;
            }
        }
        net.set_weight(tid.into(), 0.0)?;
        self.add_records(net, new, &snap)
    }

    fn finalize(&mut self, net: &mut Network, upto: u64) -> Result<(), ChunkError> {
        while self.records.first().is_some_and(|r| r.end <= upto) {
            let r = self.records.remove(0);
            if let Some(pf) = &self.prevfin {
                if pf.end + 1 == r.start && pf.label != r.label {
                    let b = self.fixed(net, &pf.label) || self.fixed(net, &r.label);
                    let a = pf.label.clone();
                    self.credit_edge(net, &a, &r.label, b)?;
                }
            }
            self.prevfin = Some(r);
        }
        Ok(())
    }

    /// Feed one symbol: buffer it, run segmentation, then one substrate tick.
    pub fn observe(&mut self, net: &mut Network, symbol: char) -> Result<(), ChunkError> {
        let t = self.t + 1;
        if let Some((d, len)) = self.pending {
            if t - d >= self.buf_start() && self.sym(t - d) == symbol {
                self.pending = Some((d, len + 1));
            } else {
                self.commit_match(net)?;
            }
        }
        self.t = t;
        self.buf.symbols.push_back((t, symbol));
        while self.buf.symbols.len() > self.params.buffer_len {
            self.buf.symbols.pop_front();
        }
        self.finalize(net, self.buf_start() - 1)?;

        let us = self.unit_start();
        let open: Vec<char> = self.text(us, t).chars().collect();
        let mut found: Option<String> = None;
        for n in net.nodes() {
            if n.kind != NodeKind::Chunk || n.weight <= 0.0 {
                continue;
            }
            let Some(l) = &n.label else { continue };
            let lc: Vec<char> = l.chars().collect();
            if lc.len() <= open.len() && open.ends_with(&lc) && found.as_ref().is_none_or(|f| lc.len() > label_len(f) as usize) {
                found = Some(l.clone());
            }
        }
        if let Some(label) = found {
            let snap = self.snapshot(net);
            let a = t + 1 - label_len(&label);
            if a > us && self.bounded(us) && a - us >= self.params.l_min as u64 {
                let pre = self.text(us, a - 1);
                self.commit_unit(net, &pre, &[us], &snap)?;
            }
            self.add_records(net, vec![Record::new(&label, a)], &snap)?;
            self.pending = None;
        } else if self.pending.is_none() {
            let bs = self.buf_start();
            let mut best: Option<(u64, u64)> = None;
            for d in 1..=(t - bs) {
                let mut len = 0u64;
                while t >= us + len && t >= bs + d + len && self.sym(t - len) == self.sym(t - d - len) {
                    len += 1;
                }
                if len > 0 && best.is_none_or(|(_, l)| len > l) {
                    best = Some((d, len));
                }
            }
            self.pending = best;
        }

        self.sense(net, symbol)?;
        Ok(())
    }

    /// Sensory side of an observation: activate the symbol node and the sequence edge, then tick.
    fn sense(&mut self, net: &mut Network, symbol: char) -> Result<(), ChunkError> {
        let node = net.node_for(&symbol.to_string(), NodeKind::Sensory);
        if let Some(prev) = self.prev_sensory.filter(|p| *p != node) {
            let e = net.forward_pair(prev, node)?;
            net.excite(e.into(), Signal::saturating(3))?;
            net.learn(e.into(), false)?;
        }
        self.prev_sensory = Some(node);
        let mut ext = BTreeMap::new();
        ext.insert(node, Signal::saturating(3));
        let out = net.tick(&ext, self.firing)?;
        self.log.extend(out);
        self.refresh_active(net);
        Ok(())
    }

    fn refresh_active(&mut self, net: &Network) {
        let mut active = BTreeSet::new();
        let mut prev: Option<NodeId> = None;
        for (_, c) in &self.buf.symbols {
            if let Some(id) = net.find(&c.to_string()) {
                active.insert(ElementId::Node(id));
                if let Some(e) = prev.and_then(|p| net.edge_between(p, id)) {
                    active.insert(ElementId::Edge(e));
                }
                prev = Some(id);
            }
        }
        for r in &self.records {
            if let Some(id) = self.chunk_id(net, &r.label) {
                active.insert(ElementId::Node(id));
            }
        }
        self.buf.active_elements = active;
    }

    /// Close the stream: commit any pending repeat and finalize all records.
    pub fn flush(&mut self, net: &mut Network) -> Result<(), ChunkError> {
        self.commit_match(net)?;
        self.finalize(net, u64::MAX)?;
        self.prev_sensory = None;
        Ok(())
    }

    /// Observe every symbol of `stream`, then flush.
    pub fn run<I: IntoIterator<Item = char>>(&mut self, net: &mut Network, stream: I) -> Result<(), ChunkError> {
        for c in stream {
            self.observe(net, c)?;
        }
        self.flush(net)
    }
}

fn count_occurrences(hay: &str, needle: &str) -> usize {
    let h: Vec<char> = hay.chars().collect();
    let n: Vec<char> = needle.chars().collect();
    if n.is_empty() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + n.len() <= h.len() {
        if h[i..i + n.len()] == n[..] {
            count += 1;
            i += n.len();
        } else {
            i += 1;
        }
    }
    count
}

/// Buffer substrings worth chunking, best first.
pub fn find_candidates(buf: &WorkingBuffer, net: &Network, l_min: usize) -> Vec<Candidate> {
    let text: Vec<char> = buf.symbols.iter().map(|(_, c)| *c).collect();
    let s: String = text.iter().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for len in l_min..=text.len() {
        for start in 0..=text.len() - len {
            let sub: String = text[start..start + len].iter().collect();
            if !seen.insert(sub.clone()) {
                continue;
            }
            let occurrences = count_occurrences(&s, &sub);
            let matched_weight = net
                .find(&sub)
                .map(|id| &net.nodes()[id.index()])
                .filter(|n| n.kind == NodeKind::Chunk)
                .map_or(0.0, |n| n.weight);
            if occurrences >= 2 || matched_weight > 0.0 {
                out.push(Candidate { text: sub, occurrences, matched_weight, length: len, leftmost: start });
            }
        }
    }
    out.sort_by(|a, b| {
        b.matched_weight
            .total_cmp(&a.matched_weight)
            .then(b.occurrences.cmp(&a.occurrences))
            .then(b.length.cmp(&a.length))
            .then(a.leftmost.cmp(&b.leftmost))
    });
    out
}

/// Chunk node for an ordered member list; reuses the node bound to the same list.
pub fn allocate_chunk_node(net: &mut Network, members: &[NodeId]) -> Result<NodeId, ChunkError> {
    if members.is_empty() {
        return Err(ChunkError::EmptyMembers);
    }
    if let Some(id) = net.chunk_for_members(members) {
        return Ok(id);
    }
    for m in members {
        net.node(*m)?;
    }
    let labels: Vec<&str> = members.iter().map(|m| net.label(*m)).collect();
    let plain = members.iter().all(|m| net.nodes()[m.index()].kind == NodeKind::Sensory);
    let label = if plain { labels.concat() } else { labels.join("+") };
    let id = net.add_node(Some(&label), NodeKind::Chunk)?;
    for m in members {
        net.connect(*m, id, EdgeKind::Member)?;
        net.connect(id, *m, EdgeKind::Member)?;
    }
    net.register_chunk(id, members.to_vec());
    Ok(id)
}

fn longest_common_substring(a: &[char], b: &[char]) -> usize {
    let mut best = 0;
    let mut row = vec![0usize; b.len() + 1];
    for &x in a {
        let mut prev = 0;
        for (j, &y) in b.iter().enumerate() {
            let tmp = row[j + 1];
            row[j + 1] = if x == y { prev + 1 } else { 0 };
            best = best.max(row[j + 1]);
            prev = tmp;
        }
    }
    best
}

/// Activation a chunk node gains when `fragment` is presented, before clamping.
pub fn match_gain(net: &Network, fragment: &str, node: NodeId) -> f64 {
    let frag: Vec<char> = fragment.chars().collect();
    let Ok(n) = net.node(node) else { return 0.0 };
    let Some(label) = n.label.as_ref().map(|l| l.chars().collect::<Vec<char>>()) else { return 0.0 };
    if frag.is_empty() || label.is_empty() {
        return 0.0;
    }
    let shared = longest_common_substring(&frag, &label);
    let strength = (shared * shared) as f64 / (frag.len() * label.len()) as f64;
    3.0 * strength * net.params.response(n.weight)
}

/// Extra prior activation `rival` needs to outrank `leader` on `fragment`: any priming strictly
/// above this flips the order, provided neither node saturates at `a_max`.
pub fn priming_increment(net: &Network, fragment: &str, leader: NodeId, rival: NodeId) -> f64 {
    let act = |n: NodeId| net.node(n).map_or(0.0, |x| x.activation);
    (act(leader) + match_gain(net, fragment, leader) - act(rival) - match_gain(net, fragment, rival)).max(0.0)
}

/// Present a fragment and rank the chunk nodes that respond.
///
/// Match strength is shared² / (|fragment| · |label|) over the longest shared run, so an exact
/// match scores 1. Each responder's activation rises by that strength scaled by its weight.
pub fn match_fragment(net: &mut Network, fragment: &str, buf: &mut WorkingBuffer) -> Vec<(NodeId, f64)> {
    let frag: Vec<char> = fragment.chars().collect();
    let mut touched = BTreeSet::new();
    for c in &frag {
        if let Some(id) = net.find(&c.to_string()).filter(|id| net.nodes()[id.index()].kind == NodeKind::Sensory) {
            touched.insert(ElementId::Node(id));
        }
    }
    if frag.is_empty() || touched.is_empty() {
        return Vec::new();
    }
    let p = net.params;
    let mut ranked = Vec::new();
    let chunks: Vec<(NodeId, Vec<char>, f64, f64)> = net
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Chunk)
        .filter_map(|n| n.label.as_ref().map(|l| (n.id, l.chars().collect(), n.weight, n.activation)))
        .collect();
    for (id, label, w, a) in chunks {
        let shared = longest_common_substring(&frag, &label);
        if shared == 0 {
            continue;
        }
        let strength = (shared * shared) as f64 / (frag.len() * label.len()) as f64;
        let next = (a + 3.0 * strength * p.response(w)).min(p.a_max);
        if next <= a {
            continue;
        }
        net.set_activation(id.into(), next).expect("node exists");
        touched.insert(ElementId::Node(id));
        ranked.push((id, next));
    }
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    buf.active_elements = touched;
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::Params;

    fn setup(dw: f64) -> (Network, Chunker) {
        let net = Network::new(Params { dw, ..Params::default() }).unwrap();
        let ch = Chunker::new(ChunkerParams::default(), Firing::Deterministic).unwrap();
        (net, ch)
    }

    fn fixated_chunks(net: &Network) -> Vec<String> {
        let mut v: Vec<String> = net
            .nodes()
            .iter()
            .filter(|n| n.kind == NodeKind::Chunk && n.fixated)
            .filter_map(|n| n.label.clone())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn three_repeats_fixate() {
        let (mut net, mut ch) = setup(0.4);
        ch.run(&mut net, "756756756".chars()).unwrap();
        assert_eq!(fixated_chunks(&net), vec!["756"]);
    }

    #[test]
    fn single_pass_fades() {
        let (mut net, mut ch) = setup(0.4);
        ch.run(&mut net, "75648361".chars()).unwrap();
        net.advance_by(200);
        assert!(net.nodes().iter().all(|n| n.weight == 0.0));
        assert!(net.edges().iter().all(|e| e.weight == 0.0));
    }

    #[test]
    fn candidates_of_triple_string() {
        let (mut net, mut ch) = setup(0.4);
        for c in "756483617564836175648361".chars() {
            ch.observe(&mut net, c).unwrap();
        }
        let c = find_candidates(&ch.buf, &net, 2);
        assert_eq!(c[0].text, "75648361");
        assert_eq!(c[0].occurrences, 3);
    }

    #[test]
    fn candidates_prefer_known_chunk() {
        let mut net = Network::new(Params::default()).unwrap();
        let members: Vec<NodeId> = "756".chars().map(|c| net.node_for(&c.to_string(), NodeKind::Sensory)).collect();
        let id = allocate_chunk_node(&mut net, &members).unwrap();
        net.set_weight(id.into(), 1.2).unwrap();
        let mut buf = WorkingBuffer::default();
        for (i, c) in "7564836175698136".chars().enumerate() {
            buf.symbols.push_back((i as u64 + 1, c));
        }
        assert_eq!(find_candidates(&buf, &net, 2)[0].text, "756");
    }

    #[test]
    fn distinct_symbols_give_no_candidates() {
        let net = Network::new(Params::default()).unwrap();
        let mut buf = WorkingBuffer::default();
        for (i, c) in "abcdefghijklmnopqrstuvwx".chars().enumerate() {
            buf.symbols.push_back((i as u64, c));
        }
        assert!(find_candidates(&buf, &net, 2).is_empty());
    }

    #[test]
    fn allocation_rules() {
        let mut net = Network::new(Params::default()).unwrap();
        let a = net.add_node(Some("A"), NodeKind::Sensory).unwrap();
        let b = net.add_node(Some("B"), NodeKind::Sensory).unwrap();
        let c = net.add_node(Some("C"), NodeKind::Sensory).unwrap();
        let ab = allocate_chunk_node(&mut net, &[a, b]).unwrap();
        assert_eq!(net.in_edges(ab).len(), 2);
        assert_eq!(allocate_chunk_node(&mut net, &[a, b]).unwrap(), ab);
        let abc = allocate_chunk_node(&mut net, &[a, b, c]).unwrap();
        assert_ne!(ab, abc);
        assert_eq!(allocate_chunk_node(&mut net, &[]), Err(ChunkError::EmptyMembers));
        assert!(net.reciprocity_holds());
    }

    #[test]
    fn allocation_of_chunk_members() {
        let mut net = Network::new(Params::default()).unwrap();
        let x = net.add_node(Some("756"), NodeKind::Chunk).unwrap();
        let y = net.add_node(Some("48361"), NodeKind::Chunk).unwrap();
        let c = allocate_chunk_node(&mut net, &[x, y]).unwrap();
        assert_eq!(net.label(c), "756+48361");
        assert_eq!(net.in_edges(c).len(), 2);
    }

    fn fixate_labels(net: &mut Network, labels: &[&str]) {
        for l in labels {
            let members: Vec<NodeId> = l.chars().map(|c| net.node_for(&c.to_string(), NodeKind::Sensory)).collect();
            let id = allocate_chunk_node(net, &members).unwrap();
            net.set_weight(id.into(), 1.2).unwrap();
        }
    }

    #[test]
    fn exact_match_ranks_first() {
        let mut net = Network::new(Params::default()).unwrap();
        fixate_labels(&mut net, &["BCD", "BC", "DEF"]);
        let mut buf = WorkingBuffer::default();
        let r = match_fragment(&mut net, "BCD", &mut buf);
        assert_eq!(net.label(r[0].0), "BCD");
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn priming_ranks_first() {
        let mut net = Network::new(Params::default()).unwrap();
        fixate_labels(&mut net, &["XY", "YZ"]);
        let yz = net.find("YZ").unwrap();
        net.set_activation(yz.into(), 0.5).unwrap();
        let mut buf = WorkingBuffer::default();
        let r = match_fragment(&mut net, "Y", &mut buf);
        assert_eq!(r[0].0, yz);
    }

    #[test]
    fn unseen_fragment_matches_nothing() {
        let mut net = Network::new(Params::default()).unwrap();
        fixate_labels(&mut net, &["AB"]);
        let mut buf = WorkingBuffer::default();
        assert!(match_fragment(&mut net, "QQ", &mut buf).is_empty());
    }

    #[test]
    fn params_checked() {
        assert!(ChunkerParams { l_min: 1, ..ChunkerParams::default() }.validate().is_err());
        assert!(ChunkerParams { buffer_len: 3, ..ChunkerParams::default() }.validate().is_err());
    }
}
