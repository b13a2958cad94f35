use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::log::{EventKind, EventLog};
use super::params::Params;
use super::rng::Firing;
use super::signal::Signal;
use crate::error::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Either kind of network element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementId {
    Node(NodeId),
    Edge(EdgeId),
}

impl ElementId {
    /// Dense code used to key the random source.
    pub fn code(self) -> u64 {
        match self {
            ElementId::Node(n) => (n.0 as u64) << 1,
            ElementId::Edge(e) => ((e.0 as u64) << 1) | 1,
        }
    }
}

impl From<NodeId> for ElementId {
    fn from(n: NodeId) -> Self {
        ElementId::Node(n)
    }
}

impl From<EdgeId> for ElementId {
    fn from(e: EdgeId) -> Self {
        ElementId::Edge(e)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Node(n) => write!(f, "n{}", n.0),
            ElementId::Edge(e) => write!(f, "e{}", e.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Sensory,
    Reward,
    Effector,
    Chunk,
    Plain,
}

/// Role of an edge. `Member` edges record chunk membership and do not relay signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Forward,
    Back,
    Member,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub label: Option<String>,
    pub kind: NodeKind,
    pub weight: f64,
    pub activation: f64,
    pub fixated: bool,
    pub above_threshold_increments: u32,
    /// Ordered members for chunk nodes built by allocation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeState {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub weight: f64,
    pub activation: f64,
    pub fixated: bool,
    pub above_threshold_increments: u32,
}

/// Shared weight/activation behaviour of nodes and edges.
pub trait Plastic {
    fn weight(&self) -> f64;
    fn activation(&self) -> f64;
    fn fixated(&self) -> bool;
    fn parts(&mut self) -> (&mut f64, &mut f64, &mut bool, &mut u32);
}

macro_rules! plastic {
    ($t:ty) => {
        impl Plastic for $t {
            fn weight(&self) -> f64 {
                self.weight
            }
            fn activation(&self) -> f64 {
                self.activation
            }
            fn fixated(&self) -> bool {
                self.fixated
            }
            fn parts(&mut self) -> (&mut f64, &mut f64, &mut bool, &mut u32) {
                (&mut self.weight, &mut self.activation, &mut self.fixated, &mut self.above_threshold_increments)
            }
        }
    };
}
plastic!(NodeState);
plastic!(EdgeState);

/// Output strength of a firing element.
pub fn signal_out<E: Plastic + ?Sized>(elem: &E, input: Signal, p: &Params) -> Signal {
    if input.is_zero() {
        return Signal::ZERO;
    }
    let scaled = input.magnitude() as f64
        * (0.5 + 0.5 * elem.weight() / p.w_max)
        * (0.5 + 0.5 * elem.activation() / p.a_max);
    let mag = (scaled.round() as i64).clamp(1, 3);
    Signal::saturating(if input.value() < 0 { -mag } else { mag })
}

/// Attenuated return signal carried by a back edge.
pub fn back_relay(input: Signal, p: &Params) -> Signal {
    let mag = (input.magnitude() as f64 * p.back_factor).floor() as i64;
    Signal::saturating(if input.value() < 0 { -mag } else { mag })
}

/// Apply one weight increment. Non-positive strengths leave the weight alone.
pub fn update_weight<E: Plastic + ?Sized>(elem: &mut E, strength: Signal, boost: bool, p: &Params) -> f64 {
    if strength.value() <= 0 {
        return elem.weight();
    }
    update_weight_scaled(elem, if boost { p.boost } else { 1.0 }, p)
}

/// Weight increment with the below-threshold step multiplied by `scale` (boost or graded response).
/// Above threshold the diminishing schedule applies unscaled.
pub fn update_weight_scaled<E: Plastic + ?Sized>(elem: &mut E, scale: f64, p: &Params) -> f64 {
    let (w, _, fixated, k) = elem.parts();
    if *w < p.theta {
        *w += p.dw * scale;
    } else {
        *w += p.dw * p.beta.powi(*k as i32);
        *k += 1;
    }
    *w = w.min(p.w_max);
    if *w >= p.theta {
        *fixated = true;
    }
    *w
}

/// Activation update for an aggregated input. Returns true if activation rose.
pub fn activate<E: Plastic + ?Sized>(elem: &mut E, v: Signal, p: &Params) -> bool {
    let resp = p.response(elem.weight());
    let (_, a, _, _) = elem.parts();
    let before = *a;
    *a = (*a + v.value() as f64 * resp).clamp(0.0, p.a_max);
    *a > before
}

/// Cue strength (in signal units) needed to lift a node to the deterministic firing cutoff.
pub fn min_cue_strength<E: Plastic + ?Sized>(elem: &E, p: &Params) -> f64 {
    ((p.fire_threshold_det - elem.activation()) / p.response(elem.weight())).max(0.0)
}

/// Directed graph of plastic elements driven by a fixed-phase tick loop.
#[derive(Debug, Clone)]
pub struct Network {
    pub params: Params,
    nodes: Vec<NodeState>,
    edges: Vec<EdgeState>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    pairs: HashMap<(NodeId, NodeId), EdgeId>,
    labels: HashMap<String, NodeId>,
    chunks: HashMap<Vec<NodeId>, NodeId>,
    tick_count: u64,
    observed: HashSet<ElementId>,
    pending: Vec<(EdgeId, Signal)>,
    journal: EventLog,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.tick_count == other.tick_count
    }
}

impl Network {
    pub fn new(params: Params) -> Result<Self, NetError> {
        params.validate()?;
        Ok(Network {
            params,
            nodes: Vec::new(),
            edges: Vec::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            pairs: HashMap::new(),
            labels: HashMap::new(),
            chunks: HashMap::new(),
            tick_count: 0,
            observed: HashSet::new(),
            pending: Vec::new(),
            journal: EventLog::default(),
        })
    }

    /// Rebuild a network from stored elements, checking consistency.
    pub fn from_parts(
        params: Params,
        tick_count: u64,
        nodes: Vec<NodeState>,
        edges: Vec<EdgeState>,
    ) -> Result<Self, NetError> {
        let mut net = Network::new(params)?;
        net.tick_count = tick_count;
        for (i, n) in nodes.into_iter().enumerate() {
            if n.id.index() != i {
                return Err(NetError::UnknownNode(format!("node ids must be dense, found {:?} at {i}", n.id)));
            }
            if let Some(l) = &n.label {
                if net.labels.insert(l.clone(), n.id).is_some() {
                    return Err(NetError::DuplicateLabel(l.clone()));
                }
            }
            if n.kind == NodeKind::Chunk && !n.members.is_empty() {
                net.chunks.insert(n.members.clone(), n.id);
            }
            net.nodes.push(n);
            net.out_adj.push(Vec::new());
            net.in_adj.push(Vec::new());
        }
        for (i, e) in edges.into_iter().enumerate() {
            if e.id.index() != i {
                return Err(NetError::UnknownEdge(e.id));
            }
            for end in [e.src, e.dst] {
                if end.index() >= net.nodes.len() {
                    return Err(NetError::UnknownNode(format!("{:?}", end)));
                }
            }
            if e.src == e.dst {
                return Err(NetError::SelfEdge(e.src));
            }
            net.out_adj[e.src.index()].push(e.id);
            net.in_adj[e.dst.index()].push(e.id);
            net.pairs.insert((e.src, e.dst), e.id);
            net.edges.push(e);
        }
        Ok(net)
    }

    pub fn tick_count(&self) -> u64 {
        self.tick_count
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeState] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeState, NetError> {
        self.nodes.get(id.index()).ok_or_else(|| NetError::UnknownNode(format!("{id:?}")))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut NodeState, NetError> {
        self.nodes.get_mut(id.index()).ok_or_else(|| NetError::UnknownNode(format!("{id:?}")))
    }

    pub fn edge(&self, id: EdgeId) -> Result<&EdgeState, NetError> {
        self.edges.get(id.index()).ok_or(NetError::UnknownEdge(id))
    }

    pub fn edge_mut(&mut self, id: EdgeId) -> Result<&mut EdgeState, NetError> {
        self.edges.get_mut(id.index()).ok_or(NetError::UnknownEdge(id))
    }

    pub fn element(&self, id: ElementId) -> Result<&dyn Plastic, NetError> {
        Ok(match id {
            ElementId::Node(n) => self.node(n)? as &dyn Plastic,
            ElementId::Edge(e) => self.edge(e)? as &dyn Plastic,
        })
    }

    fn element_mut(&mut self, id: ElementId) -> Result<&mut dyn Plastic, NetError> {
        Ok(match id {
            ElementId::Node(n) => self.node_mut(n)? as &mut dyn Plastic,
            ElementId::Edge(e) => self.edge_mut(e)? as &mut dyn Plastic,
        })
    }

    pub fn find(&self, label: &str) -> Option<NodeId> {
        self.labels.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<NodeId, NetError> {
        self.find(label).ok_or_else(|| NetError::UnknownNode(label.to_string()))
    }

    pub fn label(&self, id: NodeId) -> &str {
        self.nodes.get(id.index()).and_then(|n| n.label.as_deref()).unwrap_or("")
    }

    pub fn add_node(&mut self, label: Option<&str>, kind: NodeKind) -> Result<NodeId, NetError> {
        if let Some(l) = label {
            if self.labels.contains_key(l) {
                return Err(NetError::DuplicateLabel(l.to_string()));
            }
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeState {
            id,
            label: label.map(str::to_string),
            kind,
            weight: 0.0,
            activation: 0.0,
            fixated: false,
            above_threshold_increments: 0,
            members: Vec::new(),
        });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        if let Some(l) = label {
            self.labels.insert(l.to_string(), id);
        }
        Ok(id)
    }

    /// Existing node with this label, or a fresh one of `kind`.
    pub fn node_for(&mut self, label: &str, kind: NodeKind) -> NodeId {
        match self.find(label) {
            Some(id) => id,
            None => self.add_node(Some(label), kind).expect("label is free"),
        }
    }

    pub fn chunk_for_members(&self, members: &[NodeId]) -> Option<NodeId> {
        self.chunks.get(members).copied()
    }

    pub(crate) fn register_chunk(&mut self, node: NodeId, members: Vec<NodeId>) {
        self.nodes[node.index()].members = members.clone();
        self.chunks.insert(members, node);
    }

    pub fn edge_between(&self, src: NodeId, dst: NodeId) -> Option<EdgeId> {
        self.pairs.get(&(src, dst)).copied()
    }

    pub fn weight_between(&self, src: NodeId, dst: NodeId) -> f64 {
        self.edge_between(src, dst).map_or(0.0, |e| self.edges[e.index()].weight)
    }

    pub fn out_edges(&self, n: NodeId) -> &[EdgeId] {
        self.out_adj.get(n.index()).map_or(&[], |v| v.as_slice())
    }

    pub fn in_edges(&self, n: NodeId) -> &[EdgeId] {
        self.in_adj.get(n.index()).map_or(&[], |v| v.as_slice())
    }

    /// Create `src -> dst` with `kind` at weight 0, or return the existing edge.
    pub fn connect(&mut self, src: NodeId, dst: NodeId, kind: EdgeKind) -> Result<EdgeId, NetError> {
        self.node(src)?;
        self.node(dst)?;
        if src == dst {
            return Err(NetError::SelfEdge(src));
        }
        if let Some(e) = self.edge_between(src, dst) {
            return Ok(e);
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(EdgeState {
            id,
            src,
            dst,
            kind,
            weight: 0.0,
            activation: 0.0,
            fixated: false,
            above_threshold_increments: 0,
        });
        self.out_adj[src.index()].push(id);
        self.in_adj[dst.index()].push(id);
        self.pairs.insert((src, dst), id);
        Ok(id)
    }

    /// Make sure both directions exist. New forward edges are `Forward`, new return edges `Back`.
    pub fn ensure_reciprocal(&mut self, src: NodeId, dst: NodeId) -> Result<(EdgeId, EdgeId), NetError> {
        let f = self.connect(src, dst, EdgeKind::Forward)?;
        let b = self.connect(dst, src, EdgeKind::Back)?;
        Ok((f, b))
    }

    /// Reciprocal pair with the forward edge promoted to `Forward`.
    pub fn forward_pair(&mut self, src: NodeId, dst: NodeId) -> Result<EdgeId, NetError> {
        let (f, _) = self.ensure_reciprocal(src, dst)?;
        if self.edges[f.index()].kind == EdgeKind::Back {
            self.edges[f.index()].kind = EdgeKind::Forward;
        }
        Ok(f)
    }

    /// Set a weight directly; reaching theta fixates.
    pub fn set_weight(&mut self, id: ElementId, w: f64) -> Result<(), NetError> {
        let p = self.params;
        let el = self.element_mut(id)?;
        let (wr, _, fx, _) = el.parts();
        *wr = w.clamp(0.0, p.w_max);
        if *wr >= p.theta {
            *fx = true;
        }
        Ok(())
    }

    /// Zero a weight and drop fixation. Used when a trace is replaced by its parts.
    pub fn retire_element(&mut self, id: ElementId) -> Result<(), NetError> {
        let el = self.element_mut(id)?;
        let (w, _, fx, k) = el.parts();
        *w = 0.0;
        *fx = false;
        *k = 0;
        Ok(())
    }

    pub fn set_activation(&mut self, id: ElementId, a: f64) -> Result<(), NetError> {
        let a_max = self.params.a_max;
        let el = self.element_mut(id)?;
        *el.parts().1 = a.clamp(0.0, a_max);
        Ok(())
    }

    /// Raise activation as if `v` arrived, without any weight change.
    pub fn excite(&mut self, id: ElementId, v: Signal) -> Result<bool, NetError> {
        let p = self.params;
        Ok(activate(self.element_mut(id)?, v, &p))
    }

    /// One learning event on an element; it counts as observed this tick.
    pub fn learn(&mut self, id: ElementId, boost: bool) -> Result<f64, NetError> {
        let scale = if boost { self.params.boost } else { 1.0 };
        self.learn_scaled(id, scale)
    }

    pub fn learn_scaled(&mut self, id: ElementId, scale: f64) -> Result<f64, NetError> {
        let p = self.params;
        let w = update_weight_scaled(self.element_mut(id)?, scale, &p);
        self.observed.insert(id);
        self.journal.push(self.tick_count, EventKind::Learn, id, w);
        Ok(w)
    }

    pub fn mark_observed(&mut self, id: ElementId) {
        self.observed.insert(id);
    }

    pub fn is_observed(&self, id: ElementId) -> bool {
        self.observed.contains(&id)
    }

    /// Events recorded by learning calls since the last tick.
    pub fn take_journal(&mut self) -> EventLog {
        std::mem::take(&mut self.journal)
    }

    /// Weight decay for unobserved non-fixated elements, activation decay for all.
    pub fn apply_decay(&mut self) {
        let p = self.params;
        let keep = 1.0 - p.decay_a;
        for n in &mut self.nodes {
            if !n.fixated && !self.observed.contains(&ElementId::Node(n.id)) {
                n.weight = (n.weight - p.decay_w).max(0.0);
            }
            n.activation *= keep;
        }
        for e in &mut self.edges {
            if !e.fixated && !self.observed.contains(&ElementId::Edge(e.id)) {
                e.weight = (e.weight - p.decay_w).max(0.0);
            }
            e.activation *= keep;
        }
        self.observed.clear();
    }

    /// Pass one tick with no firing: decay only.
    pub fn advance(&mut self) {
        self.apply_decay();
        self.tick_count += 1;
    }

    pub fn advance_by(&mut self, ticks: u64) {
        for _ in 0..ticks {
            self.advance();
        }
    }

    /// Pull fixated weights back toward theta and restart the diminishing schedule.
    pub fn nightly_reset(&mut self) {
        let p = self.params;
        let pull = |w: &mut f64, fixated: bool, k: &mut u32| {
            if fixated && *w > p.theta {
                *w = (*w - (*w - p.theta) * p.reset_factor).max(p.theta);
            }
            *k = 0;
        };
        for n in &mut self.nodes {
            pull(&mut n.weight, n.fixated, &mut n.above_threshold_increments);
        }
        for e in &mut self.edges {
            pull(&mut e.weight, e.fixated, &mut e.above_threshold_increments);
        }
    }

    /// One global step: deliver, fire, relay, learn, decay.
    pub fn tick(&mut self, external: &BTreeMap<NodeId, Signal>, firing: Firing) -> Result<EventLog, NetError> {
        for id in external.keys() {
            if self.node(*id)?.kind != NodeKind::Sensory {
                return Err(NetError::NotSensory(*id));
            }
        }
        let p = self.params;
        let t = self.tick_count;
        let mut log = self.take_journal();

        // deliver external input and last tick's relays
        let mut input = vec![0i64; self.nodes.len()];
        for (id, s) in external {
            input[id.index()] += s.value() as i64;
            log.push(t, EventKind::Input, (*id).into(), s.value() as f64);
        }
        for (e, s) in std::mem::take(&mut self.pending) {
            input[self.edges[e.index()].dst.index()] += s.value() as i64;
        }
        let mut rose: Vec<(ElementId, Signal)> = Vec::new();
        for (i, v) in input.iter().enumerate() {
            if *v == 0 {
                continue;
            }
            let s = Signal::saturating(*v);
            if activate(&mut self.nodes[i], s, &p) {
                rose.push((ElementId::Node(NodeId(i as u32)), s));
            }
        }

        // fire
        let mut sent: Vec<(EdgeId, Signal)> = Vec::new();
        for (i, &v) in input.iter().enumerate() {
            let a = self.nodes[i].activation;
            if a <= 0.0 {
                continue;
            }
            let id = NodeId(i as u32);
            let fires = match firing {
                Firing::Deterministic => a >= p.fire_threshold_det,
                Firing::Seeded(rng) => rng.uniform(ElementId::Node(id), t) < a,
            };
            if !fires {
                continue;
            }
            let drive = if v < 0 { Signal::saturating(v.min(-1)) } else { Signal::saturating(v.max(1)) };
            let out = signal_out(&self.nodes[i], drive, &p);
            log.push(t, EventKind::Fire, id.into(), out.value() as f64);
            for &e in &self.out_adj[i] {
                if self.edges[e.index()].kind != EdgeKind::Member {
                    sent.push((e, out));
                }
            }
        }

        // relay with one tick of latency
        for (e, s) in sent {
            let edge = &mut self.edges[e.index()];
            if activate(edge, s, &p) {
                rose.push((ElementId::Edge(e), s));
            }
            let r = match edge.kind {
                EdgeKind::Back => back_relay(s, &p),
                _ => signal_out(&*edge, s, &p),
            };
            if !r.is_zero() {
                log.push(t, EventKind::Relay, e.into(), r.value() as f64);
                self.pending.push((e, r));
            }
        }

        // learn where activation rose
        for (id, s) in rose {
            if s.value() <= 0 {
                continue;
            }
            let w = update_weight(self.element_mut(id)?, s, false, &p);
            self.observed.insert(id);
            log.push(t, EventKind::Update, id, w);
        }

        self.apply_decay();
        self.tick_count += 1;
        Ok(log)
    }

    /// Signals queued for delivery on the next tick.
    pub fn pending(&self) -> &[(EdgeId, Signal)] {
        &self.pending
    }

    /// Bounds, fixation floor and adjacency consistency.
    pub fn check_invariants(&self) -> Result<(), String> {
        let p = &self.params;
        let check = |what: String, w: f64, a: f64, fixated: bool| -> Result<(), String> {
            if !(0.0..=p.w_max).contains(&w) {
                return Err(format!("{what}: weight {w} out of bounds"));
            }
            if !(0.0..=p.a_max).contains(&a) {
                return Err(format!("{what}: activation {a} out of bounds"));
            }
            if fixated && w < p.theta {
                return Err(format!("{what}: fixated but weight {w} below theta"));
            }
            Ok(())
        };
        for n in &self.nodes {
            check(format!("node {}", n.id.0), n.weight, n.activation, n.fixated)?;
        }
        for e in &self.edges {
            check(format!("edge {}", e.id.0), e.weight, e.activation, e.fixated)?;
            if !self.out_adj[e.src.index()].contains(&e.id) || !self.in_adj[e.dst.index()].contains(&e.id) {
                return Err(format!("edge {} missing from adjacency", e.id.0));
            }
        }
        Ok(())
    }

    /// Every non-member edge has its reverse.
    pub fn reciprocity_holds(&self) -> bool {
        self.edges
            .iter()
            .filter(|e| e.kind != EdgeKind::Member)
            .all(|e| self.edge_between(e.dst, e.src).is_some())
    }
}
