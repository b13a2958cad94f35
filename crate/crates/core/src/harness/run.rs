//! Running one configured experiment.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chunker::Chunker;
use crate::error::{ConfigError, HarnessError};
use crate::learning::{self, Episode};
use crate::planner::{self, PathQuery};
use crate::predictor;
use crate::substrate::{ElementId, EventKind, EventLog, Firing, Network, NodeId, NodeKind, Signal};

use super::config::{ExperimentConfig, ExperimentKind, PlanSection, Step};
use super::corpus::load_corpus;
use super::snapshot::{write_file, Snapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshot: Snapshot,
    pub log: EventLog,
    /// Human-readable result lines.
    pub summary: Vec<String>,
    pub network: Network,
}

impl RunOutput {
    /// Write the snapshot and log to the configured (or given) paths.
    pub fn write(&self, snapshot: Option<&std::path::Path>, log: Option<&std::path::Path>) -> Result<(), HarnessError> {
        if let Some(p) = snapshot {
            write_file(p, &self.snapshot.to_json())?;
        }
        if let Some(p) = log {
            write_file(p, &self.log.to_text())?;
        }
        Ok(())
    }
}

struct Ctx {
    net: Network,
    log: EventLog,
    summary: Vec<String>,
    firing: Firing,
}

impl Ctx {
    fn flush_journal(&mut self) {
        let j = self.net.take_journal();
        self.log.extend(j);
    }

    fn node(&mut self, label: &str, kind: NodeKind) -> NodeId {
        self.net.node_for(label, kind)
    }
}

/// Build the network, run the configured workload, and collect snapshot and log.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let net = Network::new(cfg.params).map_err(|e| ConfigError::invalid("params", e))?;
    let firing = if cfg.deterministic { Firing::Deterministic } else { Firing::seeded(cfg.seed) };
    let mut ctx = Ctx { net, log: EventLog::default(), summary: Vec::new(), firing };
    learning::inject_innate(&mut ctx.net, &cfg.innate).map_err(|e| ConfigError::invalid("innate", e))?;

    match cfg.kind {
        ExperimentKind::Segment => segment(&mut ctx, cfg, cfg.corpus.as_deref().expect("validated"))?,
        ExperimentKind::Predict => predict(&mut ctx, cfg)?,
        ExperimentKind::Plan => plan(&mut ctx, cfg, cfg.plan.as_ref().expect("validated"))?,
        ExperimentKind::Hebbian => {
            let h = cfg.hebbian.as_ref().expect("validated");
            let (a, b) = (ctx.node(&h.a, NodeKind::Plain), ctx.node(&h.b, NodeKind::Plain));
            learning::hebbian_episode(&mut ctx.net, a, b, h.reps, h.gap).map_err(HarnessError::runtime)?;
            let w = ctx.net.weight_between(a, b);
            ctx.summary.push(format!("{} -> {} weight {w}", h.a, h.b));
        }
        ExperimentKind::Custom => {
            for (i, step) in cfg.custom.as_ref().expect("validated").steps.iter().enumerate() {
                custom_step(&mut ctx, cfg, step).map_err(|e| HarnessError::Runtime(format!("step {i}: {e}")))?;
            }
        }
    }
    ctx.flush_journal();
    let fixated = super::golden::fixated_chunk_labels(&ctx.net);
    if !fixated.is_empty() {
        ctx.summary.push(format!("fixated chunks: {}", fixated.into_iter().collect::<Vec<_>>().join(" ")));
    }
    Ok(RunOutput {
        snapshot: Snapshot::capture(&ctx.net, cfg.seed),
        log: ctx.log,
        summary: ctx.summary,
        network: ctx.net,
    })
}

fn segment(ctx: &mut Ctx, cfg: &ExperimentConfig, corpus: &str) -> Result<(), HarnessError> {
    let streams =
        load_corpus(corpus).map_err(|source| ConfigError::Io { path: corpus.to_string(), source })?;
    for stream in streams {
        let mut ch = Chunker::new(cfg.chunker, ctx.firing).map_err(|e| ConfigError::invalid("chunker", e))?;
        ctx.flush_journal();
        ch.run(&mut ctx.net, stream).map_err(HarnessError::runtime)?;
        ctx.log.extend(ch.take_log());
        ctx.flush_journal();
    }
    Ok(())
}

fn predict(ctx: &mut Ctx, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let p = cfg.predict.as_ref().expect("validated");
    let cue = ctx.node(&p.cue, NodeKind::Sensory);
    let food = ctx.node(&p.outcome, NodeKind::Reward);
    let motif = predictor::build_motif(&mut ctx.net, cue, food).map_err(HarnessError::runtime)?;
    let schedule: Vec<bool> = match p.probability {
        Some(q) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..p.trials).map(|_| rng.gen_bool(q)).collect()
        }
        None => p.outcomes.clone(),
    };
    for (i, present) in schedule.into_iter().enumerate() {
        let r = predictor::trial(&mut ctx.net, &motif, present, &cfg.predictor).map_err(HarnessError::runtime)?;
        ctx.flush_journal();
        ctx.log.push(ctx.net.tick_count(), EventKind::Note, ElementId::Node(food), r.error);
        ctx.summary.push(format!("trial {} outcome {} error {}", i + 1, present, r.error));
    }
    Ok(())
}

fn build_scenario(ctx: &mut Ctx, s: &PlanSection) -> Result<(), HarnessError> {
    for n in &s.nodes {
        let id = ctx.node(&n.label, n.kind);
        ctx.net.set_weight(id.into(), n.weight).map_err(HarnessError::runtime)?;
    }
    for e in &s.edges {
        let (a, b) = (ctx.net.find(&e.src), ctx.net.find(&e.dst));
        let (Some(a), Some(b)) = (a, b) else {
            return Err(ConfigError::invalid("plan.edges", format!("unknown node in {} -> {}", e.src, e.dst)).into());
        };
        let f = ctx.net.forward_pair(a, b).map_err(HarnessError::runtime)?;
        let r = ctx.net.edge_between(b, a).expect("reciprocal");
        ctx.net.set_weight(f.into(), e.weight).map_err(HarnessError::runtime)?;
        ctx.net.set_weight(r.into(), e.back_weight.unwrap_or(e.weight)).map_err(HarnessError::runtime)?;
    }
    Ok(())
}

fn plan(ctx: &mut Ctx, cfg: &ExperimentConfig, s: &PlanSection) -> Result<(), HarnessError> {
    build_scenario(ctx, s)?;
    let lookup = |net: &Network, l: &str| net.require(l).map_err(|e| ConfigError::invalid("plan", e));
    let mut q = PathQuery::new(lookup(&ctx.net, &s.source)?, lookup(&ctx.net, &s.goal)?);
    for c in &s.context {
        q.context.insert(lookup(&ctx.net, c)?);
    }
    let first = planner::decide(&ctx.net, &q, s.policy, &cfg.planner, ctx.firing);
    match first {
        Ok(Some(d)) => ctx.summary.push(format!("decision {} after {} rounds", ctx.net.label(d.chosen), d.rounds_used)),
        Ok(None) => ctx.summary.push("decision withheld".into()),
        Err(e) => ctx.summary.push(format!("decision impossible: {e}")),
    }
    let result = planner::plan(&ctx.net, &q, s.policy, &cfg.planner, ctx.firing).map_err(HarnessError::runtime)?;
    let t = ctx.net.tick_count();
    for step in &result.steps {
        ctx.log.push(t, EventKind::Note, ElementId::Node(step.hop), step.rounds_used as f64);
        if let Some(x) = step.effector {
            ctx.log.push(t, EventKind::Fire, ElementId::Node(x), step.rounds_used as f64);
        }
    }
    let labels: Vec<&str> = result.actions().iter().map(|&x| ctx.net.label(x)).collect();
    ctx.summary.push(format!("plan: [{}]", labels.join(", ")));
    Ok(())
}

fn custom_step(ctx: &mut Ctx, cfg: &ExperimentConfig, step: &Step) -> Result<(), String> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    match step {
        Step::Tick { inputs, count } => {
            let mut ext = BTreeMap::new();
            for (l, v) in inputs {
                let id = ctx.node(l, NodeKind::Sensory);
                ext.insert(id, Signal::new(*v).ok_or("signal out of range")?);
            }
            for _ in 0..*count {
                let out = ctx.net.tick(&ext, ctx.firing).map_err(|e| s(&e))?;
                ctx.log.extend(out);
            }
        }
        Step::Advance { ticks } => {
            ctx.flush_journal();
            ctx.net.advance_by(*ticks);
        }
        Step::Hebbian { a, b, reps, gap } => {
            let (a, b) = (ctx.node(a, NodeKind::Plain), ctx.node(b, NodeKind::Plain));
            learning::hebbian_episode(&mut ctx.net, a, b, *reps, *gap).map_err(|e| s(&e))?;
        }
        Step::Reinforce { stimulus, reward, trials } => {
            let st = ctx.node(stimulus, NodeKind::Sensory);
            let r = ctx.node(reward, NodeKind::Reward);
            for _ in 0..*trials {
                learning::reinforce(&mut ctx.net, st, r).map_err(|e| s(&e))?;
            }
        }
        Step::Replay { nodes, rounds } => {
            let ids = nodes.iter().map(|l| ctx.node(l, NodeKind::Plain)).collect();
            let ep = Episode::capture(&ctx.net, ids).map_err(|e| s(&e))?;
            learning::replay(&mut ctx.net, &ep, *rounds).map_err(|e| s(&e))?;
        }
        Step::Segment { corpus } => segment(ctx, cfg, corpus).map_err(|e| s(&e))?,
        Step::Generalize { overlap_min } => {
            let added = planner::generalize(&mut ctx.net, *overlap_min).map_err(|e| s(&e))?;
            ctx.summary.push(format!("generalize added {} edges", added.len()));
        }
        Step::NightlyReset => ctx.net.nightly_reset(),
    }
    ctx.flush_journal();
    Ok(())
}

/// Sorted label set of fixated chunks, hashed (SHA-256, hex).
pub fn label_set_hash(labels: &BTreeSet<String>) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for l in labels {
        h.update(l.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}
