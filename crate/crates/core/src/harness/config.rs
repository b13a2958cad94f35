//! Experiment configuration file (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chunker::ChunkerParams;
use crate::error::ConfigError;
use crate::learning::InnateSpec;
use crate::planner::{PlannerParams, Policy};
use crate::predictor::PredictorParams;
use crate::substrate::{NodeKind, Params};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Segment,
    Predict,
    Plan,
    Hebbian,
    Custom,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Segment => "segment",
            ExperimentKind::Predict => "predict",
            ExperimentKind::Plan => "plan",
            ExperimentKind::Hebbian => "hebbian",
            ExperimentKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub snapshot: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

/// Trial schedule: an explicit outcome list, or `trials` draws with `probability` of the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    pub cue: String,
    pub outcome: String,
    pub outcomes: Vec<bool>,
    pub probability: Option<f64>,
    pub trials: usize,
}

impl Default for PredictSection {
    fn default() -> Self {
        PredictSection { cue: "bell".into(), outcome: "food".into(), outcomes: Vec::new(), probability: None, trials: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioNode {
    pub label: String,
    #[serde(default = "plain")]
    pub kind: NodeKind,
    #[serde(default)]
    pub weight: f64,
}

fn plain() -> NodeKind {
    NodeKind::Plain
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEdge {
    pub src: String,
    pub dst: String,
    pub weight: f64,
    /// Weight of the reciprocal edge; defaults to `weight`.
    #[serde(default)]
    pub back_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default)]
    pub nodes: Vec<ScenarioNode>,
    #[serde(default)]
    pub edges: Vec<ScenarioEdge>,
    pub source: String,
    pub goal: String,
    #[serde(default)]
    pub context: Vec<String>,
    #[serde(default = "absolute")]
    pub policy: Policy,
}

fn absolute() -> Policy {
    Policy::Absolute
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HebbianSection {
    pub a: String,
    pub b: String,
    pub reps: u32,
    #[serde(default)]
    pub gap: u64,
}

fn one() -> u64 {
    1
}

/// One operation of a custom experiment. Nodes are named by label and created on first use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Tick {
        #[serde(default)]
        inputs: BTreeMap<String, i8>,
        #[serde(default = "one")]
        count: u64,
    },
    Advance {
        ticks: u64,
    },
    Hebbian {
        a: String,
        b: String,
        reps: u32,
        #[serde(default)]
        gap: u64,
    },
    Reinforce {
        stimulus: String,
        reward: String,
        #[serde(default = "one")]
        trials: u64,
    },
    Replay {
        nodes: Vec<String>,
        rounds: u32,
    },
    Segment {
        corpus: String,
    },
    Generalize {
        overlap_min: usize,
    },
    NightlyReset,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CustomSection {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    /// `fig1a`, `fig1b` or a corpus file (relative to the config file).
    #[serde(default)]
    pub corpus: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub chunker: ChunkerParams,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default)]
    pub predictor: PredictorParams,
    #[serde(default)]
    pub innate: InnateSpec,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub predict: Option<PredictSection>,
    #[serde(default)]
    pub plan: Option<PlanSection>,
    #[serde(default)]
    pub hebbian: Option<HebbianSection>,
    #[serde(default)]
    pub custom: Option<CustomSection>,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    /// Minimal config of `kind` with defaults everywhere.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind,
            corpus: None,
            seed: 0,
            deterministic: true,
            params: Params::default(),
            chunker: ChunkerParams::default(),
            planner: PlannerParams::default(),
            predictor: PredictorParams::default(),
            innate: InnateSpec::default(),
            output: OutputPaths::default(),
            predict: None,
            plan: None,
            hebbian: None,
            custom: None,
        }
    }

    /// Segmentation run on a named corpus.
    pub fn segment(corpus: &str) -> Self {
        ExperimentConfig { corpus: Some(corpus.into()), ..ExperimentConfig::new(ExperimentKind::Segment) }
    }

    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.into(), message: e.to_string() })
    }

    /// Read, parse and validate. Relative corpus paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |s: &mut String| {
            if !is_builtin(s) && Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).display().to_string();
            }
        };
        if let Some(c) = &mut self.corpus {
            fix(c);
        }
        if let Some(custom) = &mut self.custom {
            for step in &mut custom.steps {
                if let Step::Segment { corpus } = step {
                    fix(corpus);
                }
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Version { found: self.schema_version, expected: SCHEMA_VERSION });
        }
        self.params.validate().map_err(|e| ConfigError::invalid("params", e))?;
        self.chunker.validate().map_err(|e| ConfigError::invalid("chunker", e))?;
        self.planner.validate(self.params.a_max).map_err(|e| ConfigError::invalid("planner", e))?;
        self.predictor.validate().map_err(|e| ConfigError::invalid("predictor", e))?;
        let missing = |section| ConfigError::MissingSection { kind: self.kind.as_str().into(), section };
        match self.kind {
            ExperimentKind::Segment => {
                let c = self.corpus.as_deref().ok_or_else(|| ConfigError::invalid("corpus", "required for segment"))?;
                check_corpus("corpus", c)?;
            }
            ExperimentKind::Predict => {
                let p = self.predict.as_ref().ok_or_else(|| missing("predict"))?;
                if p.cue == p.outcome {
                    return Err(ConfigError::invalid("predict.outcome", "must differ from cue"));
                }
                match p.probability {
                    Some(q) if !(0.0..=1.0).contains(&q) => {
                        return Err(ConfigError::invalid("predict.probability", "must lie in [0, 1]"))
                    }
                    Some(_) if p.trials == 0 => {
                        return Err(ConfigError::invalid("predict.trials", "must be positive with a probability"))
                    }
                    None if p.outcomes.is_empty() => {
                        return Err(ConfigError::invalid("predict.outcomes", "give outcomes or a probability"))
                    }
                    _ => {}
                }
            }
            ExperimentKind::Plan => {
                let p = self.plan.as_ref().ok_or_else(|| missing("plan"))?;
                let known = |l: &str| p.nodes.iter().any(|n| n.label == l) || self.innate.nodes.iter().any(|n| n.label == l);
                for (i, e) in p.edges.iter().enumerate() {
                    for l in [&e.src, &e.dst] {
                        if !known(l) {
                            return Err(ConfigError::invalid(format!("plan.edges[{i}]"), format!("unknown node `{l}`")));
                        }
                    }
                }
                for (field, l) in [("plan.source", &p.source), ("plan.goal", &p.goal)] {
                    if !known(l) {
                        return Err(ConfigError::invalid(field, format!("unknown node `{l}`")));
                    }
                }
            }
            ExperimentKind::Hebbian => {
                let h = self.hebbian.as_ref().ok_or_else(|| missing("hebbian"))?;
                if h.reps == 0 {
                    return Err(ConfigError::invalid("hebbian.reps", "must be at least 1"));
                }
                if h.a == h.b {
                    return Err(ConfigError::invalid("hebbian.b", "must differ from a"));
                }
            }
            ExperimentKind::Custom => {
                let c = self.custom.as_ref().ok_or_else(|| missing("custom"))?;
                for (i, s) in c.steps.iter().enumerate() {
                    if let Step::Segment { corpus } = s {
                        check_corpus(&format!("custom.steps[{i}].corpus"), corpus)?;
                    }
                    if let Step::Tick { inputs, .. } = s {
                        if inputs.values().any(|v| !(-3..=3).contains(v)) {
                            return Err(ConfigError::invalid(format!("custom.steps[{i}].inputs"), "signals lie in -3..=3"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn is_builtin(s: &str) -> bool {
    matches!(s, "fig1a" | "fig1b")
}

fn check_corpus(field: &str, c: &str) -> Result<(), ConfigError> {
    if !is_builtin(c) && !Path::new(c).is_file() {
        return Err(ConfigError::invalid(field, format!("corpus file `{c}` not found")));
    }
    Ok(())
}
