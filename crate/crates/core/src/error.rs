use thiserror::Error;

use crate::substrate::{EdgeId, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransducerError {
    #[error("row ({state}, {input}) sums to {sum}, not 1")]
    NonStochastic { state: String, input: String, sum: f64 },
    #[error("symbol `{0}` is not declared")]
    UnknownSymbol(String),
    #[error("no transition row for ({0}, {1})")]
    MissingRow(String, String),
    #[error("output alphabet of the first transducer differs from the input alphabet of the second")]
    AlphabetMismatch,
    #[error("row ({0}, {1}) declared twice")]
    DuplicateRow(String, String),
    #[error("outcome ({0}, {1}) listed twice in one row")]
    DuplicateOutcome(String, String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(EdgeId),
    #[error("node {0:?} is not a sensory node")]
    NotSensory(NodeId),
    #[error("self-edges are not allowed ({0:?})")]
    SelfEdge(NodeId),
    #[error("label `{0}` already in use")]
    DuplicateLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("label `{0}` declared twice")]
    DuplicateLabel(String),
    #[error("edge or binding references undeclared label `{0}`")]
    DanglingEdge(String),
    #[error("innate element `{0}` has weight below the fixation threshold")]
    BelowThreshold(String),
    #[error("node {0:?} is not a reward node")]
    NotARewardNode(NodeId),
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("episode is empty")]
    EmptyEpisode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChunkError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("chunk allocation needs at least one member")]
    EmptyMembers,
    #[error("order variants need two distinct nodes")]
    SameNode,
    #[error("invalid chunker parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("all relevant activations are zero in a snapshot")]
    ZeroDenominator,
    #[error("snapshot lacks node {0:?}")]
    MissingNode(NodeId),
    #[error("cue and outcome must be distinct nodes")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("source has no candidate first hops")]
    NoCandidates,
    #[error("rounds must be at least 1")]
    ZeroRounds,
    #[error("invalid planner parameter: {0}")]
    InvalidParams(String),
}

/// Problems with user-supplied configuration, grid or snapshot input.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema_version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("experiment kind `{kind}` needs a [{section}] section")]
    MissingSection { kind: String, section: &'static str },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.to_string() }
    }
}

/// Errors while running an experiment or writing its outputs.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl HarnessError {
    pub fn runtime(e: impl std::fmt::Display) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}
