//! Networks of probabilistic transducers with weights and activation levels.
//!
//! The substrate carries the dynamics; chunking, prediction and planning run on top of it.

pub mod chunker;
pub mod error;
pub mod harness;
pub mod learning;
pub mod planner;
pub mod predictor;
pub mod substrate;
pub mod transducer;

pub use error::{
    ChunkError, ConfigError, HarnessError, LearnError, NetError, PlanError, PredictError, TransducerError,
};
pub use substrate::{
    EdgeId, EdgeKind, EdgeState, ElementId, EventLog, Firing, Network, NodeId, NodeKind, NodeState, Params, Signal,
};
