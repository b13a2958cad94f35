//! Experiment plumbing: corpora, configuration, runs, snapshots and sweeps.

pub mod config;
pub mod corpus;
pub mod golden;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, SCHEMA_VERSION};
pub use run::{run_experiment, RunOutput};
pub use snapshot::{Format, Snapshot};
pub use sweep::{sweep, Grid, SweepRow};
