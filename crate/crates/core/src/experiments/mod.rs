//! Experiment runner binding all modules: configuration parsing,
//! deterministic execution, and tabular/plot-data emission.

mod config;
mod runner;

pub use config::{
    caps, ExperimentConfig, ExperimentKind, MinimaPathConfig, ValidationIssue, SCHEMA_VERSION,
};
pub use runner::{run_to_dir, RunSummary};
