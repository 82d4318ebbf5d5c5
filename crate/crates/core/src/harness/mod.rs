//! Batch experiment runner: scenario catalog, config resolution, seeded
//! (optionally parallel) execution, CSV output and result comparison.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod scenario;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::problem::ConfigError;

pub use compare::{compare_files, compare_samples, read_results, Comparison, ResultRow};
pub use config::{AlgoKind, ExperimentConfig};
pub use experiment::{
    config_dump_path, derive_dynamics_seed, run_batch, run_batch_with, run_experiment, run_one,
    sweep_dump, write_csv, Batch, BatchOutcome, RunRecord,
};
pub use scenario::{resolve_scenario, Scenario, SCENARIOS};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("run with seed {seed} failed after {completed} completed runs: {message}")]
    RunFailed {
        seed: u64,
        completed: usize,
        message: String,
    },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => EXIT_USAGE,
            HarnessError::Io { .. } | HarnessError::RunFailed { .. } => EXIT_RUNTIME,
        }
    }
}
