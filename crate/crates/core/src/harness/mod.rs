//! Batch experiments: generate graphs, encode, optimize, round, aggregate.
//!
//! Output is JSON Lines with one [`ExperimentRecord`] per (size, graph,
//! method) job, written in job order whatever the worker count. Runs resume
//! from an existing output file by skipping the jobs already recorded there.

mod config;
mod experiment;
mod summary;

pub use config::{ExperimentConfig, Method};
pub use experiment::{
    load_records, run_experiment, run_experiment_with, run_job, verify_record, ExperimentRecord,
    JobKey, RecordStatus,
};
pub use summary::{aggregate, compare_noise_impact, overall_drops, NoiseImpact, Summary, SummaryRow};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record check failed: {0}")]
    Verify(String),
    #[error("group ({num_nodes}, {method}) has {count} usable records, need at least 2")]
    InsufficientData {
        num_nodes: usize,
        method: Method,
        count: usize,
    },
    #[error("no records to aggregate")]
    Empty,
    #[error("summaries cover different groups: {0}")]
    GroupMismatch(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
