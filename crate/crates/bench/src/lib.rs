//! Benchmark harness: baselines, experiment grids over `k`, slack and seed,
//! and CSV/JSON/SVG reports.

pub mod baselines;
pub mod experiment;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use baselines::{baseline_b1, baseline_b2, baseline_moc, baseline_moc_sweep};
pub use experiment::{run_experiment, Algorithm, ExperimentConfig, KRange, ReportFormat, RunRecord};
pub use report::emit_report;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] zeus_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid experiment: {0}")]
    Config(String),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
    let path = path.into();
    move |source| BenchError::Io { path, source }
}
