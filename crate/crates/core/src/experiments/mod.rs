//! Monte Carlo replications of both services on common demand, percentile
//! statistics, sensitivity sweeps and report files.

mod report;
mod runner;
mod stats;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::simulator::SimError;

pub use report::{emit_report, histogram, table_rows, Histogram, Report, ReportFormat, HISTOGRAM_BINS};
pub use runner::{run_paired, run_replication, run_scenario, ModeOutcome, ReplicationPair, ScenarioRun};
pub use stats::{percentile_sorted, sig4, summarize};
pub use sweep::{sweep, write_sweep_csv, SweepDimension, SweepRow, SweepSpec};

pub use crate::model::DEFAULT_SEED;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("unknown report format {0:?}; expected csv or json")]
    InvalidFormat(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
