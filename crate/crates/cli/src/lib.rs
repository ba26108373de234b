//! Experiment orchestration for FCMSC: TOML configs, Monte Carlo trials
//! over the four clustering methods, JSON reports and matrix export.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod report;

pub use config::{
    DataSource, ExperimentConfig, GraphSettings, SolverOverrides, SolverSettings, SweepCell,
    SweepGrid, SyntheticSettings,
};
pub use error::{CliError, Result, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};
pub use experiment::{run_experiment, run_experiment_with, run_sweep, ExperimentRun, KeptState, RunOptions};
pub use export::{export_matrices, MatrixKind, SavedState};
pub use report::{ExperimentReport, MeanStd, MethodReport, Metrics, Summary, TrialOutcome, TrialRecord};
