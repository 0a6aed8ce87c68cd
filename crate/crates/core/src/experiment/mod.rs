//! End-to-end experiments: training, validation, the post-reacquisition
//! RMSE metric and CSV export.

mod config;
mod export;
mod metrics;
mod runner;

use std::path::Path;

use thiserror::Error;

use crate::filter::FilterError;
use crate::learn::LearnError;
use crate::sim::SimError;

pub use config::{
    ExperimentConfig, GridConfig, TrainingConfig, ValidationConfig, ValidationKind, DEFAULT_INIT_STATE,
};
pub use export::{
    evaluate_dir, export_run, load_denial, load_trajectory, render_rows, write_learn_report, write_report,
    DenialMarker, ReportRow, DENIAL_FILE, LEARN_FILE, REPORT_FILE, REPORT_TEXT_FILE, TRAJ_EKF_FILE,
    TRAJ_REKF_FILE, TRAJ_TRUTH_FILE,
};
pub use metrics::{rmse_bar, RmseBreakdown};
pub use runner::{
    initial_belief, load_or_simulate, prepare_streams, reacquisition_index, run_experiment, run_single, train,
    EvalReport, FilterKind, FilterScore, PreparedStreams, RunResult,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("metric: {0}")]
    Metric(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("{path}: {message}")]
    Output { path: String, message: String },
}

impl ExperimentError {
    pub(crate) fn output(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Output {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Whether the failure comes from the numbers rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Self::Learn(LearnError::InvalidGrid(_)) => false,
            Self::Learn(LearnError::Filter(FilterError::InvalidTolerance(_) | FilterError::InvalidConfig(_))) => false,
            Self::Filter(FilterError::InvalidTolerance(_) | FilterError::InvalidConfig(_)) => false,
            Self::Learn(_) | Self::Filter(_) | Self::Metric(_) => true,
            Self::Config(_) | Self::Sim(_) | Self::Output { .. } => false,
        }
    }
}
