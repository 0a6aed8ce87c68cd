//! Synthetic flights, GPS-denial injection, zero-order-hold alignment and
//! flight-log files.

mod align;
mod denial;
mod flight;
pub mod log;
mod plan;

use std::path::Path;

use thiserror::Error;

use crate::nav::NavError;

pub use align::{zoh_align, AlignedMeasurement};
pub use denial::{inject_denial, DenialScenario, Phase, TIME_EPS};
pub use flight::{simulate_flight, FlightLog, SensorConfig, TruthSample};
pub use log::{load_log, save_log};
pub use plan::{Kinematics, Segment, TrajectoryPlan};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
    #[error("invalid sensor configuration: {0}")]
    InvalidConfig(String),
    #[error("denial window: {0}")]
    DenialWindow(String),
    #[error("no fixes to align")]
    EmptyFixes,
    #[error("{what} is not strictly increasing at index {index}")]
    NonMonotonic { what: String, index: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Nav(#[from] NavError),
}

impl SimError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, line: u64, message: String) -> Self {
        Self::Csv {
            path: path.display().to_string(),
            line,
            message,
        }
    }
}
