//! EKF and robust EKF recursions, the `γ` function and the `θ` bisection.

mod gamma;
mod nav_model;
mod rekf;

use thiserror::Error;

use crate::nav::NavError;

pub use gamma::{
    gamma, gamma_from_eigenvalues, solve_theta, solve_theta_from_eigenvalues, spd_eigenvalues,
    FilterConfig,
};
pub use nav_model::{NavModel, DEFAULT_INIT_COV_SCALE};
pub use rekf::{
    ekf_step, rekf_step, symmetrize, GaussianBelief, RobustFilter, StateSpaceModel, StepOutput,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("θ = {theta:e} outside [0, {upper:e})")]
    Domain { theta: f64, upper: f64 },
    #[error("θ bisection did not reach the tolerance: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("tolerance must be finite and ≥ 0, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid filter configuration: {0}")]
    InvalidConfig(String),
    #[error("{what} is not positive definite at step {step}")]
    Covariance { what: String, step: usize },
    #[error("non-finite measurement at step {step}")]
    NonFinite { step: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Nav(#[from] NavError),
}
