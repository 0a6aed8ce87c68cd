//! Aided inertial navigation model: state, quaternion algebra, the discrete
//! process model with its Jacobians, and the noise covariances.

mod model;
mod noise;
pub mod quat;
mod sensor;
mod state;

use thiserror::Error;

pub use model::{
    jacobian_noise, jacobian_noise_fd, jacobian_state, jacobian_state_fd, jacobians, predict,
    propagate, JacobianMode, FD_STEP,
};
pub use noise::{
    build_covariances, measurement_matrix, Covariances, LinearizedModel, MeasCov, MeasMatrix,
    NoiseConfig, NoiseGain, NoiseMatrix, StateMatrix,
};
pub use quat::{quat_exp, quat_mul, quat_to_rotation, skew, Quat};
pub use sensor::{FixSample, ImuSample};
pub use state::{idx, NavState, StateVector, MEAS_DIM, NOISE_DIM, STATE_DIM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("quaternion norm {0} is too small to normalize")]
    DegenerateQuaternion(f64),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("expected a vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid noise configuration: {0}")]
    InvalidConfig(String),
}
