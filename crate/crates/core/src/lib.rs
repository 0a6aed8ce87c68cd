//! Robust extended Kalman filtering for IMU/GPS navigation under GPS denial.
//!
//! * [`nav`]: quaternion navigation model, noise covariances and Jacobians.
//! * [`filter`]: EKF and robust (tolerance-constrained) EKF steps.
//! * [`sim`]: synthetic flights, denial injection, measurement alignment, logs.
//! * [`learn`]: choosing the tolerance from training data.
//! * [`experiment`]: training plus validation runs, metrics and export.

pub mod experiment;
pub mod filter;
pub mod learn;
pub mod nav;
pub mod sim;
