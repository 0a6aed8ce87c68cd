use nalgebra::{SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::state::{idx, MEAS_DIM, NOISE_DIM, STATE_DIM};
use super::NavError;

pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type NoiseGain = SMatrix<f64, STATE_DIM, NOISE_DIM>;
pub type NoiseMatrix = SMatrix<f64, NOISE_DIM, NOISE_DIM>;
pub type MeasMatrix = SMatrix<f64, MEAS_DIM, STATE_DIM>;
pub type MeasCov = SMatrix<f64, MEAS_DIM, MEAS_DIM>;

/// Noise intensities, sampling time and gravity of the discrete model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Gyro noise intensity (rad²/s).
    pub sigma2_omega: f64,
    /// Accelerometer noise intensity (m²/s³).
    pub sigma2_v: f64,
    /// Discretization noise on the quaternion vector part.
    pub sigma2_q: f64,
    /// Discretization noise on the second 3-block (velocity rows).
    pub sigma2_p: f64,
    /// Regularization variance for the remaining states.
    pub kappa: f64,
    /// Measurement variances in `[pN, pE, pD, vN, vE, vD]` order.
    pub r: [f64; MEAS_DIM],
    /// Sampling time (s).
    pub delta: f64,
    /// Gravity in the navigation frame (m/s²).
    pub g_n: [f64; 3],
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            // 0.015 rad/s and 0.35 m/s² per-sample standard deviations at 50 Hz.
            sigma2_omega: 0.015 * 0.015 / 0.02,
            sigma2_v: 0.35 * 0.35 / 0.02,
            sigma2_q: 1e-8,
            sigma2_p: 1e-6,
            kappa: 1e-10,
            r: [1.96, 1.96, 2.56, 0.1225, 0.1225, 0.16],
            delta: 0.02,
            g_n: [0.0, 0.0, 9.81],
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), NavError> {
        let positive = [
            ("sigma2_omega", self.sigma2_omega),
            ("sigma2_v", self.sigma2_v),
            ("sigma2_q", self.sigma2_q),
            ("sigma2_p", self.sigma2_p),
            ("kappa", self.kappa),
            ("delta", self.delta),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(NavError::InvalidConfig(format!("{name} must be > 0, got {value}")));
            }
        }
        if let Some(bad) = self.r.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(NavError::InvalidConfig(format!(
                "measurement variances must be > 0, got {bad}"
            )));
        }
        if self.g_n.iter().any(|g| !g.is_finite()) {
            return Err(NavError::InvalidConfig("gravity must be finite".into()));
        }
        Ok(())
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.g_n)
    }
}

/// Noise covariances and measurement matrix of the discrete model.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariances {
    pub q_eps: NoiseMatrix,
    pub q_tilde: StateMatrix,
    pub c: MeasMatrix,
    pub r: MeasCov,
}

/// Jacobians at the linearization point plus the covariances.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedModel {
    pub a: StateMatrix,
    pub g: NoiseGain,
    pub q_eps: NoiseMatrix,
    pub q_tilde: StateMatrix,
    pub c: MeasMatrix,
    pub r: MeasCov,
}

/// Measurement matrix selecting `[p; v]` from `[q v p Δω Δa]`.
pub fn measurement_matrix() -> MeasMatrix {
    let mut c = MeasMatrix::zeros();
    for i in 0..3 {
        c[(i, idx::P + i)] = 1.0;
        c[(3 + i, idx::V + i)] = 1.0;
    }
    c
}

pub fn build_covariances(cfg: &NoiseConfig) -> Covariances {
    let mut q_eps = NoiseMatrix::zeros();
    for i in 0..3 {
        q_eps[(i, i)] = cfg.delta * cfg.sigma2_omega;
        q_eps[(3 + i, 3 + i)] = cfg.delta * cfg.sigma2_v;
    }

    // Block layout 1 + 3 + 3 + 9.
    let mut diag = SVector::<f64, STATE_DIM>::repeat(cfg.kappa);
    for i in 1..4 {
        diag[i] = cfg.sigma2_q;
    }
    for i in 4..7 {
        diag[i] = cfg.sigma2_p;
    }
    let q_tilde = StateMatrix::from_diagonal(&diag);

    let r = MeasCov::from_diagonal(&SVector::<f64, MEAS_DIM>::from(cfg.r));
    Covariances {
        q_eps,
        q_tilde,
        c: measurement_matrix(),
        r,
    }
}
