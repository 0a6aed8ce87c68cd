use nalgebra::{DVector, SVector, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::quat::{self, Quat};
use super::NavError;

pub const STATE_DIM: usize = 16;
pub const NOISE_DIM: usize = 6;
pub const MEAS_DIM: usize = 6;

/// Offsets of each block inside the flattened state vector.
pub mod idx {
    pub const Q: usize = 0;
    pub const V: usize = 4;
    pub const P: usize = 7;
    pub const BIAS_OMEGA: usize = 10;
    pub const BIAS_A: usize = 13;
}

pub type StateVector = SVector<f64, STATE_DIM>;

/// Navigation state: attitude, NED velocity and position, and the
/// per-step angular and velocity increment biases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub q: Quat,
    pub v: Vector3<f64>,
    pub p: Vector3<f64>,
    /// Gyro bias times the sampling time (rad).
    pub delta_omega_b: Vector3<f64>,
    /// Accelerometer bias times the sampling time (m/s).
    pub delta_a_b: Vector3<f64>,
}

impl Default for NavState {
    fn default() -> Self {
        Self {
            q: quat::identity(),
            v: Vector3::zeros(),
            p: Vector3::zeros(),
            delta_omega_b: Vector3::zeros(),
            delta_a_b: Vector3::zeros(),
        }
    }
}

impl NavState {
    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<4>(idx::Q).copy_from(&self.q);
        x.fixed_rows_mut::<3>(idx::V).copy_from(&self.v);
        x.fixed_rows_mut::<3>(idx::P).copy_from(&self.p);
        x.fixed_rows_mut::<3>(idx::BIAS_OMEGA)
            .copy_from(&self.delta_omega_b);
        x.fixed_rows_mut::<3>(idx::BIAS_A).copy_from(&self.delta_a_b);
        x
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(self.to_vector().as_slice())
    }

    /// Parses a 16-element slice without touching the quaternion norm.
    pub fn from_slice(x: &[f64]) -> Result<Self, NavError> {
        if x.len() != STATE_DIM {
            return Err(NavError::Dimension {
                expected: STATE_DIM,
                got: x.len(),
            });
        }
        let v3 = |o: usize| Vector3::new(x[o], x[o + 1], x[o + 2]);
        Ok(Self {
            q: Vector4::new(x[0], x[1], x[2], x[3]),
            v: v3(idx::V),
            p: v3(idx::P),
            delta_omega_b: v3(idx::BIAS_OMEGA),
            delta_a_b: v3(idx::BIAS_A),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }

    /// Rescales the attitude quaternion to unit norm.
    pub fn normalized(mut self) -> Result<Self, NavError> {
        self.q = quat::normalize(&self.q)?;
        Ok(self)
    }

    /// The measured quantities `[p; v]` in measurement order.
    pub fn output(&self) -> SVector<f64, MEAS_DIM> {
        SVector::<f64, MEAS_DIM>::new(
            self.p[0], self.p[1], self.p[2], self.v[0], self.v[1], self.v[2],
        )
    }
}
