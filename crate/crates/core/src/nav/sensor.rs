use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::state::MEAS_DIM;

/// One IMU sample: body-frame angular rate and specific force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub omega_m: Vector3<f64>,
    pub a_m: Vector3<f64>,
}

impl ImuSample {
    pub fn new(t: f64, omega_m: Vector3<f64>, a_m: Vector3<f64>) -> Self {
        Self { t, omega_m, a_m }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.omega_m.iter().all(|v| v.is_finite())
            && self.a_m.iter().all(|v| v.is_finite())
    }
}

/// One GPS/barometer fix in NED. `held` marks values frozen by a denial window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixSample {
    pub t: f64,
    pub pos: Vector3<f64>,
    pub vel: Vector3<f64>,
    pub held: bool,
}

impl FixSample {
    pub fn measurement(&self) -> SVector<f64, MEAS_DIM> {
        SVector::<f64, MEAS_DIM>::new(
            self.pos[0], self.pos[1], self.pos[2], self.vel[0], self.vel[1], self.vel[2],
        )
    }
}
