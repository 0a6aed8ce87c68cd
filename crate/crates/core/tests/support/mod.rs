#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use robust_nav::filter::{FilterError, StateSpaceModel};

/// Linear time-invariant system `x⁺ = A x + G ε + ε̃`, `y = C x + e`.
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub q_eps: DMatrix<f64>,
    pub q_tilde: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl LinearModel {
    pub fn two_state() -> Self {
        Self {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.1, -0.05, 0.97]),
            g: DMatrix::from_row_slice(2, 1, &[0.005, 0.1]),
            q_eps: DMatrix::from_element(1, 1, 0.4),
            q_tilde: DMatrix::from_diagonal(&DVector::from_vec(vec![1e-4, 2e-4])),
            c: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            r: DMatrix::from_element(1, 1, 0.25),
        }
    }

    pub fn scalar(a: f64, q: f64, r: f64) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, a),
            g: DMatrix::from_element(1, 1, 1.0),
            q_eps: DMatrix::from_element(1, 1, q),
            q_tilde: DMatrix::zeros(1, 1),
            c: DMatrix::from_element(1, 1, 1.0),
            r: DMatrix::from_element(1, 1, r),
        }
    }
}

impl StateSpaceModel for LinearModel {
    type Input = DVector<f64>;

    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn predict(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>, FilterError> {
        Ok(&self.a * x + u)
    }

    fn jacobians(
        &self,
        _x: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>), FilterError> {
        Ok((self.a.clone(), self.g.clone()))
    }

    fn process_noise(&self) -> &DMatrix<f64> {
        &self.q_eps
    }

    fn discretization_noise(&self) -> &DMatrix<f64> {
        &self.q_tilde
    }

    fn measurement_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    fn measurement_noise(&self) -> &DMatrix<f64> {
        &self.r
    }
}

/// Textbook Kalman filter in prediction form: covariance update
/// `P⁺ = (I − K C) P`, then `P⁻ = A P⁺ Aᵀ + G Q Gᵀ + Q̃`.
pub struct ClassicKalman {
    pub x: DVector<f64>,
    pub p: DMatrix<f64>,
}

impl ClassicKalman {
    pub fn step(&mut self, m: &LinearModel, u: &DVector<f64>, y: &DVector<f64>) {
        let s = &m.c * &self.p * m.c.transpose() + &m.r;
        let k = &self.p * m.c.transpose() * s.try_inverse().unwrap();
        let x_post = &self.x + &k * (y - &m.c * &self.x);
        let n = self.x.len();
        let p_post = (DMatrix::identity(n, n) - &k * &m.c) * &self.p;
        self.x = &m.a * x_post + u;
        self.p = &m.a * p_post * m.a.transpose() + &m.g * &m.q_eps * m.g.transpose() + &m.q_tilde;
    }
}

pub fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn rel_diff_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
