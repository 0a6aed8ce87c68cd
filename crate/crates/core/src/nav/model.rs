//! Discrete strapdown process model and its Jacobians.
//!
//! One step of the model is
//!
//! ```text
//! q⁺ = normalize(q * exp(ω_m Δ − Δω + Δ ε_w))
//! v⁺ = v + R(q) (a_m Δ − Δa + Δ ε_v) + g Δ
//! p⁺ = p + v Δ
//! ```
//!
//! with constant biases. Jacobians are taken in the ambient 16-dimensional
//! coordinates, so they include the derivative of the quaternion
//! normalization.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::noise::{NoiseConfig, NoiseGain, StateMatrix};
use super::quat::{self, normalize_jacobian, quat_exp, quat_exp_jacobian};
use super::sensor::ImuSample;
use super::state::{idx, NavState, StateVector, NOISE_DIM, STATE_DIM};
use super::NavError;

/// How the filters obtain `A_k` and `G_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

/// Step used by the central-difference Jacobians.
pub const FD_STEP: f64 = 1e-6;

fn check_finite(x: &NavState, u: &ImuSample, eps: &Vector6<f64>) -> Result<(), NavError> {
    if !x.is_finite() {
        return Err(NavError::NonFinite("state"));
    }
    if !u.is_finite() {
        return Err(NavError::NonFinite("imu sample"));
    }
    if eps.iter().any(|e| !e.is_finite()) {
        return Err(NavError::NonFinite("process noise"));
    }
    Ok(())
}

fn attitude_increment(x: &NavState, u: &ImuSample, eps_w: &Vector3<f64>, dt: f64) -> Vector3<f64> {
    u.omega_m * dt - x.delta_omega_b + eps_w * dt
}

fn velocity_increment(x: &NavState, u: &ImuSample, eps_v: &Vector3<f64>, dt: f64) -> Vector3<f64> {
    u.a_m * dt - x.delta_a_b + eps_v * dt
}

/// One step of the discrete process model `f(x, u, ε)`.
pub fn propagate(
    x: &NavState,
    u: &ImuSample,
    eps: &Vector6<f64>,
    cfg: &NoiseConfig,
) -> Result<NavState, NavError> {
    check_finite(x, u, eps)?;
    let dt = cfg.delta;
    let eps_w = eps.fixed_rows::<3>(0).into_owned();
    let eps_v = eps.fixed_rows::<3>(3).into_owned();

    let dq = quat_exp(&attitude_increment(x, u, &eps_w, dt));
    let q_next = quat::normalize(&quat::quat_mul(&x.q, &dq))?;

    let rot = quat::quat_to_rotation(&x.q)?;
    let v_next = x.v + rot * velocity_increment(x, u, &eps_v, dt) + cfg.gravity() * dt;
    let p_next = x.p + x.v * dt;

    Ok(NavState {
        q: q_next,
        v: v_next,
        p: p_next,
        delta_omega_b: x.delta_omega_b,
        delta_a_b: x.delta_a_b,
    })
}

/// `propagate` with zero process noise.
pub fn predict(x: &NavState, u: &ImuSample, cfg: &NoiseConfig) -> Result<NavState, NavError> {
    propagate(x, u, &Vector6::zeros(), cfg)
}

/// Pieces shared by both Jacobians.
struct Partials {
    /// d normalize(m) / dm at m = q * exp(θ).
    dnorm_next: Matrix4<f64>,
    /// d(q * exp(θ)) / dθ before normalization.
    dq_dtheta: nalgebra::Matrix4x3<f64>,
    rot: Matrix3<f64>,
    /// exp(θ).
    dq: quat::Quat,
}

fn partials(x: &NavState, u: &ImuSample, cfg: &NoiseConfig) -> Result<Partials, NavError> {
    check_finite(x, u, &Vector6::zeros())?;
    let theta = attitude_increment(x, u, &Vector3::zeros(), cfg.delta);
    let dq = quat_exp(&theta);
    let m = quat::quat_mul(&x.q, &dq);
    if m.norm() < quat::MIN_QUAT_NORM {
        return Err(NavError::DegenerateQuaternion(m.norm()));
    }
    Ok(Partials {
        dnorm_next: normalize_jacobian(&m),
        dq_dtheta: quat::left_matrix(&x.q) * quat_exp_jacobian(&theta),
        rot: quat::quat_to_rotation(&x.q)?,
        dq,
    })
}

/// Analytic `∂f/∂x` at zero noise.
pub fn jacobian_state(x: &NavState, u: &ImuSample, cfg: &NoiseConfig) -> Result<StateMatrix, NavError> {
    let dt = cfg.delta;
    let parts = partials(x, u, cfg)?;
    let mut a = StateMatrix::zeros();

    // attitude rows
    let dqq = parts.dnorm_next * quat::right_matrix(&parts.dq);
    a.fixed_view_mut::<4, 4>(idx::Q, idx::Q).copy_from(&dqq);
    let dq_dbias = -(parts.dnorm_next * parts.dq_dtheta);
    a.fixed_view_mut::<4, 3>(idx::Q, idx::BIAS_OMEGA)
        .copy_from(&dq_dbias);

    // velocity rows
    let unit_q = quat::normalize(&x.q)?;
    let w = velocity_increment(x, u, &Vector3::zeros(), dt);
    let dv_dq = quat::rotate_jacobian_unit(&unit_q, &w) * normalize_jacobian(&x.q);
    a.fixed_view_mut::<3, 4>(idx::V, idx::Q).copy_from(&dv_dq);
    a.fixed_view_mut::<3, 3>(idx::V, idx::V)
        .copy_from(&Matrix3::identity());
    a.fixed_view_mut::<3, 3>(idx::V, idx::BIAS_A)
        .copy_from(&(-parts.rot));

    // position rows
    a.fixed_view_mut::<3, 3>(idx::P, idx::P)
        .copy_from(&Matrix3::identity());
    a.fixed_view_mut::<3, 3>(idx::P, idx::V)
        .copy_from(&(Matrix3::identity() * dt));

    for i in idx::BIAS_OMEGA..STATE_DIM {
        a[(i, i)] = 1.0;
    }
    Ok(a)
}

/// Analytic `∂f/∂ε` at zero noise.
pub fn jacobian_noise(x: &NavState, u: &ImuSample, cfg: &NoiseConfig) -> Result<NoiseGain, NavError> {
    let dt = cfg.delta;
    let parts = partials(x, u, cfg)?;
    let mut g = NoiseGain::zeros();
    g.fixed_view_mut::<4, 3>(idx::Q, 0)
        .copy_from(&(parts.dnorm_next * parts.dq_dtheta * dt));
    g.fixed_view_mut::<3, 3>(idx::V, 3)
        .copy_from(&(parts.rot * dt));
    Ok(g)
}

fn propagate_vector(
    x: &StateVector,
    u: &ImuSample,
    eps: &Vector6<f64>,
    cfg: &NoiseConfig,
) -> Result<StateVector, NavError> {
    Ok(propagate(&NavState::from_slice(x.as_slice())?, u, eps, cfg)?.to_vector())
}

/// Central-difference `∂f/∂x`.
pub fn jacobian_state_fd(
    x: &NavState,
    u: &ImuSample,
    cfg: &NoiseConfig,
) -> Result<StateMatrix, NavError> {
    let x0 = x.to_vector();
    let eps = Vector6::zeros();
    let mut a = StateMatrix::zeros();
    for j in 0..STATE_DIM {
        let mut xp = x0;
        let mut xm = x0;
        xp[j] += FD_STEP;
        xm[j] -= FD_STEP;
        let col = (propagate_vector(&xp, u, &eps, cfg)? - propagate_vector(&xm, u, &eps, cfg)?)
            / (2.0 * FD_STEP);
        a.set_column(j, &col);
    }
    Ok(a)
}

/// Central-difference `∂f/∂ε`.
pub fn jacobian_noise_fd(
    x: &NavState,
    u: &ImuSample,
    cfg: &NoiseConfig,
) -> Result<NoiseGain, NavError> {
    let x0 = x.to_vector();
    let mut g = NoiseGain::zeros();
    for j in 0..NOISE_DIM {
        let mut ep = Vector6::zeros();
        let mut em = Vector6::zeros();
        ep[j] = FD_STEP;
        em[j] = -FD_STEP;
        let col = (propagate_vector(&x0, u, &ep, cfg)? - propagate_vector(&x0, u, &em, cfg)?)
            / (2.0 * FD_STEP);
        g.set_column(j, &col);
    }
    Ok(g)
}

pub fn jacobians(
    x: &NavState,
    u: &ImuSample,
    cfg: &NoiseConfig,
    mode: JacobianMode,
) -> Result<(StateMatrix, NoiseGain), NavError> {
    match mode {
        JacobianMode::Analytic => Ok((jacobian_state(x, u, cfg)?, jacobian_noise(x, u, cfg)?)),
        JacobianMode::FiniteDifference => {
            Ok((jacobian_state_fd(x, u, cfg)?, jacobian_noise_fd(x, u, cfg)?))
        }
    }
}
