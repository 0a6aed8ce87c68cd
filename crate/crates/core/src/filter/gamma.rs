//! The divergence budget function `γ(P, θ)` and the bisection that inverts it.
//!
//! Both work on the eigenvalues of `P`:
//!
//! ```text
//! γ(P, θ) = ½ Σᵢ [ ln(1 − θλᵢ) + 1/(1 − θλᵢ) − 1 ]
//! ```
//!
//! which is finite on `0 ≤ θ < 1/λ_max` and strictly increasing there.

use log::trace;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FilterError;

/// Per-step settings of the robust recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Ambiguity-set radius `c` in nats. Zero gives the plain EKF.
    pub tolerance: f64,
    /// Accepted residual `|γ(P, θ) − c|`.
    pub bisection_tol: f64,
    pub bisection_max_iter: usize,
    /// Relative band kept clear below `1/λ_max(P)`.
    pub theta_margin: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.0,
            bisection_tol: 1e-9,
            bisection_max_iter: 200,
            theta_margin: 1e-12,
        }
    }
}

impl FilterConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(FilterError::InvalidTolerance(self.tolerance));
        }
        if !(self.bisection_tol > 0.0) || self.bisection_max_iter == 0 {
            return Err(FilterError::InvalidConfig(
                "bisection_tol must be > 0 and bisection_max_iter ≥ 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.theta_margin) {
            return Err(FilterError::InvalidConfig("theta_margin must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric positive-definite matrix, ascending.
pub fn spd_eigenvalues(p: &DMatrix<f64>) -> Result<Vec<f64>, FilterError> {
    if !p.is_square() || p.nrows() == 0 {
        return Err(FilterError::NotSpd("matrix is not square".into()));
    }
    let mut eig: Vec<f64> = p.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    match eig.first() {
        Some(min) if *min > 0.0 && eig.iter().all(|v| v.is_finite()) => Ok(eig),
        Some(min) => Err(FilterError::NotSpd(format!("minimum eigenvalue {min:e}"))),
        None => unreachable!(),
    }
}

/// `γ` evaluated from the eigenvalues of `P`.
pub fn gamma_from_eigenvalues(eigenvalues: &[f64], theta: f64) -> Result<f64, FilterError> {
    let lambda_max = eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(theta >= 0.0 && theta * lambda_max < 1.0) {
        return Err(FilterError::Domain {
            theta,
            upper: 1.0 / lambda_max,
        });
    }
    Ok(gamma_unchecked(eigenvalues, theta))
}

fn gamma_unchecked(eigenvalues: &[f64], theta: f64) -> f64 {
    0.5 * eigenvalues
        .iter()
        .map(|lambda| {
            let x = theta * lambda;
            (-x).ln_1p() + x / (1.0 - x)
        })
        .sum::<f64>()
}

pub fn gamma(p: &DMatrix<f64>, theta: f64) -> Result<f64, FilterError> {
    gamma_from_eigenvalues(&spd_eigenvalues(p)?, theta)
}

/// Solves `γ(P, θ) = c` for `θ`.
pub fn solve_theta(p: &DMatrix<f64>, c: f64, cfg: &FilterConfig) -> Result<f64, FilterError> {
    solve_theta_from_eigenvalues(&spd_eigenvalues(p)?, c, cfg)
}

/// Bisection on `[0, (1 − margin)/λ_max]`.
///
/// The bracket is halved until it collapses to adjacent floating-point
/// values or the iteration cap is hit; the endpoint with the smaller residual
/// is returned if it meets `bisection_tol`.
pub fn solve_theta_from_eigenvalues(
    eigenvalues: &[f64],
    c: f64,
    cfg: &FilterConfig,
) -> Result<f64, FilterError> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(FilterError::InvalidTolerance(c));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let lambda_max = eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(lambda_max > 0.0) {
        return Err(FilterError::NotSpd(format!("maximum eigenvalue {lambda_max:e}")));
    }

    let mut lo = 0.0;
    let mut hi = (1.0 - cfg.theta_margin) / lambda_max;
    let mut g_lo = 0.0;
    let mut g_hi = gamma_unchecked(eigenvalues, hi);
    if g_hi < c {
        return Err(FilterError::NoConvergence {
            residual: c - g_hi,
            iterations: 0,
        });
    }

    let mut iterations = 0;
    while iterations < cfg.bisection_max_iter {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = gamma_unchecked(eigenvalues, mid);
        if g_mid < c {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }

    let (theta, residual) = if (c - g_lo).abs() <= (g_hi - c).abs() && lo > 0.0 {
        (lo, (c - g_lo).abs())
    } else {
        (hi, (g_hi - c).abs())
    };
    trace!("solve_theta: c={c:e} θ={theta:e} residual={residual:e} after {iterations} iterations");
    if residual <= cfg.bisection_tol {
        Ok(theta)
    } else {
        Err(FilterError::NoConvergence {
            residual,
            iterations,
        })
    }
}
