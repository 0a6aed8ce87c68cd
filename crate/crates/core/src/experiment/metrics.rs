use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// Per-axis position RMSEs and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmseBreakdown {
    pub total: f64,
    pub n: f64,
    pub e: f64,
    pub d: f64,
}

/// Sum over the three NED axes of the RMSE between `truth` and `pred` on
/// indices `K+1 ..= T`.
pub fn rmse_bar(
    truth: &[Vector3<f64>],
    pred: &[Vector3<f64>],
    k: usize,
    t: usize,
) -> Result<RmseBreakdown, ExperimentError> {
    if truth.len() != pred.len() {
        return Err(ExperimentError::Metric(format!(
            "truth has {} samples, prediction {}",
            truth.len(),
            pred.len()
        )));
    }
    if k >= t || t >= truth.len() {
        return Err(ExperimentError::Metric(format!(
            "window K = {k}, T = {t} invalid for {} samples",
            truth.len()
        )));
    }
    let count = (t - k) as f64;
    let mut sq = [0.0; 3];
    for i in k + 1..=t {
        let err = truth[i] - pred[i];
        for axis in 0..3 {
            sq[axis] += err[axis] * err[axis];
        }
    }
    let [n, e, d] = sq.map(|s| (s / count).sqrt());
    Ok(RmseBreakdown {
        total: n + e + d,
        n,
        e,
        d,
    })
}
