//! Data-driven choice of the ambiguity-set tolerance.
//!
//! A bank of robust filters, one per candidate tolerance, runs over the
//! training stream. Each accumulates the squared output-prediction error
//! `‖yₖ − C x̂_{c,k}‖²` online; the candidate with the smallest mean wins.
//! A separate a-priori filter (tolerance zero unless told otherwise) runs
//! alongside and its final belief seeds the validation phase.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{FilterConfig, FilterError, GaussianBelief, NavModel, RobustFilter, StateSpaceModel};
use crate::nav::{ImuSample, NavState};
use crate::sim::AlignedMeasurement;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid tolerance grid: {0}")]
    InvalidGrid(String),
    #[error("{imu} IMU samples but {meas} aligned measurements")]
    LengthMismatch { imu: usize, meas: usize },
    #[error("training needs at least two samples, got {0}")]
    TooShort(usize),
    #[error("every candidate filter failed; first error: {0}")]
    AllCandidatesFailed(FilterError),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    #[default]
    Linear,
    Logarithmic,
}

/// Strictly increasing, non-negative candidate tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ToleranceGrid {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ToleranceGrid {
    type Error = LearnError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<ToleranceGrid> for Vec<f64> {
    fn from(grid: ToleranceGrid) -> Self {
        grid.values
    }
}

impl Default for ToleranceGrid {
    /// 40 values equispaced on `[2e-4, 1]`.
    fn default() -> Self {
        Self::spaced(2e-4, 1.0, 40, GridSpacing::Linear).expect("default grid is valid")
    }
}

impl ToleranceGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, LearnError> {
        if values.is_empty() {
            return Err(LearnError::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(LearnError::InvalidGrid("tolerances must be finite and ≥ 0".into()));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LearnError::InvalidGrid("tolerances must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn spaced(min: f64, max: f64, size: usize, spacing: GridSpacing) -> Result<Self, LearnError> {
        if size == 0 {
            return Err(LearnError::InvalidGrid("grid size must be ≥ 1".into()));
        }
        if size == 1 {
            return Self::new(vec![min]);
        }
        let step = |i: usize| i as f64 / (size - 1) as f64;
        let values = match spacing {
            GridSpacing::Linear => (0..size).map(|i| min + (max - min) * step(i)).collect(),
            GridSpacing::Logarithmic => {
                if !(min > 0.0) {
                    return Err(LearnError::InvalidGrid("logarithmic grid needs min > 0".into()));
                }
                let (lo, hi) = (min.ln(), max.ln());
                (0..size).map(|i| (lo + (hi - lo) * step(i)).exp()).collect()
            }
        };
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of the tolerance search.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnReport {
    pub c_hat: f64,
    /// Mean squared output-prediction error per candidate, in grid order;
    /// `None` for candidates whose filter failed.
    pub losses: Vec<Option<f64>>,
    pub grid: ToleranceGrid,
    /// Number of loss terms (training steps).
    pub n: usize,
}

impl LearnReport {
    pub fn c_hat_index(&self) -> usize {
        self.grid
            .values()
            .iter()
            .position(|c| *c == self.c_hat)
            .expect("c_hat comes from the grid")
    }
}

/// One recursion step of a phase.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStep {
    /// `x̂ₖ|ₖ`.
    pub filtered: NavState,
    /// `x̂ₖ₊₁`.
    pub predicted: NavState,
    /// `Vₖ₊₁`.
    pub cov: DMatrix<f64>,
    pub theta: f64,
}

/// Beliefs produced by running one filter over a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRun {
    pub initial: GaussianBelief,
    pub steps: Vec<PhaseStep>,
}

impl PhaseRun {
    /// Belief after the last step, usable to start the next phase.
    pub fn final_belief(&self) -> GaussianBelief {
        match self.steps.last() {
            Some(last) => GaussianBelief {
                mean: last.predicted.to_dvector(),
                cov: last.cov.clone(),
            },
            None => self.initial.clone(),
        }
    }

    /// Predicted states `x̂₀, x̂₁, …, x̂ₙ`.
    pub fn predictions(&self) -> Result<Vec<NavState>, FilterError> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.initial.nav_state()?);
        out.extend(self.steps.iter().map(|s| s.predicted));
        Ok(out)
    }
}

fn check_lengths(imu: &[ImuSample], meas: &[AlignedMeasurement]) -> Result<(), LearnError> {
    if imu.len() != meas.len() {
        return Err(LearnError::LengthMismatch {
            imu: imu.len(),
            meas: meas.len(),
        });
    }
    Ok(())
}

/// Runs one filter over every `(uₖ, yₖ)` pair.
pub fn run_phase(
    model: &NavModel,
    imu: &[ImuSample],
    meas: &[AlignedMeasurement],
    cfg: &FilterConfig,
    init: &GaussianBelief,
) -> Result<PhaseRun, LearnError> {
    check_lengths(imu, meas)?;
    let mut filter = RobustFilter::new(model, cfg.clone(), init.clone())?;
    let mut steps = Vec::with_capacity(imu.len());
    for (u, m) in imu.iter().zip(meas) {
        let out = filter.step(u, &m.y_dvector())?;
        steps.push(PhaseStep {
            filtered: NavState::from_slice(out.filtered.as_slice()).map_err(FilterError::from)?,
            predicted: out.belief.nav_state()?,
            cov: out.belief.cov,
            theta: out.theta,
        });
    }
    Ok(PhaseRun {
        initial: init.clone(),
        steps,
    })
}

/// Sum of `‖yₖ − C x̂ₖ‖²` over `k = 1..=N` for one filter, accumulated as the
/// filter runs over steps `0..N`.
fn candidate_loss(
    model: &NavModel,
    imu: &[ImuSample],
    meas: &[AlignedMeasurement],
    cfg: FilterConfig,
    init: &GaussianBelief,
) -> Result<f64, FilterError> {
    let mut filter = RobustFilter::new(model, cfg, init.clone())?;
    let n = meas.len() - 1;
    let mut sum = 0.0;
    for k in 0..n {
        filter.step(&imu[k], &meas[k].y_dvector())?;
        let y_next: DVector<f64> = meas[k + 1].y_dvector();
        sum += (y_next - model.measurement_matrix() * &filter.belief().mean).norm_squared();
    }
    Ok(sum)
}

/// How the candidate bank is executed. Both give identical numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankExecution {
    #[default]
    Parallel,
    Sequential,
}

/// Settings of the candidate bank and the a-priori filter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BankSettings {
    /// Tolerance of the a-priori filter; zero makes it the EKF.
    pub a_priori_tolerance: f64,
    /// Bisection settings shared by every filter; the tolerance is replaced.
    pub template: FilterConfig,
    pub execution: BankExecution,
}

/// Training result: the learned tolerance and the a-priori filter's run.
#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub report: LearnReport,
    pub a_priori: PhaseRun,
}

/// Grid search over `grid` on the stream `(u₀, y₀) … (u_N, y_N)`.
///
/// The a-priori filter processes `(u₀, y₀) … (u_{N−1}, y_{N−1})` and ends
/// with the prediction `x̂_N`.
pub fn learn_tolerance(
    model: &NavModel,
    imu: &[ImuSample],
    meas: &[AlignedMeasurement],
    grid: &ToleranceGrid,
    init: &GaussianBelief,
    settings: &BankSettings,
) -> Result<TrainingOutcome, LearnError> {
    let a_priori_c = settings.a_priori_tolerance;
    check_lengths(imu, meas)?;
    if meas.len() < 2 {
        return Err(LearnError::TooShort(meas.len()));
    }
    let n = meas.len() - 1;
    let config_for = |c: f64| FilterConfig {
        tolerance: c,
        ..settings.template.clone()
    };
    config_for(a_priori_c).validate()?;

    let evaluate = |c: &f64| candidate_loss(model, imu, meas, config_for(*c), init);
    let results: Vec<Result<f64, FilterError>> = match settings.execution {
        BankExecution::Parallel => grid.values().par_iter().map(evaluate).collect(),
        BankExecution::Sequential => grid.values().iter().map(evaluate).collect(),
    };

    let mut first_error = None;
    let losses: Vec<Option<f64>> = results
        .into_iter()
        .zip(grid.values())
        .map(|(r, c)| match r {
            Ok(sum) => Some(sum / n as f64),
            Err(err) => {
                warn!("candidate c = {c} dropped: {err}");
                first_error.get_or_insert(err);
                None
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, loss) in losses.iter().enumerate() {
        if let Some(loss) = *loss {
            if best.is_none_or(|(_, b)| loss < b) {
                best = Some((i, loss));
            }
        }
    }
    let Some((best_index, _)) = best else {
        return Err(LearnError::AllCandidatesFailed(first_error.expect("grid is non-empty")));
    };

    let a_priori = run_phase(model, &imu[..n], &meas[..n], &config_for(a_priori_c), init)?;
    Ok(TrainingOutcome {
        report: LearnReport {
            c_hat: grid.values()[best_index],
            losses,
            grid: grid.clone(),
            n,
        },
        a_priori,
    })
}
