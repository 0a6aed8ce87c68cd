//! One step of the robust extended Kalman recursion.
//!
//! ```text
//! L      = V Cᵀ (C V Cᵀ + R)⁻¹
//! x̂ₖ|ₖ   = x̂ₖ + L (yₖ − C x̂ₖ)
//! x̂ₖ₊₁   = f(x̂ₖ|ₖ, uₖ)
//! Pₖ₊₁   = A (V⁻¹ + Cᵀ R⁻¹ C)⁻¹ Aᵀ + Q̃ + G Q_ε Gᵀ
//! Vₖ₊₁   = (Pₖ₊₁⁻¹ − θ I)⁻¹,   γ(Pₖ₊₁, θ) = c
//! ```
//!
//! With `c = 0` the last line is skipped and the recursion is the EKF.

use log::warn;
use nalgebra::{DMatrix, DVector};

use super::gamma::{solve_theta_from_eigenvalues, FilterConfig};
use super::FilterError;

/// Discrete model consumed by the recursion.
pub trait StateSpaceModel {
    type Input;

    fn state_dim(&self) -> usize;

    /// Nominal transition `f(x, u, 0)`.
    fn predict(&self, x: &DVector<f64>, u: &Self::Input) -> Result<DVector<f64>, FilterError>;

    /// `(A, G)` evaluated at `x`.
    fn jacobians(
        &self,
        x: &DVector<f64>,
        u: &Self::Input,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>), FilterError>;

    /// Covariance of the noise entering through `G`.
    fn process_noise(&self) -> &DMatrix<f64>;

    /// Additive covariance on the state transition.
    fn discretization_noise(&self) -> &DMatrix<f64>;

    fn measurement_matrix(&self) -> &DMatrix<f64>;

    fn measurement_noise(&self) -> &DMatrix<f64>;

    /// Projects a corrected state back onto the model's valid set.
    fn correct(&self, _x: &mut DVector<f64>) -> Result<(), FilterError> {
        Ok(())
    }
}

/// Predicted mean and predictor covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, FilterError> {
        if cov.nrows() != mean.len() || !cov.is_square() {
            return Err(FilterError::Dimension(format!(
                "covariance {}x{} does not match mean of length {}",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        Ok(Self {
            mean,
            cov: symmetrize(&cov),
        })
    }
}

/// Everything one step produces.
#[derive(Clone, Debug)]
pub struct StepOutput {
    /// Prediction `x̂ₖ₊₁` with covariance `Vₖ₊₁`.
    pub belief: GaussianBelief,
    /// Filtered estimate `x̂ₖ|ₖ`.
    pub filtered: DVector<f64>,
    /// `Pₖ₊₁` before the robust inflation.
    pub nominal_cov: DMatrix<f64>,
    /// `θₖ`; zero for the EKF or after a bisection fallback.
    pub theta: f64,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn spd_inverse(m: &DMatrix<f64>, what: &str, step: usize) -> Result<DMatrix<f64>, FilterError> {
    m.clone()
        .cholesky()
        .map(|c| symmetrize(&c.inverse()))
        .ok_or_else(|| FilterError::Covariance {
            what: what.to_string(),
            step,
        })
}

/// Robust step. `step` only labels diagnostics.
pub fn rekf_step<M: StateSpaceModel>(
    belief: &GaussianBelief,
    u: &M::Input,
    y: &DVector<f64>,
    model: &M,
    cfg: &FilterConfig,
    step: usize,
) -> Result<StepOutput, FilterError> {
    let n = model.state_dim();
    let c = model.measurement_matrix();
    let r = model.measurement_noise();
    let v = &belief.cov;
    if belief.mean.len() != n || y.len() != c.nrows() {
        return Err(FilterError::Dimension(format!(
            "state {} / measurement {} at step {step}",
            belief.mean.len(),
            y.len()
        )));
    }
    if y.iter().any(|e| !e.is_finite()) {
        return Err(FilterError::NonFinite { step });
    }

    // measurement update
    let innovation_cov = c * v * c.transpose() + r;
    let s_inv = spd_inverse(&innovation_cov, "innovation covariance", step)?;
    let gain = v * c.transpose() * s_inv;
    let mut filtered = &belief.mean + &gain * (y - c * &belief.mean);
    model.correct(&mut filtered)?;

    // time update
    let mean_next = model.predict(&filtered, u)?;
    let (a, g) = model.jacobians(&filtered, u)?;
    let v_inv = spd_inverse(v, "predictor covariance", step)?;
    let r_inv = spd_inverse(r, "measurement covariance", step)?;
    let posterior = spd_inverse(
        &(v_inv + c.transpose() * r_inv * c),
        "information matrix",
        step,
    )?;
    let p_next = symmetrize(
        &(&a * posterior * a.transpose()
            + model.discretization_noise()
            + &g * model.process_noise() * g.transpose()),
    );

    let (cov_next, theta) = if cfg.tolerance > 0.0 {
        inflate(&p_next, cfg, step)?
    } else {
        (p_next.clone(), 0.0)
    };

    Ok(StepOutput {
        belief: GaussianBelief {
            mean: mean_next,
            cov: cov_next,
        },
        filtered,
        nominal_cov: p_next,
        theta,
    })
}

/// `(P⁻¹ − θI)⁻¹` through the eigendecomposition of `P`: each eigenvalue `λ`
/// becomes `λ / (1 − θλ)`.
fn inflate(
    p: &DMatrix<f64>,
    cfg: &FilterConfig,
    step: usize,
) -> Result<(DMatrix<f64>, f64), FilterError> {
    let eig = p.clone().symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|l| !(*l > 0.0)) {
        return Err(FilterError::Covariance {
            what: "nominal predictor covariance".into(),
            step,
        });
    }
    let theta = match solve_theta_from_eigenvalues(&values, cfg.tolerance, cfg) {
        Ok(theta) => theta,
        Err(err) => {
            warn!("step {step}: θ bisection failed ({err}); using the nominal covariance");
            return Ok((p.clone(), 0.0));
        }
    };
    let scaled = DVector::from_iterator(
        values.len(),
        values.iter().map(|l| l / (1.0 - theta * l)),
    );
    let u = &eig.eigenvectors;
    let v = u * DMatrix::from_diagonal(&scaled) * u.transpose();
    Ok((symmetrize(&v), theta))
}

/// The EKF: the same recursion with zero tolerance.
pub fn ekf_step<M: StateSpaceModel>(
    belief: &GaussianBelief,
    u: &M::Input,
    y: &DVector<f64>,
    model: &M,
    step: usize,
) -> Result<StepOutput, FilterError> {
    rekf_step(belief, u, y, model, &FilterConfig::default(), step)
}

/// A filter instance: owns its belief and step counter, borrows the model.
#[derive(Clone, Debug)]
pub struct RobustFilter<'m, M> {
    model: &'m M,
    config: FilterConfig,
    belief: GaussianBelief,
    step: usize,
}

impl<'m, M: StateSpaceModel> RobustFilter<'m, M> {
    pub fn new(model: &'m M, config: FilterConfig, belief: GaussianBelief) -> Result<Self, FilterError> {
        config.validate()?;
        Ok(Self {
            model,
            config,
            belief,
            step: 0,
        })
    }

    pub fn belief(&self) -> &GaussianBelief {
        &self.belief
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Output prediction `C x̂ₖ` for the upcoming measurement.
    pub fn predicted_output(&self) -> DVector<f64> {
        self.model.measurement_matrix() * &self.belief.mean
    }

    pub fn step(&mut self, u: &M::Input, y: &DVector<f64>) -> Result<StepOutput, FilterError> {
        let out = rekf_step(&self.belief, u, y, self.model, &self.config, self.step)?;
        self.belief = out.belief.clone();
        self.step += 1;
        Ok(out)
    }

    pub fn into_belief(self) -> GaussianBelief {
        self.belief
    }
}
