use nalgebra::{DMatrix, DVector};

use super::rekf::{GaussianBelief, StateSpaceModel};
use super::FilterError;
use crate::nav::{
    build_covariances, jacobians, predict, quat, ImuSample, JacobianMode, LinearizedModel,
    NavState, NoiseConfig, STATE_DIM,
};

/// Default initial predictor covariance scale.
pub const DEFAULT_INIT_COV_SCALE: f64 = 1e-3;

/// The aided-INS model seen through [`StateSpaceModel`].
#[derive(Clone, Debug)]
pub struct NavModel {
    noise: NoiseConfig,
    mode: JacobianMode,
    q_eps: DMatrix<f64>,
    q_tilde: DMatrix<f64>,
    c: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn to_dynamic<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

impl NavModel {
    pub fn new(noise: NoiseConfig, mode: JacobianMode) -> Result<Self, FilterError> {
        noise.validate()?;
        let cov = build_covariances(&noise);
        Ok(Self {
            q_eps: to_dynamic(&cov.q_eps),
            q_tilde: to_dynamic(&cov.q_tilde),
            c: to_dynamic(&cov.c),
            r: to_dynamic(&cov.r),
            noise,
            mode,
        })
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    pub fn jacobian_mode(&self) -> JacobianMode {
        self.mode
    }

    /// Jacobians and covariances at a filtered estimate.
    pub fn linearize(&self, x: &NavState, u: &ImuSample) -> Result<LinearizedModel, FilterError> {
        let (a, g) = jacobians(x, u, &self.noise, self.mode)?;
        let cov = build_covariances(&self.noise);
        Ok(LinearizedModel {
            a,
            g,
            q_eps: cov.q_eps,
            q_tilde: cov.q_tilde,
            c: cov.c,
            r: cov.r,
        })
    }

    /// Belief with mean `x0` and covariance `scale · I₁₆`.
    pub fn initial_belief(&self, x0: &NavState, scale: f64) -> Result<GaussianBelief, FilterError> {
        GaussianBelief::new(
            x0.to_dvector(),
            DMatrix::identity(STATE_DIM, STATE_DIM) * scale,
        )
    }
}

fn nav_state(x: &DVector<f64>) -> Result<NavState, FilterError> {
    Ok(NavState::from_slice(x.as_slice())?)
}

impl StateSpaceModel for NavModel {
    type Input = ImuSample;

    fn state_dim(&self) -> usize {
        STATE_DIM
    }

    fn predict(&self, x: &DVector<f64>, u: &ImuSample) -> Result<DVector<f64>, FilterError> {
        Ok(predict(&nav_state(x)?, u, &self.noise)?.to_dvector())
    }

    fn jacobians(
        &self,
        x: &DVector<f64>,
        u: &ImuSample,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>), FilterError> {
        let (a, g) = jacobians(&nav_state(x)?, u, &self.noise, self.mode)?;
        Ok((to_dynamic(&a), to_dynamic(&g)))
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

    /// The additive correction leaves the unit sphere; pull the quaternion back.
    fn correct(&self, x: &mut DVector<f64>) -> Result<(), FilterError> {
        let q = quat::normalize(&x.fixed_rows::<4>(0).into_owned())?;
        x.fixed_rows_mut::<4>(0).copy_from(&q);
        Ok(())
    }
}

impl GaussianBelief {
    /// Mean interpreted as a navigation state.
    pub fn nav_state(&self) -> Result<NavState, FilterError> {
        nav_state(&self.mean)
    }
}
