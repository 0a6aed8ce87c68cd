use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::filter::DEFAULT_INIT_COV_SCALE;
use crate::learn::{BankExecution, GridSpacing, ToleranceGrid};
use crate::nav::{JacobianMode, NavState, NoiseConfig, STATE_DIM};
use crate::sim::{DenialScenario, Phase, SensorConfig, TrajectoryPlan};

/// Initial prediction used by both filters: level attitude, at rest, at the
/// first GPS fix, with small constant increment biases.
pub const DEFAULT_INIT_STATE: [f64; STATE_DIM] = [
    1.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, //
    0.9926, -0.0126, 0.0230, //
    2.7556e-6, 2.7556e-6, 2.7556e-6, //
    6.7600e-11, 6.7600e-11, 6.7600e-11,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub size: usize,
    pub spacing: GridSpacing,
    /// Explicit candidates; overrides `min`/`max`/`size` when present.
    pub values: Option<Vec<f64>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: 2e-4,
            max: 1.0,
            size: 40,
            spacing: GridSpacing::Linear,
            values: None,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<ToleranceGrid, ExperimentError> {
        let grid = match &self.values {
            Some(values) => ToleranceGrid::new(values.clone()),
            None => ToleranceGrid::spaced(self.min, self.max, self.size, self.spacing),
        };
        grid.map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationKind {
    Straight,
    Turn,
}

impl ValidationKind {
    /// Denial start on the default circuit: mid straight leg or just before a turn.
    pub fn default_start(self) -> f64 {
        match self {
            Self::Straight => 40.0,
            Self::Turn => 36.0,
        }
    }
}

impl std::str::FromStr for ValidationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "straight" => Ok(Self::Straight),
            "turn" => Ok(Self::Turn),
            other => Err(format!("unknown validation type {other:?} (straight|turn)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Training length (s).
    pub length: f64,
    pub denial_start: f64,
    /// Training denial length S̄ (s).
    pub denial_duration: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            length: 30.0,
            denial_start: 15.0,
            denial_duration: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub kind: ValidationKind,
    /// Overrides the kind's default start (s).
    pub denial_start: Option<f64>,
    /// Validation denial length S (s).
    pub denial_duration: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            kind: ValidationKind::Straight,
            denial_start: None,
            denial_duration: 8.0,
        }
    }
}

/// Every knob of one experiment. All units SI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub noise: NoiseConfig,
    pub sensors: SensorConfig,
    pub plan: TrajectoryPlan,
    /// Directory with `imu.csv`, `fix.csv`, `truth.csv`; replaces simulation.
    pub flight_log: Option<PathBuf>,
    pub init_state: [f64; STATE_DIM],
    pub init_cov_scale: f64,
    /// Replace the initial position by the first fix and the attitude by the
    /// true initial attitude.
    pub init_from_flight: bool,
    pub grid: GridConfig,
    pub a_priori_tolerance: f64,
    pub bisection_tol: f64,
    pub bisection_max_iter: usize,
    pub theta_margin: f64,
    pub jacobians: JacobianMode,
    pub bank: BankExecution,
    pub training: TrainingConfig,
    pub validation: ValidationConfig,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let filter = crate::filter::FilterConfig::default();
        Self {
            noise: NoiseConfig::default(),
            sensors: SensorConfig::default(),
            plan: TrajectoryPlan::default(),
            flight_log: None,
            init_state: DEFAULT_INIT_STATE,
            init_cov_scale: DEFAULT_INIT_COV_SCALE,
            init_from_flight: true,
            grid: GridConfig::default(),
            a_priori_tolerance: 0.0,
            bisection_tol: filter.bisection_tol,
            bisection_max_iter: filter.bisection_max_iter,
            theta_margin: filter.theta_margin,
            jacobians: JacobianMode::Analytic,
            bank: BankExecution::Parallel,
            training: TrainingConfig::default(),
            validation: ValidationConfig::default(),
            seeds: vec![0],
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn filter_config(&self, tolerance: f64) -> crate::filter::FilterConfig {
        crate::filter::FilterConfig {
            tolerance,
            bisection_tol: self.bisection_tol,
            bisection_max_iter: self.bisection_max_iter,
            theta_margin: self.theta_margin,
        }
    }

    pub fn training_denial(&self) -> DenialScenario {
        DenialScenario {
            start: self.training.denial_start,
            duration: self.training.denial_duration,
            applies_to: Phase::Training,
        }
    }

    pub fn validation_denial(&self) -> DenialScenario {
        DenialScenario {
            start: self
                .validation
                .denial_start
                .unwrap_or_else(|| self.validation.kind.default_start()),
            duration: self.validation.denial_duration,
            applies_to: Phase::Validation,
        }
    }

    /// Training steps `N`.
    pub fn training_steps(&self) -> usize {
        (self.training.length / self.noise.delta).round() as usize
    }

    pub fn init_state(&self) -> NavState {
        NavState::from_slice(&self.init_state).expect("fixed-size array")
    }

    /// Checks everything that does not need the flight itself.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        self.noise.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.sensors.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if self.flight_log.is_none() {
            self.plan.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        }
        self.grid.build()?;
        self.filter_config(self.a_priori_tolerance)
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        if !(self.init_cov_scale > 0.0) {
            return bad(format!("init_cov_scale must be > 0, got {}", self.init_cov_scale));
        }
        if self.init_state.iter().any(|v| !v.is_finite()) {
            return bad("init_state must be finite".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if !(self.training.length > 0.0) {
            return bad("training length must be > 0".into());
        }
        let train = self.training_denial();
        let val = self.validation_denial();
        train.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        val.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if train.duration > 0.0 && (train.start <= 0.0 || train.end() > self.training.length + 1e-9) {
            return bad(format!(
                "training denial [{}, {}) must lie inside (0, {}]",
                train.start,
                train.end(),
                self.training.length
            ));
        }
        if val.start < self.training.length {
            return bad(format!(
                "validation denial starts at {} s, inside the training phase",
                val.start
            ));
        }
        if self.flight_log.is_none() {
            let duration = self.plan.duration();
            if val.end() > duration + 1e-9 {
                return bad(format!(
                    "validation denial ends at {} s, after the {duration} s flight",
                    val.end()
                ));
            }
        }
        Ok(())
    }
}
