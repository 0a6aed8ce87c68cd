use std::path::Path;
use std::time::{Duration, Instant};

use log::info;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::export::{export_run, write_report};
use super::metrics::{rmse_bar, RmseBreakdown};
use super::ExperimentError;
use crate::filter::{GaussianBelief, NavModel};
use crate::learn::{learn_tolerance, run_phase, BankSettings, LearnReport, TrainingOutcome};
use crate::nav::NavState;
use crate::sim::{inject_denial, load_log, simulate_flight, zoh_align, AlignedMeasurement, DenialScenario, FlightLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Ekf,
    Rekf,
}

impl FilterKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Ekf => "EKF",
            Self::Rekf => "REKF",
        }
    }
}

/// Validation score of one filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterScore {
    pub kind: FilterKind,
    pub tolerance: f64,
    pub rmse: RmseBreakdown,
}

/// Everything one seeded run produces.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub learn: LearnReport,
    pub ekf: FilterScore,
    pub rekf: FilterScore,
    /// First post-reacquisition index.
    pub k: usize,
    /// Final index.
    pub t: usize,
    /// Positions at indices `0..=T`; training indices hold the a-priori
    /// filter's predictions in both filter tracks.
    pub truth_positions: Vec<Vector3<f64>>,
    pub ekf_positions: Vec<Vector3<f64>>,
    pub rekf_positions: Vec<Vector3<f64>>,
    pub training_denial: DenialScenario,
    pub validation_denial: DenialScenario,
    pub delta: f64,
    pub runtime: Duration,
}

impl RunResult {
    pub fn scores(&self) -> [&FilterScore; 2] {
        [&self.ekf, &self.rekf]
    }
}

/// Runs of every configured seed.
#[derive(Clone, Debug, Default)]
pub struct EvalReport {
    pub runs: Vec<RunResult>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

impl EvalReport {
    pub fn median_rmse(&self, kind: FilterKind) -> Option<f64> {
        median(
            self.runs
                .iter()
                .map(|r| match kind {
                    FilterKind::Ekf => r.ekf.rmse.total,
                    FilterKind::Rekf => r.rekf.rmse.total,
                })
                .collect(),
        )
    }

    pub fn median_c_hat(&self) -> Option<f64> {
        median(self.runs.iter().map(|r| r.learn.c_hat).collect())
    }

    /// Plain-text summary table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("seed      c_hat   K     T     EKF RMSE   REKF RMSE  ratio   runtime\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{:<8}  {:<6.4}  {:<4}  {:<4}  {:<9.4}  {:<9.4}  {:<6.3}  {:.2} s\n",
                r.seed,
                r.learn.c_hat,
                r.k,
                r.t,
                r.ekf.rmse.total,
                r.rekf.rmse.total,
                r.rekf.rmse.total / r.ekf.rmse.total,
                r.runtime.as_secs_f64()
            ));
        }
        if let (Some(e), Some(re), Some(c)) = (
            self.median_rmse(FilterKind::Ekf),
            self.median_rmse(FilterKind::Rekf),
            self.median_c_hat(),
        ) {
            out.push_str(&format!(
                "median over {} run(s): c_hat {c:.4}, EKF {e:.4}, REKF {re:.4}, REKF/EKF {:.3}\n",
                self.runs.len(),
                re / e
            ));
        }
        out
    }
}

/// Reads the configured flight log or simulates the plan with `seed`.
pub fn load_or_simulate(cfg: &ExperimentConfig, seed: u64) -> Result<FlightLog, ExperimentError> {
    match &cfg.flight_log {
        Some(dir) => Ok(load_log(dir)?),
        None => {
            let mut plan = cfg.plan.clone();
            plan.seed = seed;
            Ok(simulate_flight(&plan, &cfg.noise, &cfg.sensors)?)
        }
    }
}

/// Measurement stream with both denial windows applied, aligned on the IMU
/// grid.
#[derive(Clone, Debug)]
pub struct PreparedStreams {
    pub flight: FlightLog,
    pub measurements: Vec<AlignedMeasurement>,
    pub training_steps: usize,
}

pub fn prepare_streams(cfg: &ExperimentConfig, flight: FlightLog) -> Result<PreparedStreams, ExperimentError> {
    let denied = inject_denial(&flight.fixes, &cfg.training_denial())?;
    let denied = inject_denial(&denied, &cfg.validation_denial())?;
    let measurements = zoh_align(&denied, &flight.imu_times())?;
    let n = cfg.training_steps();
    if flight.imu.len() < n + 2 {
        return Err(ExperimentError::Config(format!(
            "flight has {} IMU samples, training alone needs {}",
            flight.imu.len(),
            n + 1
        )));
    }
    if flight.truth.len() != flight.imu.len() {
        return Err(ExperimentError::Config(format!(
            "{} truth samples for {} IMU samples",
            flight.truth.len(),
            flight.imu.len()
        )));
    }
    Ok(PreparedStreams {
        flight,
        measurements,
        training_steps: n,
    })
}

/// The configured `x̂₀`, optionally moved onto the first fix and the true
/// initial attitude.
pub fn initial_belief(
    cfg: &ExperimentConfig,
    model: &NavModel,
    flight: &FlightLog,
) -> Result<GaussianBelief, ExperimentError> {
    let mut x0: NavState = cfg.init_state();
    if cfg.init_from_flight {
        if let Some(fix) = flight.fixes.first() {
            x0.p = fix.pos;
        }
        if let Some(truth) = flight.truth.first() {
            x0.q = truth.q;
        }
    }
    Ok(model.initial_belief(&x0, cfg.init_cov_scale)?)
}

/// First index at or after the validation denial start whose measurement is
/// live again, checked against the scenario's end.
pub fn reacquisition_index(
    meas: &[AlignedMeasurement],
    denial: &DenialScenario,
) -> Result<usize, ExperimentError> {
    let start = meas
        .iter()
        .position(|m| m.t >= denial.start - crate::sim::TIME_EPS)
        .ok_or_else(|| ExperimentError::Metric(format!("no sample after {} s", denial.start)))?;
    // a window off the fix grid still sees one live fix before the first held one
    let first_held = (start..meas.len()).find(|&i| meas[i].held).unwrap_or(start);
    let k = (first_held..meas.len())
        .find(|&i| !meas[i].held)
        .ok_or_else(|| ExperimentError::Metric("GPS never reacquired after validation denial".into()))?;
    let expected = meas
        .iter()
        .position(|m| m.t >= denial.end() - crate::sim::TIME_EPS)
        .ok_or_else(|| ExperimentError::Metric(format!("no sample after {} s", denial.end())))?;
    // equal when the window ends on a fix; otherwise the last held fix covers the gap
    if denial.duration > 0.0 && (k < expected || (expected..k).any(|i| !meas[i].held)) {
        return Err(ExperimentError::Metric(format!(
            "reacquisition at index {k}, but the denial ends at index {expected}"
        )));
    }
    Ok(k)
}

/// Training phase only.
pub fn train(
    cfg: &ExperimentConfig,
    model: &NavModel,
    streams: &PreparedStreams,
    init: &GaussianBelief,
) -> Result<TrainingOutcome, ExperimentError> {
    let n = streams.training_steps;
    let settings = BankSettings {
        a_priori_tolerance: cfg.a_priori_tolerance,
        template: cfg.filter_config(0.0),
        execution: cfg.bank,
    };
    Ok(learn_tolerance(
        model,
        &streams.flight.imu[..=n],
        &streams.measurements[..=n],
        &cfg.grid.build()?,
        init,
        &settings,
    )?)
}

fn positions(states: &[NavState]) -> Vec<Vector3<f64>> {
    states.iter().map(|s| s.p).collect()
}

/// One full training + validation run.
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult, ExperimentError> {
    let started = Instant::now();
    cfg.validate()?;
    let model = NavModel::new(cfg.noise.clone(), cfg.jacobians)?;
    let streams = prepare_streams(cfg, load_or_simulate(cfg, seed)?)?;
    let init = initial_belief(cfg, &model, &streams.flight)?;
    let outcome = train(cfg, &model, &streams, &init)?;
    let c_hat = outcome.report.c_hat;
    info!("seed {seed}: learned c = {c_hat}");

    let n = streams.training_steps;
    let t = streams.flight.imu.len() - 1;
    let handoff = outcome.a_priori.final_belief();
    let imu = &streams.flight.imu[n..t];
    let meas = &streams.measurements[n..t];
    let ekf = run_phase(&model, imu, meas, &cfg.filter_config(0.0), &handoff)?;
    let rekf = run_phase(&model, imu, meas, &cfg.filter_config(c_hat), &handoff)?;

    // x̂₀ … x̂_N from training, x̂_{N+1} … x̂_T from validation
    let training = outcome.a_priori.predictions()?;
    let track = |validation: &[NavState]| -> Vec<Vector3<f64>> {
        let mut p = positions(&training);
        p.extend(validation[1..].iter().map(|s| s.p));
        p
    };
    let ekf_positions = track(&ekf.predictions()?);
    let rekf_positions = track(&rekf.predictions()?);
    let truth_positions: Vec<_> = streams.flight.truth.iter().map(|s| s.p).collect();

    let validation_denial = cfg.validation_denial();
    let k = reacquisition_index(&streams.measurements, &validation_denial)?;
    let score = |kind, tolerance, pred: &[Vector3<f64>]| -> Result<FilterScore, ExperimentError> {
        Ok(FilterScore {
            kind,
            tolerance,
            rmse: rmse_bar(&truth_positions, pred, k, t)?,
        })
    };
    let ekf_score = score(FilterKind::Ekf, 0.0, &ekf_positions)?;
    let rekf_score = score(FilterKind::Rekf, c_hat, &rekf_positions)?;

    Ok(RunResult {
        seed,
        learn: outcome.report,
        ekf: ekf_score,
        rekf: rekf_score,
        k,
        t,
        truth_positions,
        ekf_positions,
        rekf_positions,
        training_denial: cfg.training_denial(),
        validation_denial,
        delta: cfg.noise.delta,
        runtime: started.elapsed(),
    })
}

/// Runs every seed in turn. With `out`, each run is exported to
/// `out/seed_<seed>/` as soon as it finishes and `report.csv` is rewritten,
/// so a later failure leaves the finished runs on disk.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<EvalReport, ExperimentError> {
    cfg.validate()?;
    let mut report = EvalReport::default();
    for &seed in &cfg.seeds {
        let run = run_single(cfg, seed)?;
        if let Some(dir) = out {
            export_run(&run, &dir.join(format!("seed_{seed}")))?;
        }
        report.runs.push(run);
        if let Some(dir) = out {
            write_report(&report, dir)?;
        }
    }
    Ok(report)
}
