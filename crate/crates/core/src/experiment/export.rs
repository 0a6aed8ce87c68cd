//! CSV artifacts of a run. Every file has a header row; floats are written in
//! shortest round-trip form.
//!
//! * `traj_{truth,ekf,rekf}.csv`: `k, t, pn, pe, pd`, one row per index `0..=T`.
//! * `denial.csv`: `phase, start, end, k_start, k_end`, where `k_start` and
//!   `k_end` are the first IMU indices at or after `start` and `end`; the
//!   validation row's `k_end` is the reacquisition index `K`.
//! * `report.csv`: `filter, c_hat, rmse_total, rmse_n, rmse_e, rmse_d, K, T, seed`.
//! * `learn.csv`: `c, loss`, with an empty loss for candidates whose filter failed.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::metrics::{rmse_bar, RmseBreakdown};
use super::runner::{EvalReport, FilterKind, FilterScore, RunResult};
use super::ExperimentError;
use crate::learn::LearnReport;
use crate::sim::{DenialScenario, Phase, TIME_EPS};

pub const TRAJ_TRUTH_FILE: &str = "traj_truth.csv";
pub const TRAJ_EKF_FILE: &str = "traj_ekf.csv";
pub const TRAJ_REKF_FILE: &str = "traj_rekf.csv";
pub const DENIAL_FILE: &str = "denial.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const LEARN_FILE: &str = "learn.csv";

#[derive(Debug, Serialize, Deserialize)]
struct TrajRow {
    k: usize,
    t: f64,
    pn: f64,
    pe: f64,
    pd: f64,
}

/// One denial window as written to `denial.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenialMarker {
    pub phase: Phase,
    pub start: f64,
    pub end: f64,
    pub k_start: usize,
    pub k_end: usize,
}

impl DenialMarker {
    /// Marker for `scenario` on the grid `t_k = k · delta`.
    pub fn new(scenario: &DenialScenario, delta: f64) -> Self {
        let index = |t: f64| ((t - TIME_EPS) / delta).ceil().max(0.0) as usize;
        Self {
            phase: scenario.applies_to,
            start: scenario.start,
            end: scenario.end(),
            k_start: index(scenario.start),
            k_end: index(scenario.end()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub filter: FilterKind,
    pub c_hat: f64,
    pub rmse_total: f64,
    pub rmse_n: f64,
    pub rmse_e: f64,
    pub rmse_d: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
}

impl ReportRow {
    fn new(score: &FilterScore, c_hat: f64, k: usize, t: usize, seed: u64) -> Self {
        Self {
            filter: score.kind,
            c_hat,
            rmse_total: score.rmse.total,
            rmse_n: score.rmse.n,
            rmse_e: score.rmse.e,
            rmse_d: score.rmse.d,
            k,
            t,
            seed,
        }
    }

    pub fn rmse(&self) -> RmseBreakdown {
        RmseBreakdown {
            total: self.rmse_total,
            n: self.rmse_n,
            e: self.rmse_e,
            d: self.rmse_d,
        }
    }
}

fn run_rows(run: &RunResult) -> Vec<ReportRow> {
    run.scores()
        .into_iter()
        .map(|s| ReportRow::new(s, run.learn.c_hat, run.k, run.t, run.seed))
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), ExperimentError> {
    let file = File::create(path).map_err(|e| ExperimentError::output(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| ExperimentError::output(path, e))?;
    }
    w.flush().map_err(|e| ExperimentError::output(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperimentError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ExperimentError::output(path, e))?;
    r.deserialize()
        .enumerate()
        // line 1 is the header
        .map(|(i, row)| row.map_err(|e| ExperimentError::output(path, format!("line {}: {e}", i + 2))))
        .collect()
}

fn create_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::output(dir, e))
}

fn write_trajectory(path: &Path, positions: &[Vector3<f64>], delta: f64) -> Result<(), ExperimentError> {
    write_csv(
        path,
        positions.iter().enumerate().map(|(k, p)| TrajRow {
            k,
            t: k as f64 * delta,
            pn: p[0],
            pe: p[1],
            pd: p[2],
        }),
    )
}

/// Times and positions of a trajectory file, indexed by `k`.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<Vector3<f64>>), ExperimentError> {
    let path = path.as_ref();
    let rows: Vec<TrajRow> = read_csv(path)?;
    if let Some(i) = rows.iter().enumerate().position(|(i, r)| r.k != i) {
        return Err(ExperimentError::output(path, format!("row {} has k = {}", i, rows[i].k)));
    }
    Ok(rows.iter().map(|r| (r.t, Vector3::new(r.pn, r.pe, r.pd))).unzip())
}

pub fn load_denial(path: impl AsRef<Path>) -> Result<Vec<DenialMarker>, ExperimentError> {
    read_csv(path.as_ref())
}

/// Writes trajectories, denial markers and the single-run report into `dir`.
pub fn export_run(run: &RunResult, dir: &Path) -> Result<(), ExperimentError> {
    create_dir(dir)?;
    write_trajectory(&dir.join(TRAJ_TRUTH_FILE), &run.truth_positions, run.delta)?;
    write_trajectory(&dir.join(TRAJ_EKF_FILE), &run.ekf_positions, run.delta)?;
    write_trajectory(&dir.join(TRAJ_REKF_FILE), &run.rekf_positions, run.delta)?;
    let mut validation = DenialMarker::new(&run.validation_denial, run.delta);
    validation.k_end = run.k;
    write_csv(
        &dir.join(DENIAL_FILE),
        [DenialMarker::new(&run.training_denial, run.delta), validation],
    )?;
    write_learn_report(&run.learn, dir)?;
    write_report(
        &EvalReport {
            runs: vec![run.clone()],
        },
        dir,
    )
}

/// `report.csv` and `report.txt` for every run in `report`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<(), ExperimentError> {
    create_dir(dir)?;
    write_csv(&dir.join(REPORT_FILE), report.runs.iter().flat_map(run_rows))?;
    let path = dir.join(REPORT_TEXT_FILE);
    fs::write(&path, report.render()).map_err(|e| ExperimentError::output(&path, e))
}

#[derive(Serialize)]
struct LossRow {
    c: f64,
    loss: Option<f64>,
}

/// `learn.csv` with the loss of every candidate.
pub fn write_learn_report(report: &LearnReport, dir: &Path) -> Result<(), ExperimentError> {
    create_dir(dir)?;
    write_csv(
        &dir.join(LEARN_FILE),
        report
            .grid
            .values()
            .iter()
            .zip(&report.losses)
            .map(|(&c, &loss)| LossRow { c, loss }),
    )
}

fn run_dirs(dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    if dir.join(TRAJ_TRUTH_FILE).exists() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries = fs::read_dir(dir).map_err(|e| ExperimentError::output(dir, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(TRAJ_TRUTH_FILE).exists())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(ExperimentError::output(dir, "no trajectory files found"));
    }
    Ok(dirs)
}

/// Recomputes the report rows from stored trajectories under `dir`, either a
/// single run directory or a directory of them. `c_hat` and `seed` come from
/// the run's own `report.csv` when present.
pub fn evaluate_dir(dir: &Path) -> Result<Vec<ReportRow>, ExperimentError> {
    let mut rows = Vec::new();
    for run in run_dirs(dir)? {
        let (_, truth) = load_trajectory(run.join(TRAJ_TRUTH_FILE))?;
        let markers = load_denial(run.join(DENIAL_FILE))?;
        let k = markers
            .iter()
            .find(|m| m.phase == Phase::Validation)
            .ok_or_else(|| ExperimentError::output(&run.join(DENIAL_FILE), "no validation window"))?
            .k_end;
        let t = truth.len().saturating_sub(1);
        let stored: Vec<ReportRow> = match run.join(REPORT_FILE) {
            p if p.exists() => read_csv(&p)?,
            _ => Vec::new(),
        };
        let (c_hat, seed) = stored.first().map_or((f64::NAN, 0), |r| (r.c_hat, r.seed));
        for (kind, file) in [(FilterKind::Ekf, TRAJ_EKF_FILE), (FilterKind::Rekf, TRAJ_REKF_FILE)] {
            let (_, pred) = load_trajectory(run.join(file))?;
            let tolerance = if kind == FilterKind::Ekf { 0.0 } else { c_hat };
            let score = FilterScore {
                kind,
                tolerance,
                rmse: rmse_bar(&truth, &pred, k, t)?,
            };
            rows.push(ReportRow::new(&score, c_hat, k, t, seed));
        }
    }
    Ok(rows)
}

/// Plain-text table of report rows.
pub fn render_rows(rows: &[ReportRow]) -> String {
    let mut out = String::from("seed      filter  c_hat   K     T     RMSE      N         E         D\n");
    for r in rows {
        out.push_str(&format!(
            "{:<8}  {:<6}  {:<6.4}  {:<4}  {:<4}  {:<8.4}  {:<8.4}  {:<8.4}  {:<8.4}\n",
            r.seed,
            r.filter.label(),
            r.c_hat,
            r.k,
            r.t,
            r.rmse_total,
            r.rmse_n,
            r.rmse_e,
            r.rmse_d
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers_on_the_imu_grid() {
        let m = DenialMarker::new(&DenialScenario::validation(40.0, 8.0), 0.02);
        assert_eq!((m.k_start, m.k_end), (2000, 2400));
        let m = DenialMarker::new(&DenialScenario::training(15.0, 6.0), 0.02);
        assert_eq!((m.k_start, m.k_end), (750, 1050));
        let m = DenialMarker::new(&DenialScenario::training(15.01, 1.0), 0.02);
        assert_eq!((m.k_start, m.k_end), (751, 801));
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let pos: Vec<_> = (0..50)
            .map(|i| Vector3::new(0.1 * i as f64, -1.0 / (i + 1) as f64, std::f64::consts::PI * i as f64))
            .collect();
        write_trajectory(&path, &pos, 0.02).unwrap();
        let (t, back) = load_trajectory(&path).unwrap();
        assert_eq!(back, pos);
        assert_eq!(t[49], 49.0 * 0.02);
    }
}
