//! The full protocol over several seeds: learn the tolerance on the training
//! phase, then compare EKF and REKF after the validation outage.
//!
//! `cargo run --release --example gps_denial_experiment -- [seeds] [straight|turn] [output-dir]`

use std::path::PathBuf;

use robust_nav::experiment::{run_experiment, ExperimentConfig, FilterKind, ValidationKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let kind: ValidationKind = args.next().map(|s| s.parse()).transpose()?.unwrap_or(ValidationKind::Straight);
    let out = args.next().map(PathBuf::from);

    let cfg = ExperimentConfig {
        seeds: (0..seeds).collect(),
        validation: robust_nav::experiment::ValidationConfig { kind, ..Default::default() },
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg, out.as_deref())?;
    print!("{}", report.render());
    let wins = report.runs.iter().filter(|r| r.rekf.rmse.total < r.ekf.rmse.total).count();
    println!(
        "REKF better in {wins}/{} runs; median RMSE EKF {:.3}, REKF {:.3}",
        report.runs.len(),
        report.median_rmse(FilterKind::Ekf).unwrap_or(f64::NAN),
        report.median_rmse(FilterKind::Rekf).unwrap_or(f64::NAN)
    );
    Ok(())
}
