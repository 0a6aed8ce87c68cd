//! The EKF and a robust EKF side by side through a GPS outage: both coast on
//! the frozen fix, then re-converge after reacquisition.

use nalgebra::Vector3;
use robust_nav::experiment::{initial_belief, load_or_simulate, prepare_streams, ExperimentConfig};
use robust_nav::filter::{FilterConfig, NavModel, RobustFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let model = NavModel::new(cfg.noise.clone(), cfg.jacobians)?;
    let streams = prepare_streams(&cfg, load_or_simulate(&cfg, 11)?)?;
    let init = initial_belief(&cfg, &model, &streams.flight)?;

    let mut ekf = RobustFilter::new(&model, FilterConfig::default(), init.clone())?;
    let mut rekf = RobustFilter::new(&model, FilterConfig::with_tolerance(0.3), init)?;
    let denial = cfg.validation_denial();
    println!("validation outage {:.0}-{:.0} s; position error of the one-step prediction (m)", denial.start, denial.end());
    println!("   t      EKF     REKF    θ");
    for (k, (u, m)) in streams.flight.imu.iter().zip(&streams.measurements).enumerate() {
        let y = m.y_dvector();
        ekf.step(u, &y)?;
        let out = rekf.step(u, &y)?;
        let truth = streams.flight.truth.get(k + 1).map(|s| s.p);
        if let Some(truth) = truth.filter(|_| (k + 1) % 250 == 0) {
            let err = |mean: &nalgebra::DVector<f64>| (Vector3::new(mean[7], mean[8], mean[9]) - truth).norm();
            println!(
                "{:5.1}  {:7.3}  {:7.3}  {:.2e}{}",
                (k + 1) as f64 * cfg.noise.delta,
                err(&ekf.belief().mean),
                err(&rekf.belief().mean),
                out.theta,
                if m.held { "  (GPS held)" } else { "" }
            );
        }
    }
    Ok(())
}
