//! Simulate the default 106 s circuit, deny GPS for 8 s, align the fixes on
//! the IMU grid and write the flight log.
//!
//! `cargo run --example simulate_flight -- [output-dir] [seed]`

use robust_nav::nav::NoiseConfig;
use robust_nav::sim::{
    inject_denial, load_log, save_log, simulate_flight, zoh_align, DenialScenario, SensorConfig, TrajectoryPlan,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "flight".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let plan = TrajectoryPlan { seed, ..TrajectoryPlan::default() };
    let log = simulate_flight(&plan, &NoiseConfig::default(), &SensorConfig::default())?;
    println!(
        "{:.0} s flight: {} IMU samples, {} fixes, final position {:?}",
        plan.duration(),
        log.imu.len(),
        log.fixes.len(),
        log.truth.last().map(|s| s.p.as_slice().to_vec())
    );

    let denied = inject_denial(&log.fixes, &DenialScenario::validation(40.0, 8.0))?;
    let aligned = zoh_align(&denied, &log.imu_times())?;
    let held = aligned.iter().filter(|m| m.held).count();
    println!("40-48 s outage: {} held fixes, {held} held IMU-rate measurements", denied.iter().filter(|f| f.held).count());

    save_log(&log, &dir)?;
    assert_eq!(load_log(&dir)?, log);
    println!("wrote and re-read {dir}/imu.csv, fix.csv, truth.csv");
    Ok(())
}
