use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::plan::TrajectoryPlan;
use super::SimError;
use crate::nav::quat::{self, Quat};
use crate::nav::{FixSample, ImuSample, NavState, NoiseConfig};

/// Sensor error model of the simulator. IMU white-noise intensities come from
/// the [`NoiseConfig`] so simulated data follows the filters' nominal model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// GPS horizontal position standard deviation (m).
    pub gps_pos_std: f64,
    /// Barometer vertical position standard deviation (m).
    pub baro_std: f64,
    /// Horizontal velocity standard deviation (m/s).
    pub vel_std_h: f64,
    /// Vertical velocity standard deviation (m/s).
    pub vel_std_v: f64,
    /// Constant gyro bias (rad/s).
    pub gyro_bias: [f64; 3],
    /// Constant accelerometer bias (m/s²).
    pub accel_bias: [f64; 3],
    /// Add IMU white noise at the configured intensities.
    pub imu_noise: bool,
    /// IMU samples per fix.
    pub fix_decimation: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gps_pos_std: 0.7,
            baro_std: 0.8,
            vel_std_h: 0.35,
            vel_std_v: 0.4,
            gyro_bias: [1.3778e-4; 3],
            accel_bias: [3.38e-9; 3],
            imu_noise: true,
            fix_decimation: 10,
        }
    }
}

impl SensorConfig {
    /// Perfect sensors: no noise, no bias.
    pub fn ideal() -> Self {
        Self {
            gps_pos_std: 0.0,
            baro_std: 0.0,
            vel_std_h: 0.0,
            vel_std_v: 0.0,
            gyro_bias: [0.0; 3],
            accel_bias: [0.0; 3],
            imu_noise: false,
            fix_decimation: 10,
        }
    }

    /// Data from the filters' own model: a fix on every IMU sample with white
    /// noise of covariance `R`. Biases keep their defaults, which are the
    /// constants of the default initial prediction.
    pub fn nominal(cfg: &NoiseConfig) -> Self {
        Self {
            gps_pos_std: cfg.r[0].sqrt(),
            baro_std: cfg.r[2].sqrt(),
            vel_std_h: cfg.r[3].sqrt(),
            vel_std_v: cfg.r[5].sqrt(),
            fix_decimation: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let stds = [self.gps_pos_std, self.baro_std, self.vel_std_h, self.vel_std_v];
        if stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(SimError::InvalidConfig("standard deviations must be finite and ≥ 0".into()));
        }
        if self.gyro_bias.iter().chain(&self.accel_bias).any(|b| !b.is_finite()) {
            return Err(SimError::InvalidConfig("biases must be finite".into()));
        }
        if self.fix_decimation == 0 {
            return Err(SimError::InvalidConfig("fix_decimation must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Ground-truth pose and velocity at one IMU instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub q: Quat,
    pub v: Vector3<f64>,
    pub p: Vector3<f64>,
}

impl TruthSample {
    pub fn nav_state(&self, delta_omega_b: Vector3<f64>, delta_a_b: Vector3<f64>) -> NavState {
        NavState {
            q: self.q,
            v: self.v,
            p: self.p,
            delta_omega_b,
            delta_a_b,
        }
    }
}

/// IMU stream, fix stream and truth of one flight.
#[derive(Clone, Debug, PartialEq)]
pub struct FlightLog {
    pub imu: Vec<ImuSample>,
    pub fixes: Vec<FixSample>,
    pub truth: Vec<TruthSample>,
}

impl FlightLog {
    pub fn imu_times(&self) -> Vec<f64> {
        self.imu.iter().map(|s| s.t).collect()
    }
}

// 5-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

fn integrate_velocity(plan: &TrajectoryPlan, t0: f64, t1: f64) -> Vector3<f64> {
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t0 + t1);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| plan.kinematics(mid + half * x).velocity * w)
        .sum::<Vector3<f64>>()
        * half
}

/// Multirotor-like attitude: heading as yaw, bank for the centripetal
/// acceleration, nose-down pitch for forward acceleration.
fn attitude(plan: &TrajectoryPlan, t: f64, gravity: f64) -> Quat {
    let k = plan.kinematics(t);
    let (roll, pitch) = if gravity > 0.0 {
        (
            (k.speed * k.heading_rate / gravity).atan(),
            -(k.longitudinal_accel / gravity).atan(),
        )
    } else {
        (0.0, 0.0)
    };
    quat::from_euler(roll, pitch, k.heading)
}

fn truth_samples(plan: &TrajectoryPlan, count: usize, cfg: &NoiseConfig) -> Vec<TruthSample> {
    let g = cfg.gravity().norm();
    let mut p = Vector3::from(plan.start_position);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 * cfg.delta;
        if k > 0 {
            p += integrate_velocity(plan, (k - 1) as f64 * cfg.delta, t);
        }
        out.push(TruthSample {
            t,
            q: attitude(plan, t, g),
            v: plan.kinematics(t).velocity,
            p,
        });
    }
    out
}

/// Simulates one flight following `plan`, seeded by `plan.seed`.
///
/// IMU samples are the discrete inverse kinematics between consecutive truth
/// samples, so the noise-free process model maps truth `k` exactly onto the
/// attitude and velocity of truth `k + 1`; position differs by the Euler
/// integration error.
pub fn simulate_flight(
    plan: &TrajectoryPlan,
    cfg: &NoiseConfig,
    sensors: &SensorConfig,
) -> Result<FlightLog, SimError> {
    plan.validate()?;
    sensors.validate()?;
    cfg.validate()?;
    let dt = cfg.delta;
    let steps = (plan.duration() / dt).round() as usize;
    let truth_ext = truth_samples(plan, steps + 2, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };

    let gyro_std = if sensors.imu_noise { (dt * cfg.sigma2_omega).sqrt() } else { 0.0 };
    let accel_std = if sensors.imu_noise { (dt * cfg.sigma2_v).sqrt() } else { 0.0 };
    let gyro_bias = Vector3::from(sensors.gyro_bias);
    let accel_bias = Vector3::from(sensors.accel_bias);
    let gravity = cfg.gravity();

    let mut imu = Vec::with_capacity(steps + 1);
    let mut fixes = Vec::with_capacity(steps / sensors.fix_decimation + 1);
    for k in 0..=steps {
        let (now, next) = (&truth_ext[k], &truth_ext[k + 1]);
        let rel = quat::quat_mul(&quat::conjugate(&now.q), &next.q);
        let omega = quat::quat_log(&rel) / dt;
        let rot = quat::quat_to_rotation(&now.q)?;
        let specific_force = rot.transpose() * ((next.v - now.v) / dt - gravity);

        let gyro_noise = Vector3::from_fn(|_, _| gyro_std * normal());
        let accel_noise = Vector3::from_fn(|_, _| accel_std * normal());
        imu.push(ImuSample::new(
            now.t,
            omega + gyro_bias + gyro_noise,
            specific_force + accel_bias + accel_noise,
        ));

        if k % sensors.fix_decimation == 0 {
            let pos_std = [sensors.gps_pos_std, sensors.gps_pos_std, sensors.baro_std];
            let vel_std = [sensors.vel_std_h, sensors.vel_std_h, sensors.vel_std_v];
            let pos = Vector3::from_fn(|i, _| now.p[i] + pos_std[i] * normal());
            let vel = Vector3::from_fn(|i, _| now.v[i] + vel_std[i] * normal());
            fixes.push(FixSample {
                t: now.t,
                pos,
                vel,
                held: false,
            });
        }
    }
    let mut truth = truth_ext;
    truth.truncate(steps + 1);
    Ok(FlightLog { imu, fixes, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nav::predict;
    use crate::sim::plan::Segment;

    #[test]
    fn default_flight_has_expected_sample_counts() {
        let log = simulate_flight(&TrajectoryPlan::default(), &NoiseConfig::default(), &SensorConfig::default())
            .unwrap();
        assert_eq!(log.imu.len(), 5301);
        assert_eq!(log.fixes.len(), 531);
        assert_eq!(log.truth.len(), 5301);
        assert!(log.imu.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(log.imu[5300].t, 5300.0 * 0.02);
    }

    #[test]
    fn hover_reads_gravity_and_no_rotation() {
        let plan = TrajectoryPlan {
            segments: vec![Segment::hover(2.0)],
            ..TrajectoryPlan::default()
        };
        let log = simulate_flight(&plan, &NoiseConfig::default(), &SensorConfig::ideal()).unwrap();
        for s in &log.imu {
            assert!((s.a_m - Vector3::new(0.0, 0.0, -9.81)).norm() < 1e-12);
            assert!(s.omega_m.norm() < 1e-12);
        }
    }

    #[test]
    fn noise_free_imu_reproduces_truth() {
        let cfg = NoiseConfig::default();
        let log = simulate_flight(&TrajectoryPlan::default(), &cfg, &SensorConfig::ideal()).unwrap();
        let dt = cfg.delta;
        for k in 0..log.truth.len() - 1 {
            let x = log.truth[k].nav_state(Vector3::zeros(), Vector3::zeros());
            let next = predict(&x, &log.imu[k], &cfg).unwrap();
            let truth = &log.truth[k + 1];
            assert!((next.v - truth.v).norm() < 1e-9, "velocity at {k}");
            assert!((next.q - truth.q).norm() < 1e-9, "attitude at {k}");
            // Euler position step: error bounded by ½ max|a| Δ².
            assert!((next.p - truth.p).norm() < 0.5 * 5.0 * dt * dt, "position at {k}");
        }
    }

    #[test]
    fn same_seed_same_log() {
        let plan = TrajectoryPlan { seed: 9, ..TrajectoryPlan::default() };
        let a = simulate_flight(&plan, &NoiseConfig::default(), &SensorConfig::default()).unwrap();
        let b = simulate_flight(&plan, &NoiseConfig::default(), &SensorConfig::default()).unwrap();
        assert_eq!(a, b);
        let other = TrajectoryPlan { seed: 10, ..plan };
        let c = simulate_flight(&other, &NoiseConfig::default(), &SensorConfig::default()).unwrap();
        assert_ne!(a.imu, c.imu);
    }

    #[test]
    fn infeasible_plan_is_rejected() {
        let plan = TrajectoryPlan {
            segments: vec![Segment::cruise(3.0, 1.0), Segment::cruise(3.0, 2.0)],
            ..TrajectoryPlan::default()
        };
        assert!(simulate_flight(&plan, &NoiseConfig::default(), &SensorConfig::default()).is_err());
    }
}
