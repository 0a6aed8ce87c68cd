//! Strapdown propagation of a level, hovering vehicle that starts to yaw and
//! accelerate, with a check of the analytic Jacobians against finite
//! differences.

use nalgebra::Vector3;
use robust_nav::nav::{jacobian_state, jacobian_state_fd, predict, quat, ImuSample, NavState, NoiseConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NoiseConfig::default();
    let mut x = NavState {
        q: quat::identity(),
        v: Vector3::zeros(),
        p: Vector3::new(0.0, 0.0, -10.0),
        delta_omega_b: Vector3::zeros(),
        delta_a_b: Vector3::zeros(),
    };
    // 0.2 rad/s yaw rate, 1 m/s² forward; the accelerometer also reads -g.
    let u = ImuSample::new(0.0, Vector3::new(0.0, 0.0, 0.2), Vector3::new(1.0, 0.0, -9.81));

    for k in 1..=250 {
        x = predict(&x, &u, &cfg)?;
        if k % 50 == 0 {
            let (roll, pitch, yaw) = nalgebra::Rotation3::from_matrix_unchecked(quat::quat_to_rotation(&x.q)?).euler_angles();
            println!(
                "t = {:4.1} s  yaw = {yaw:6.3} rad  |q| - 1 = {:+.1e}  v = [{:6.3} {:6.3} {:6.3}]  (roll {roll:.1e}, pitch {pitch:.1e})",
                k as f64 * cfg.delta,
                x.q.norm() - 1.0,
                x.v[0],
                x.v[1],
                x.v[2]
            );
        }
    }

    let a = jacobian_state(&x, &u, &cfg)?;
    let a_fd = jacobian_state_fd(&x, &u, &cfg)?;
    let worst = a
        .iter()
        .zip(a_fd.iter())
        .map(|(an, fd)| (an - fd).abs() / fd.abs().max(1.0))
        .fold(0.0, f64::max);
    println!("analytic vs central-difference state Jacobian: max relative error {worst:.2e}");
    Ok(())
}
