//! Scalar-first Hamilton quaternions stored as plain `Vector4<f64>`.
//!
//! A unit quaternion `q` describes the passive rotation from the body frame
//! to the North-East-Down navigation frame: `R(q) x` is the vector part of
//! `q * (0, x) * q⁻¹`.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Matrix4x3, Vector3, Vector4};

use super::NavError;

/// `[q0, q1, q2, q3]`, scalar first.
pub type Quat = Vector4<f64>;

/// Below this rotation-vector norm `quat_exp` uses its Taylor expansion.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Norm below which a quaternion is treated as degenerate.
pub const MIN_QUAT_NORM: f64 = 1e-6;

pub fn identity() -> Quat {
    Vector4::new(1.0, 0.0, 0.0, 0.0)
}

pub fn conjugate(q: &Quat) -> Quat {
    Vector4::new(q[0], -q[1], -q[2], -q[3])
}

/// Hamilton product `a * b`.
pub fn quat_mul(a: &Quat, b: &Quat) -> Quat {
    left_matrix(a) * b
}

/// Matrix `M` with `a * b = M(a) b`.
pub fn left_matrix(a: &Quat) -> Matrix4<f64> {
    Matrix4::new(
        a[0], -a[1], -a[2], -a[3], //
        a[1], a[0], -a[3], a[2], //
        a[2], a[3], a[0], -a[1], //
        a[3], -a[2], a[1], a[0],
    )
}

/// Matrix `M` with `a * b = M(b) a`.
pub fn right_matrix(b: &Quat) -> Matrix4<f64> {
    Matrix4::new(
        b[0], -b[1], -b[2], -b[3], //
        b[1], b[0], b[3], -b[2], //
        b[2], -b[3], b[0], b[1], //
        b[3], b[2], -b[1], b[0],
    )
}

/// `sin(φ/2)/φ`, with its series expansion near zero.
fn half_sinc(phi: f64) -> f64 {
    if phi < SMALL_ANGLE {
        0.5 - phi * phi / 48.0
    } else {
        (0.5 * phi).sin() / phi
    }
}

/// Exponential map from a rotation vector (rad) to a unit quaternion.
pub fn quat_exp(delta_theta: &Vector3<f64>) -> Quat {
    let phi = delta_theta.norm();
    let s = half_sinc(phi);
    Vector4::new(
        (0.5 * phi).cos(),
        s * delta_theta[0],
        s * delta_theta[1],
        s * delta_theta[2],
    )
}

/// Derivative of [`quat_exp`] with respect to the rotation vector.
pub fn quat_exp_jacobian(delta_theta: &Vector3<f64>) -> Matrix4x3<f64> {
    let phi = delta_theta.norm();
    let s = half_sinc(phi);
    // (ds/dφ)/φ
    let ds_over_phi = if phi < 1e-4 {
        -1.0 / 24.0 + phi * phi / 960.0
    } else {
        (0.5 * phi * (0.5 * phi).cos() - (0.5 * phi).sin()) / (phi * phi * phi)
    };
    let mut j = Matrix4x3::zeros();
    j.row_mut(0)
        .copy_from(&(-0.5 * s * delta_theta.transpose()));
    let vec_block =
        Matrix3::identity() * s + delta_theta * delta_theta.transpose() * ds_over_phi;
    j.fixed_view_mut::<3, 3>(1, 0).copy_from(&vec_block);
    j
}

/// Inverse of [`quat_exp`]: the rotation vector of a unit quaternion, taking
/// the short way round.
pub fn quat_log(q: &Quat) -> Vector3<f64> {
    let q = if q[0] < 0.0 { -q } else { *q };
    let v = Vector3::new(q[1], q[2], q[3]);
    let vn = v.norm();
    if vn < SMALL_ANGLE {
        return v * 2.0;
    }
    let phi = 2.0 * vn.atan2(q[0]);
    v * (phi / vn)
}

pub fn normalize(q: &Quat) -> Result<Quat, NavError> {
    let n = q.norm();
    if !n.is_finite() || n < MIN_QUAT_NORM {
        return Err(NavError::DegenerateQuaternion(n));
    }
    Ok(q / n)
}

/// Rotation matrix of a quaternion assumed to be unit norm.
pub(crate) fn rotation_of_unit(q: &Quat) -> Matrix3<f64> {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Body-to-navigation rotation matrix. The input is renormalized first.
pub fn quat_to_rotation(q: &Quat) -> Result<Matrix3<f64>, NavError> {
    Ok(rotation_of_unit(&normalize(q)?))
}

/// Derivative of `R(q) w` with respect to the components of a unit `q`.
pub(crate) fn rotate_jacobian_unit(q: &Quat, w: &Vector3<f64>) -> Matrix3x4<f64> {
    let s = q[0];
    let v = Vector3::new(q[1], q[2], q[3]);
    let mut j = Matrix3x4::zeros();
    j.column_mut(0).copy_from(&(2.0 * v.cross(w)));
    let dv = -2.0 * s * skew(w)
        + 2.0 * (Matrix3::identity() * v.dot(w) + v * w.transpose() - 2.0 * w * v.transpose());
    j.fixed_view_mut::<3, 3>(0, 1).copy_from(&dv);
    j
}

/// Derivative of `q / ‖q‖`.
pub(crate) fn normalize_jacobian(q: &Quat) -> Matrix4<f64> {
    let n = q.norm();
    let u = q / n;
    (Matrix4::identity() - u * u.transpose()) / n
}

/// Skew-symmetric matrix with `skew(x) y = x × y`.
pub fn skew(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -x[2], x[1], //
        x[2], 0.0, -x[0], //
        -x[1], x[0], 0.0,
    )
}

/// Quaternion from yaw-pitch-roll (ZYX) Euler angles, body to NED.
pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Quat {
    let (sr, cr) = (0.5 * roll).sin_cos();
    let (sp, cp) = (0.5 * pitch).sin_cos();
    let (sy, cy) = (0.5 * yaw).sin_cos();
    Vector4::new(
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    )
}
