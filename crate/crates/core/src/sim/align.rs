use nalgebra::{DVector, SVector, Vector3};

use super::SimError;
use crate::nav::{FixSample, MEAS_DIM};

/// A fix resampled onto one IMU timestamp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignedMeasurement {
    pub t: f64,
    /// `[pN, pE, pD, vN, vE, vD]`.
    pub y: SVector<f64, MEAS_DIM>,
    /// Copied from the source fix.
    pub held: bool,
    /// Index of the source fix.
    pub source: usize,
    /// The IMU sample precedes every fix; `source` is then the first fix.
    pub before_first_fix: bool,
}

impl AlignedMeasurement {
    pub fn y_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(self.y.as_slice())
    }

    pub fn as_fix(&self) -> FixSample {
        FixSample {
            t: self.t,
            pos: Vector3::new(self.y[0], self.y[1], self.y[2]),
            vel: Vector3::new(self.y[3], self.y[4], self.y[5]),
            held: self.held,
        }
    }
}

/// Causal zero-order hold: each IMU time takes the latest fix with
/// `fix.t ≤ t`.
pub fn zoh_align(fixes: &[FixSample], imu_times: &[f64]) -> Result<Vec<AlignedMeasurement>, SimError> {
    if fixes.is_empty() {
        return Err(SimError::EmptyFixes);
    }
    if let Some(i) = fixes.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(SimError::NonMonotonic {
            what: "fix stream".into(),
            index: i + 1,
        });
    }
    let mut out = Vec::with_capacity(imu_times.len());
    let mut j = 0;
    for &t in imu_times {
        while j + 1 < fixes.len() && fixes[j + 1].t <= t {
            j += 1;
        }
        let fix = &fixes[j];
        out.push(AlignedMeasurement {
            t,
            y: fix.measurement(),
            held: fix.held,
            source: j,
            before_first_fix: fix.t > t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix(t: f64, x: f64) -> FixSample {
        FixSample {
            t,
            pos: Vector3::new(x, 0.0, 0.0),
            vel: Vector3::zeros(),
            held: false,
        }
    }

    #[test]
    fn step_function_over_one_period() {
        let fixes = [fix(0.0, 1.0), fix(10.0 * 0.02, 2.0)];
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.02).collect();
        let aligned = zoh_align(&fixes, &times).unwrap();
        assert_eq!(aligned.len(), 11);
        assert!(aligned[..10].iter().all(|m| m.y[0] == 1.0 && m.source == 0));
        assert_eq!(aligned[10].y[0], 2.0);
    }

    #[test]
    fn never_uses_a_future_fix() {
        let fixes: Vec<_> = (0..20).map(|j| fix(0.2 * j as f64 + 0.05, j as f64)).collect();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.02).collect();
        let aligned = zoh_align(&fixes, &times).unwrap();
        for m in &aligned {
            if !m.before_first_fix {
                assert!(fixes[m.source].t <= m.t);
            }
            if m.source + 1 < fixes.len() {
                assert!(fixes[m.source + 1].t > m.t);
            }
        }
        assert!(aligned[0].before_first_fix);
        assert_eq!(aligned[0].source, 0);
    }

    #[test]
    fn realigning_is_idempotent() {
        let fixes: Vec<_> = (0..5).map(|j| fix((10 * j) as f64 * 0.02, j as f64)).collect();
        let times: Vec<f64> = (0..45).map(|k| k as f64 * 0.02).collect();
        let once = zoh_align(&fixes, &times).unwrap();
        let as_fixes: Vec<_> = once.iter().map(|m| m.as_fix()).collect();
        let twice = zoh_align(&as_fixes, &times).unwrap();
        let ys = |v: &[AlignedMeasurement]| v.iter().map(|m| (m.t, m.y, m.held)).collect::<Vec<_>>();
        assert_eq!(ys(&once), ys(&twice));
    }

    #[test]
    fn empty_fixes_error() {
        assert!(matches!(zoh_align(&[], &[0.0]), Err(SimError::EmptyFixes)));
    }
}
