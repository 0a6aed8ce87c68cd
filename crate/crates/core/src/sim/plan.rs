//! Piecewise-smooth flight plans.
//!
//! Every segment blends its horizontal speed with a smoothstep, spreads its
//! heading change and climb with a raised-cosine rate profile, and so starts
//! and ends with zero turn rate, zero climb rate and zero longitudinal
//! acceleration. Consecutive segments therefore join with continuous
//! velocity and attitude.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    /// Horizontal ground speed at the segment start (m/s).
    pub speed_start: f64,
    /// Horizontal ground speed at the segment end (m/s).
    pub speed_end: f64,
    /// Heading change over the segment (rad, positive clockwise seen from above).
    #[serde(default)]
    pub turn: f64,
    /// Altitude gained over the segment (m, positive up).
    #[serde(default)]
    pub climb: f64,
}

impl Segment {
    pub fn hover(duration: f64) -> Self {
        Self::cruise(duration, 0.0)
    }

    pub fn cruise(duration: f64, speed: f64) -> Self {
        Self {
            duration,
            speed_start: speed,
            speed_end: speed,
            turn: 0.0,
            climb: 0.0,
        }
    }

    pub fn ramp(duration: f64, from: f64, to: f64) -> Self {
        Self {
            speed_start: from,
            speed_end: to,
            ..Self::cruise(duration, from)
        }
    }

    pub fn turn(duration: f64, speed: f64, angle: f64) -> Self {
        Self {
            turn: angle,
            ..Self::cruise(duration, speed)
        }
    }

    pub fn climb(duration: f64, height: f64) -> Self {
        Self {
            climb: height,
            ..Self::hover(duration)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryPlan {
    /// NED start position (m).
    pub start_position: [f64; 3],
    /// Initial heading (rad from North).
    pub start_heading: f64,
    pub segments: Vec<Segment>,
    pub seed: u64,
}

impl Default for TrajectoryPlan {
    /// A 106 s counterclockwise circuit: climb, four straight legs joined by
    /// left turns, then a stop and hover.
    fn default() -> Self {
        let cruise = 4.0;
        let left = -FRAC_PI_2;
        Self {
            start_position: [0.0, 0.0, 0.0],
            start_heading: 0.0,
            segments: vec![
                Segment::climb(6.0, 10.0),
                Segment::ramp(4.0, 0.0, cruise),
                Segment::cruise(10.0, cruise),
                Segment::turn(6.0, cruise, left),
                Segment::cruise(10.0, cruise),
                Segment::turn(4.0, cruise, left),
                Segment::cruise(20.0, cruise),
                Segment::turn(6.0, cruise, left),
                Segment::cruise(18.0, cruise),
                Segment::turn(6.0, cruise, left),
                Segment::cruise(8.0, cruise),
                Segment::ramp(4.0, cruise, 0.0),
                Segment::hover(4.0),
            ],
            seed: 0,
        }
    }
}

/// Kinematic quantities at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub velocity: Vector3<f64>,
    pub heading: f64,
    pub heading_rate: f64,
    pub speed: f64,
    pub longitudinal_accel: f64,
}

fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

/// Integral of the raised-cosine bump normalized to one over `[0, 1]`.
fn bump_integral(s: f64) -> f64 {
    s - (2.0 * PI * s).sin() / (2.0 * PI)
}

fn bump(s: f64) -> f64 {
    1.0 - (2.0 * PI * s).cos()
}

impl TrajectoryPlan {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.segments.is_empty() {
            return Err(SimError::InfeasiblePlan("plan has no segments".into()));
        }
        if self.start_position.iter().any(|v| !v.is_finite()) || !self.start_heading.is_finite() {
            return Err(SimError::InfeasiblePlan("non-finite start pose".into()));
        }
        let mut previous_speed: Option<f64> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(SimError::InfeasiblePlan(format!(
                    "segment {i}: duration must be > 0, got {}",
                    seg.duration
                )));
            }
            let fields = [seg.speed_start, seg.speed_end, seg.turn, seg.climb];
            if fields.iter().any(|v| !v.is_finite()) || seg.speed_start < 0.0 || seg.speed_end < 0.0 {
                return Err(SimError::InfeasiblePlan(format!(
                    "segment {i}: speeds must be finite and ≥ 0"
                )));
            }
            if let Some(prev) = previous_speed {
                if (prev - seg.speed_start).abs() > 1e-9 {
                    return Err(SimError::InfeasiblePlan(format!(
                        "segment {i}: speed jumps from {prev} to {}",
                        seg.speed_start
                    )));
                }
            }
            previous_speed = Some(seg.speed_end);
        }
        Ok(())
    }

    /// Segment index, local time and accumulated heading at the start of
    /// that segment.
    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let mut start = 0.0;
        let mut heading = self.start_heading;
        let last = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            if t < start + seg.duration || i == last {
                return (i, (t - start).clamp(0.0, seg.duration), heading);
            }
            start += seg.duration;
            heading += seg.turn;
        }
        unreachable!("plan validated as non-empty")
    }

    /// Velocity and heading at time `t`. Times past the end clamp to the
    /// final instant.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        let (i, tau, heading0) = self.locate(t);
        let seg = &self.segments[i];
        let s = tau / seg.duration;
        let speed = seg.speed_start + (seg.speed_end - seg.speed_start) * smoothstep(s);
        let longitudinal_accel =
            (seg.speed_end - seg.speed_start) * 6.0 * s * (1.0 - s) / seg.duration;
        let heading = heading0 + seg.turn * bump_integral(s);
        let heading_rate = seg.turn * bump(s) / seg.duration;
        let climb_rate = seg.climb * bump(s) / seg.duration;
        Kinematics {
            velocity: Vector3::new(speed * heading.cos(), speed * heading.sin(), -climb_rate),
            heading,
            heading_rate,
            speed,
            longitudinal_accel,
        }
    }
}
