use serde::{Deserialize, Serialize};

use super::SimError;
use crate::nav::FixSample;

/// Slack on window boundaries so that timestamps built as `k · Δ` land on
/// the intended side.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Training,
    Validation,
}

/// GPS/barometer outage over `[start, start + duration)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenialScenario {
    pub start: f64,
    pub duration: f64,
    pub applies_to: Phase,
}

impl DenialScenario {
    pub fn training(start: f64, duration: f64) -> Self {
        Self {
            start,
            duration,
            applies_to: Phase::Training,
        }
    }

    pub fn validation(start: f64, duration: f64) -> Self {
        Self {
            start,
            duration,
            applies_to: Phase::Validation,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start - TIME_EPS && t < self.end() - TIME_EPS
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.start.is_finite() && self.duration.is_finite() && self.duration >= 0.0) {
            return Err(SimError::DenialWindow(format!(
                "invalid window start {} duration {}",
                self.start, self.duration
            )));
        }
        Ok(())
    }
}

/// Freezes every fix inside the window at the last value received before it
/// and flags it as held.
pub fn inject_denial(fixes: &[FixSample], scenario: &DenialScenario) -> Result<Vec<FixSample>, SimError> {
    scenario.validate()?;
    let mut out = fixes.to_vec();
    if scenario.duration == 0.0 {
        return Ok(out);
    }
    let last_good = fixes
        .iter()
        .rposition(|f| f.t < scenario.start - TIME_EPS)
        .ok_or_else(|| {
            SimError::DenialWindow(format!(
                "window starting at {} s has no earlier fix to hold",
                scenario.start
            ))
        })?;
    let held = fixes[last_good];
    for fix in out.iter_mut().skip(last_good + 1) {
        if scenario.contains(fix.t) {
            fix.pos = held.pos;
            fix.vel = held.vel;
            fix.held = true;
        }
    }
    Ok(out)
}
