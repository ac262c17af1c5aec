//! Acceleration profiles for the lead vehicle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude of the fluctuating profile, `1.65 / 1.37`.
pub const FLUCTUATING_AMPLITUDE: f64 = 1.65 / 1.37;
/// Angular frequency of the sine component.
pub const FLUCTUATING_SIN_FREQ: f64 = 0.5 * PI;
/// Angular frequency of the cosine component.
pub const FLUCTUATING_COS_FREQ: f64 = 3.2 * PI;
/// End of the fluctuating profile's active window `[0, 20]`.
pub const FLUCTUATING_WINDOW_END: f64 = 20.0;

/// Times closer than this to a breakpoint are treated as on it.
const BREAKPOINT_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeadProfile {
    Constant {
        accel: f64,
    },
    /// Zero-order hold through `(time, accel)` breakpoints; zero before the
    /// first breakpoint.
    Table {
        breakpoints: Vec<(f64, f64)>,
    },
    /// `-(1.65/1.37) [sin(0.5 pi t) + cos(3.2 pi t)]` on `[0, 20]`, zero after.
    Fluctuating,
}

/// Which one-sided limit to take when a time sits on a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Approached from earlier times.
    Left,
    /// Approached from later times.
    Right,
}

impl LeadProfile {
    pub fn constant(accel: f64) -> Self {
        LeadProfile::Constant { accel }
    }

    pub fn table(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let p = LeadProfile::Table { breakpoints };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LeadProfile::Constant { accel } if !accel.is_finite() => {
                Err(Error::Invalid("constant lead acceleration must be finite".into()))
            }
            LeadProfile::Table { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(Error::Invalid("lead table needs at least one breakpoint".into()));
                }
                if breakpoints.iter().any(|(t, a)| !t.is_finite() || !a.is_finite()) {
                    return Err(Error::Invalid("lead table entries must be finite".into()));
                }
                if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Invalid(
                        "lead table breakpoints must be strictly increasing in time".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Times where the acceleration may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            LeadProfile::Constant { .. } => Vec::new(),
            LeadProfile::Table { breakpoints } => breakpoints.iter().map(|b| b.0).collect(),
            LeadProfile::Fluctuating => vec![0.0, FLUCTUATING_WINDOW_END],
        }
    }

    /// End of the interval where the profile can be non-zero, if bounded.
    pub fn active_until(&self) -> Option<f64> {
        match self {
            LeadProfile::Constant { accel } if *accel == 0.0 => Some(f64::NEG_INFINITY),
            LeadProfile::Constant { .. } => None,
            LeadProfile::Table { breakpoints } => match breakpoints.last() {
                Some((t, a)) if *a == 0.0 => Some(*t),
                _ => None,
            },
            LeadProfile::Fluctuating => Some(FLUCTUATING_WINDOW_END),
        }
    }

    /// One-sided value at `t`. Away from breakpoints both sides agree with
    /// [`lead_accel`].
    pub fn accel_from(&self, t: f64, side: Side) -> f64 {
        let t = self.snap(t);
        match self {
            LeadProfile::Constant { accel } => *accel,
            LeadProfile::Table { breakpoints } => {
                // Index of the last breakpoint that is active on the chosen side.
                let idx = match side {
                    Side::Right => breakpoints.partition_point(|(bt, _)| *bt <= t),
                    Side::Left => breakpoints.partition_point(|(bt, _)| *bt < t),
                };
                if idx == 0 {
                    0.0
                } else {
                    breakpoints[idx - 1].1
                }
            }
            LeadProfile::Fluctuating => {
                let active = match side {
                    Side::Right => (0.0..FLUCTUATING_WINDOW_END).contains(&t),
                    Side::Left => t > 0.0 && t <= FLUCTUATING_WINDOW_END,
                };
                if active {
                    fluctuating(t)
                } else {
                    0.0
                }
            }
        }
    }

    fn snap(&self, t: f64) -> f64 {
        for b in self.breakpoints() {
            if (t - b).abs() <= BREAKPOINT_SNAP * b.abs().max(1.0) {
                return b;
            }
        }
        t
    }
}

fn fluctuating(t: f64) -> f64 {
    -FLUCTUATING_AMPLITUDE * ((FLUCTUATING_SIN_FREQ * t).sin() + (FLUCTUATING_COS_FREQ * t).cos())
}

/// Lead acceleration at time `t`.
///
/// The fluctuating profile's window is closed, so `t = 20` is still active;
/// tables hold each value from its breakpoint onward.
pub fn lead_accel(profile: &LeadProfile, t: f64) -> f64 {
    match profile {
        LeadProfile::Fluctuating => {
            if (0.0..=FLUCTUATING_WINDOW_END).contains(&t) {
                fluctuating(t)
            } else {
                0.0
            }
        }
        _ => profile.accel_from(t, Side::Right),
    }
}
