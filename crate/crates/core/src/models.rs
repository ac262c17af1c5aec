//! Acceleration laws for a follower behind its immediate predecessor.
//!
//! The proposed law is OVFL plus a non-positive energy-control term:
//!
//! ```text
//! a = alpha (V(s) - v) + beta (v_l - v) / s^2 - kappa v^2 (v_l - v)^2 / ((v_l - v)^2 + eps)
//! ```
//!
//! where `s = x_l - x` is the spacing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::ov::ov_unchecked;
use crate::params::ModelParams;

/// Spacing at or below which the follower is considered to have collided.
pub const COLLISION_SPACING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerInput {
    pub lead_position: f64,
    pub lead_velocity: f64,
    pub ego_position: f64,
    pub ego_velocity: f64,
}

impl FollowerInput {
    pub const fn new(lead_position: f64, lead_velocity: f64, ego_position: f64, ego_velocity: f64) -> Self {
        Self {
            lead_position,
            lead_velocity,
            ego_position,
            ego_velocity,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.lead_position - self.ego_position
    }

    pub fn relative_velocity(&self) -> f64 {
        self.lead_velocity - self.ego_velocity
    }

    fn checked_spacing(&self) -> Result<f64> {
        ensure_finite("lead position", self.lead_position)?;
        ensure_finite("lead velocity", self.lead_velocity)?;
        ensure_finite("ego position", self.ego_position)?;
        ensure_finite("ego velocity", self.ego_velocity)?;
        let s = self.spacing();
        if s <= COLLISION_SPACING {
            return Err(Error::Collision {
                leader: 0,
                follower: 1,
                spacing: s,
                time: f64::NAN,
            });
        }
        Ok(s)
    }
}

/// Which acceleration law a follower uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FollowerModel {
    Proposed,
    Ovfl,
}

impl FollowerModel {
    pub fn label(self) -> &'static str {
        match self {
            FollowerModel::Proposed => "proposed",
            FollowerModel::Ovfl => "ovfl",
        }
    }

    pub fn accel(self, input: &FollowerInput, params: &ModelParams) -> Result<f64> {
        match self {
            FollowerModel::Proposed => proposed_accel(input, params),
            FollowerModel::Ovfl => ovfl_accel(input, params),
        }
    }
}

impl fmt::Display for FollowerModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FollowerModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(FollowerModel::Proposed),
            "ovfl" => Ok(FollowerModel::Ovfl),
            other => Err(Error::Invalid(format!(
                "unknown model `{other}` (expected `proposed` or `ovfl`)"
            ))),
        }
    }
}

/// OVFL acceleration: `alpha (V(s) - v) + beta (v_l - v) / s^2`.
pub fn ovfl_accel(input: &FollowerInput, params: &ModelParams) -> Result<f64> {
    let s = input.checked_spacing()?;
    Ok(ovfl_terms(s, input, params))
}

#[inline]
fn ovfl_terms(s: f64, input: &FollowerInput, params: &ModelParams) -> f64 {
    let v = input.ego_velocity;
    params.alpha * (ov_unchecked(s) - v) + params.beta * (input.lead_velocity - v) / (s * s)
}

/// Proposed energy-aware acceleration: OVFL plus [`energy_control_term`].
pub fn proposed_accel(input: &FollowerInput, params: &ModelParams) -> Result<f64> {
    let s = input.checked_spacing()?;
    let control = control_term_unchecked(
        input.ego_velocity,
        input.lead_velocity,
        params.kappa,
        params.epsilon,
    );
    Ok(ovfl_terms(s, input, params) + control)
}

/// `-kappa v^2 (v_l - v)^2 / ((v_l - v)^2 + eps)`.
///
/// Never positive, and exactly zero at rest (`v = 0`) or when matching the
/// predecessor's speed (`v = v_l`).
pub fn energy_control_term(v: f64, v_l: f64, kappa: f64, epsilon: f64) -> Result<f64> {
    ensure_finite("velocity", v)?;
    ensure_finite("lead velocity", v_l)?;
    ensure_finite("kappa", kappa)?;
    ensure_finite("epsilon", epsilon)?;
    if epsilon <= 0.0 {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(control_term_unchecked(v, v_l, kappa, epsilon))
}

#[inline]
fn control_term_unchecked(v: f64, v_l: f64, kappa: f64, epsilon: f64) -> f64 {
    let dv2 = (v_l - v) * (v_l - v);
    -kappa * v * v * dv2 / (dv2 + epsilon)
}
