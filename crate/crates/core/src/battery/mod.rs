//! Two-RC equivalent-circuit cell, state of charge, heat generation and the
//! chain from vehicle mechanics to cell current.
//!
//! Everything in this module is SI: volts, amps, ohms, farads, seconds,
//! watts, metres. [`UnitScaling`] bridges from the dimensionless traffic
//! model.
//!
//! Sign convention: current is positive while discharging and negative
//! while charging (regeneration).

pub(crate) mod cell;
mod optimality;
mod powertrain;

pub use cell::{power_loss, rc_derivatives, soc_derivative, step_battery, terminal_voltage, PowerLoss};
pub use optimality::{verify_zero_current_optimality, OptimalityReport, ProfileOutcome};
pub use powertrain::{
    cell_power_from_motor, motor_power_from_dynamics, resistive_force, solve_cell_current,
    UnitScaling, VehicleBodyParams, GRAVITY,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open-circuit voltage as a monotone piecewise-linear function of SOC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OcvCurve {
    points: Vec<(f64, f64)>,
}

impl OcvCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let c = Self { points };
        c.validate()?;
        Ok(c)
    }

    /// `3.2 + 0.7 S` volts.
    pub fn linear_default() -> Self {
        Self {
            points: vec![(0.0, 3.2), (1.0, 3.9)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.points;
        if p.is_empty() {
            return Err(Error::Invalid("OCV curve needs at least one breakpoint".into()));
        }
        if p.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(Error::Invalid("OCV breakpoints must be finite".into()));
        }
        for w in p.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invalid("OCV breakpoints must be strictly increasing in SOC".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Invalid("OCV curve must be non-decreasing in SOC".into()));
            }
        }
        Ok(())
    }

    /// Voltage at `soc`; flat extrapolation beyond the end breakpoints.
    pub fn voltage(&self, soc: f64) -> f64 {
        let p = &self.points;
        if soc <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if soc >= last.0 {
            return last.1;
        }
        let i = p.partition_point(|(s, _)| *s <= soc);
        let (s0, v0) = p[i - 1];
        let (s1, v1) = p[i];
        v0 + (v1 - v0) * (soc - s0) / (s1 - s0)
    }
}

/// Cell constants and pack layout.
///
/// The defaults describe a generic small Li-ion cell. They are engineering
/// placeholders, not measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryParams {
    /// Series resistance (ohm).
    pub r_s: f64,
    pub r_1: f64,
    pub c_1: f64,
    pub r_2: f64,
    pub c_2: f64,
    /// Nominal capacity (ampere-hour).
    pub capacity_ah: f64,
    pub n_series: u32,
    pub n_parallel: u32,
    /// Motor efficiency in `(0, 1]`.
    pub eta: f64,
    pub ocv: OcvCurve,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            r_s: 0.01,
            r_1: 0.015,
            c_1: 2400.0,
            r_2: 0.002,
            c_2: 50_000.0,
            capacity_ah: 2.3,
            n_series: 100,
            n_parallel: 10,
            eta: 0.8,
            ocv: OcvCurve::linear_default(),
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_s", self.r_s),
            ("r_1", self.r_1),
            ("c_1", self.c_1),
            ("r_2", self.r_2),
            ("c_2", self.c_2),
            ("capacity_ah", self.capacity_ah),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("battery {name} must be positive, got {v}")));
            }
        }
        if self.n_series < 1 || self.n_parallel < 1 {
            return Err(Error::Invalid("battery n_series and n_parallel must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Invalid(format!("battery eta must lie in (0, 1], got {}", self.eta)));
        }
        self.ocv.validate()
    }

    pub fn tau_1(&self) -> f64 {
        self.r_1 * self.c_1
    }

    pub fn tau_2(&self) -> f64 {
        self.r_2 * self.c_2
    }

    pub fn cells(&self) -> f64 {
        f64::from(self.n_series) * f64::from(self.n_parallel)
    }
}

/// Dynamic cell state: RC branch voltages and state of charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryState {
    pub v1: f64,
    pub v2: f64,
    pub soc: f64,
}

impl BatteryState {
    pub const fn new(v1: f64, v2: f64, soc: f64) -> Self {
        Self { v1, v2, soc }
    }

    /// Relaxed cell at the given state of charge.
    pub const fn rested(soc: f64) -> Self {
        Self::new(0.0, 0.0, soc)
    }

    pub fn soc_in_range(&self) -> bool {
        (0.0..=1.0).contains(&self.soc)
    }
}

impl Default for BatteryState {
    fn default() -> Self {
        Self::rested(0.8)
    }
}
