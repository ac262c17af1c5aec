use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{terminal_voltage, BatteryParams, BatteryState};

pub const GRAVITY: f64 = 9.81;

/// Longitudinal body constants for road-load forces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleBodyParams {
    /// Mass (kg).
    pub m: f64,
    /// Air density (kg/m^3).
    pub rho: f64,
    /// Frontal area (m^2).
    #[serde(rename = "A", alias = "area")]
    pub area: f64,
    #[serde(rename = "C_d", alias = "c_d")]
    pub c_d: f64,
    #[serde(rename = "C_r", alias = "c_r")]
    pub c_r: f64,
    /// Road grade (rad).
    pub theta: f64,
}

impl Default for VehicleBodyParams {
    fn default() -> Self {
        Self {
            m: 1500.0,
            rho: 1.2,
            area: 2.0,
            c_d: 0.3,
            c_r: 0.01,
            theta: 0.0,
        }
    }
}

impl VehicleBodyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m", self.m), ("rho", self.rho), ("area", self.area)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("body {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("c_d", self.c_d), ("c_r", self.c_r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invalid(format!("body {name} must be non-negative, got {v}")));
            }
        }
        if !(self.theta.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Invalid(format!(
                "road grade theta must satisfy |theta| < pi/2, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Metres per model length unit and seconds per model time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitScaling {
    pub length_scale: f64,
    pub time_scale: f64,
}

impl Default for UnitScaling {
    /// 1 length unit = 10 m, 1 time unit = 1 s. A demo mapping only.
    fn default() -> Self {
        Self {
            length_scale: 10.0,
            time_scale: 1.0,
        }
    }
}

impl UnitScaling {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale.is_finite() && self.length_scale > 0.0)
            || !(self.time_scale.is_finite() && self.time_scale > 0.0)
        {
            return Err(Error::Invalid("unit scales must be positive".into()));
        }
        Ok(())
    }

    pub fn velocity(&self, v: f64) -> f64 {
        v * self.length_scale / self.time_scale
    }

    pub fn acceleration(&self, a: f64) -> f64 {
        a * self.length_scale / (self.time_scale * self.time_scale)
    }

    pub fn time(&self, t: f64) -> f64 {
        t * self.time_scale
    }
}

/// Aerodynamic drag plus rolling resistance plus grade force (N).
pub fn resistive_force(v: f64, body: &VehicleBodyParams) -> f64 {
    let weight = body.m * GRAVITY;
    0.5 * body.rho * body.area * body.c_d * v * v + body.c_r * weight + weight * body.theta.sin()
}

/// Mechanical motor power `(m a + F_res(v)) v` (W). Negative means the
/// motor is regenerating.
pub fn motor_power_from_dynamics(v: f64, a: f64, body: &VehicleBodyParams) -> f64 {
    (body.m * a + resistive_force(v, body)) * v
}

/// Per-cell electrical power for a given motor power.
///
/// Discharging draws `P / eta` from the pack; regeneration returns only
/// `eta P`. The pack power is shared evenly over `N_s N_p` cells.
pub fn cell_power_from_motor(p_motor: f64, params: &BatteryParams) -> f64 {
    let cells = params.cells();
    if p_motor > 0.0 {
        p_motor / (params.eta * cells)
    } else {
        params.eta * p_motor / cells
    }
}

/// Cell current delivering `p_output` watts at the terminals.
///
/// Solves `I (V_eff - R_s I) = P` with `V_eff = V_OCV - V1 - V2` and picks
/// the root of smaller magnitude. The root is computed in the cancellation
/// free form `2P / (V_eff + sqrt(V_eff^2 - 4 R_s P))`.
pub fn solve_cell_current(p_output: f64, state: &BatteryState, params: &BatteryParams) -> Result<f64> {
    if !p_output.is_finite() {
        return Err(Error::NonFinite {
            what: "cell power",
            value: p_output,
        });
    }
    let v_eff = terminal_voltage(state, 0.0, params);
    if v_eff <= 0.0 {
        return Err(Error::ConstraintBreach(format!(
            "effective open-circuit voltage {v_eff} V is not positive"
        )));
    }
    let disc = v_eff * v_eff - 4.0 * params.r_s * p_output;
    if disc < 0.0 {
        return Err(Error::PowerExceeded {
            demand: p_output,
            max_power: v_eff * v_eff / (4.0 * params.r_s),
        });
    }
    let current = 2.0 * p_output / (v_eff + disc.sqrt());
    // One Newton polish on f(I) = R_s I^2 - V_eff I + P.
    let f = params.r_s * current * current - v_eff * current + p_output;
    let df = 2.0 * params.r_s * current - v_eff;
    Ok(if df != 0.0 { current - f / df } else { current })
}
