use crate::error::{Error, Result};

use super::{BatteryParams, BatteryState};

/// Float noise below this magnitude is clamped to zero heat.
const LOSS_NOISE: f64 = 1e-9;

/// `V_T = V_OCV(S) - V1 - V2 - I R_s`.
pub fn terminal_voltage(state: &BatteryState, current: f64, params: &BatteryParams) -> f64 {
    params.ocv.voltage(state.soc) - state.v1 - state.v2 - current * params.r_s
}

/// `dV_i/dt = -V_i / (R_i C_i) + I / C_i` for both RC branches.
pub fn rc_derivatives(state: &BatteryState, current: f64, params: &BatteryParams) -> (f64, f64) {
    (
        -state.v1 / params.tau_1() + current / params.c_1,
        -state.v2 / params.tau_2() + current / params.c_2,
    )
}

/// `dS/dt = -I / (3600 C_n)`.
pub fn soc_derivative(current: f64, params: &BatteryParams) -> f64 {
    -current / (3600.0 * params.capacity_ah)
}

/// Heat generation, with tiny negative float noise clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLoss(pub f64);

/// `Q = I (V1 + V2 + R_s I)`.
///
/// Values in `[-1e-9, 0)` are rounding noise and are returned as zero;
/// anything more negative is reported as [`Error::ConstraintBreach`].
pub fn power_loss(state: &BatteryState, current: f64, params: &BatteryParams) -> Result<PowerLoss> {
    let q = raw_power_loss(state, current, params);
    if q >= 0.0 {
        Ok(PowerLoss(q))
    } else if q >= -LOSS_NOISE {
        Ok(PowerLoss(0.0))
    } else {
        Err(Error::ConstraintBreach(format!(
            "heat generation Q = {q:e} W is negative (I = {current}, V1 = {}, V2 = {})",
            state.v1, state.v2
        )))
    }
}

pub(crate) fn raw_power_loss(state: &BatteryState, current: f64, params: &BatteryParams) -> f64 {
    current * (state.v1 + state.v2 + params.r_s * current)
}

/// Advance the cell by `dt` seconds under constant `current`.
///
/// The RC branches use the exact solution of their linear ODE, so the step
/// is exact for piecewise-constant current regardless of `dt`. The returned
/// state may have SOC outside `[0, 1]`; callers decide whether that is fatal.
pub fn step_battery(
    state: &BatteryState,
    current: f64,
    dt: f64,
    params: &BatteryParams,
) -> Result<BatteryState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid(format!("battery step dt must be positive, got {dt}")));
    }
    let relax = |v: f64, r: f64, tau: f64| {
        let decay = (-dt / tau).exp();
        v * decay + r * current * (1.0 - decay)
    };
    Ok(BatteryState {
        v1: relax(state.v1, params.r_1, params.tau_1()),
        v2: relax(state.v2, params.r_2, params.tau_2()),
        soc: state.soc + soc_derivative(current, params) * dt,
    })
}
