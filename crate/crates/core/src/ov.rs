//! The optimal velocity function `V(u) = tanh(u - 2) + tanh(2)` and its inverse.
//!
//! `V` is smooth, strictly increasing and bounded; its range is the open
//! interval `(tanh(2) - 1, tanh(2) + 1)`.

use crate::error::{ensure_finite, Error, Result};

/// `tanh(2)`, the offset that makes `V(0) = 0`.
pub const TANH_2: f64 = 0.964_027_580_075_816_9;

/// Infimum of the range of [`optimal_velocity`].
pub const V_INF: f64 = TANH_2 - 1.0;

/// Supremum of the range of [`optimal_velocity`]; also the default speed cap.
pub const V_SUP: f64 = TANH_2 + 1.0;

/// Target speed for headway `u`.
pub fn optimal_velocity(u: f64) -> Result<f64> {
    ensure_finite("headway", u)?;
    Ok(ov_unchecked(u))
}

#[inline]
pub(crate) fn ov_unchecked(u: f64) -> f64 {
    (u - 2.0).tanh() + TANH_2
}

/// `V'(u) = sech^2(u - 2)`.
pub fn optimal_velocity_slope(u: f64) -> Result<f64> {
    ensure_finite("headway", u)?;
    let c = (u - 2.0).cosh();
    Ok(1.0 / (c * c))
}

/// Headway whose optimal velocity is `v_bar`.
///
/// Only defined on the open range of `V`; values on or outside the bounds
/// give [`Error::OutOfDomain`].
pub fn optimal_velocity_inverse(v_bar: f64) -> Result<f64> {
    ensure_finite("v_bar", v_bar)?;
    if !(v_bar > V_INF && v_bar < V_SUP) {
        return Err(Error::OutOfDomain {
            what: "v_bar",
            value: v_bar,
            lower: V_INF,
            upper: V_SUP,
        });
    }
    Ok(2.0 + (v_bar - TANH_2).atanh())
}
