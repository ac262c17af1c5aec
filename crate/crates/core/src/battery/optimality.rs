//! Exhaustive check that zero current minimises integrated heat generation.
//!
//! Every piecewise-constant current profile over a small grid is integrated
//! exactly (the RC branches relax exponentially within a step, so `∫Q dt`
//! has a closed form) and ranked.

use crate::error::{Error, Result};

use super::cell::raw_power_loss;
use super::{step_battery, BatteryParams, BatteryState};

/// Upper bound on enumerated profiles.
const MAX_PROFILES: usize = 1_000_000;
/// Interior samples per step when checking `Q >= 0`.
const BREACH_SAMPLES: usize = 64;
const LOSS_NOISE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOutcome {
    pub currents: Vec<f64>,
    /// `∫ Q dt` over the horizon (J).
    pub heat: f64,
    /// Why the profile was discarded, if it was.
    pub breach: Option<String>,
}

impl ProfileOutcome {
    pub fn is_feasible(&self) -> bool {
        self.breach.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.currents.iter().all(|&i| i == 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct OptimalityReport {
    /// Feasible profiles sorted by heat (ascending), then discarded ones.
    pub ranking: Vec<ProfileOutcome>,
    pub enumerated: usize,
    pub discarded: usize,
}

impl OptimalityReport {
    pub fn argmin(&self) -> &ProfileOutcome {
        &self.ranking[0]
    }

    fn zero(&self) -> &ProfileOutcome {
        self.ranking.iter().find(|p| p.is_zero()).expect("zero profile enumerated")
    }

    /// The all-zero profile attains the minimum over feasible profiles.
    pub fn zero_is_optimal(&self) -> bool {
        let z = self.zero();
        z.is_feasible() && self.argmin().heat >= z.heat
    }

    /// Every other profile, feasible or not, strictly exceeds the zero profile.
    pub fn zero_is_unique_minimiser(&self) -> bool {
        let z = self.zero().heat;
        self.zero_is_optimal() && self.ranking.iter().filter(|p| !p.is_zero()).all(|p| p.heat > z)
    }

    /// Every non-zero profile has strictly positive integrated heat.
    pub fn nonzero_heat_positive(&self) -> bool {
        self.ranking.iter().filter(|p| !p.is_zero()).all(|p| p.heat > 0.0)
    }

    /// Profiles contradicting optimality of zero current.
    pub fn counterexamples(&self) -> Vec<&ProfileOutcome> {
        let z = self.zero().heat;
        self.ranking
            .iter()
            .filter(|p| !p.is_zero() && (p.heat <= z || p.heat <= 0.0))
            .collect()
    }
}

/// Enumerate all `grid.len()^steps` piecewise-constant current profiles over
/// `horizon` seconds from `state0` and rank them by `∫ Q dt`.
///
/// Profiles that drive `Q` below zero or SOC out of `[0, 1]` are kept in the
/// report but marked as discarded.
pub fn verify_zero_current_optimality(
    horizon: f64,
    grid: &[f64],
    steps: usize,
    state0: BatteryState,
    params: &BatteryParams,
) -> Result<OptimalityReport> {
    params.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Invalid(format!("horizon must be positive, got {horizon}")));
    }
    if steps == 0 {
        return Err(Error::Invalid("need at least one step".into()));
    }
    if !grid.contains(&0.0) {
        return Err(Error::Invalid("current grid must include 0".into()));
    }
    if grid.iter().any(|i| !i.is_finite()) {
        return Err(Error::Invalid("current grid must be finite".into()));
    }
    let count = grid
        .len()
        .checked_pow(steps as u32)
        .filter(|&c| c <= MAX_PROFILES)
        .ok_or_else(|| Error::Invalid(format!("{}^{steps} profiles is too many to enumerate", grid.len())))?;

    let dt = horizon / steps as f64;
    let mut outcomes = Vec::with_capacity(count);
    let mut digits = vec![0usize; steps];
    for _ in 0..count {
        let currents: Vec<f64> = digits.iter().map(|&d| grid[d]).collect();
        outcomes.push(integrate_profile(&currents, dt, state0, params)?);
        // Odometer increment.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < grid.len() {
                break;
            }
            *d = 0;
        }
    }

    let discarded = outcomes.iter().filter(|o| !o.is_feasible()).count();
    outcomes.sort_by(|a, b| {
        b.is_feasible()
            .cmp(&a.is_feasible())
            .then(a.heat.total_cmp(&b.heat))
    });
    Ok(OptimalityReport {
        ranking: outcomes,
        enumerated: count,
        discarded,
    })
}

fn integrate_profile(
    currents: &[f64],
    dt: f64,
    state0: BatteryState,
    params: &BatteryParams,
) -> Result<ProfileOutcome> {
    let mut state = state0;
    let mut heat = 0.0;
    let mut breach = None;
    for (k, &i) in currents.iter().enumerate() {
        heat += step_heat(&state, i, dt, params);
        if breach.is_none() {
            for j in 0..=BREACH_SAMPLES {
                let tau = dt * j as f64 / BREACH_SAMPLES as f64;
                let s = if j == 0 { state } else { step_battery(&state, i, tau, params)? };
                let q = raw_power_loss(&s, i, params);
                if q < -LOSS_NOISE {
                    breach = Some(format!("Q = {q:e} W < 0 in step {k}"));
                    break;
                }
            }
        }
        state = step_battery(&state, i, dt, params)?;
        if breach.is_none() && !state.soc_in_range() {
            breach = Some(format!("SOC {} left [0, 1] after step {k}", state.soc));
        }
    }
    Ok(ProfileOutcome {
        currents: currents.to_vec(),
        heat,
        breach,
    })
}

/// Closed-form `∫_0^dt Q dt` for constant current `i`.
fn step_heat(state: &BatteryState, i: f64, dt: f64, params: &BatteryParams) -> f64 {
    // V(t) = R I + (V0 - R I) e^{-t/tau}  =>  ∫V = R I dt + (V0 - R I) tau (1 - e^{-dt/tau})
    let branch = |v0: f64, r: f64, tau: f64| {
        let v_inf = r * i;
        v_inf * dt + (v0 - v_inf) * tau * (-(-dt / tau).exp_m1())
    };
    let int_v = branch(state.v1, params.r_1, params.tau_1()) + branch(state.v2, params.r_2, params.tau_2());
    i * (int_v + params.r_s * i * dt)
}
