//! Executable property checks: zero-current heat optimality, the energy
//! ordering between the proposed and baseline followers on random
//! scenarios, and the analytic linearisation against finite differences.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::battery::{verify_zero_current_optimality, BatteryParams, BatteryState};
use crate::error::Result;
use crate::lead::LeadProfile;
use crate::models::FollowerModel;
use crate::parallel::map_ordered;
use crate::params::ModelParams;
use crate::sim::{finite_difference_jacobian, integrate_platoon, linearize_at_equilibrium, Scenario};
use crate::state::{PlatoonState, VehicleState};

pub const DEFAULT_SEED: u64 = 20240605;
pub const DEFAULT_TRIALS: usize = 100;

/// Slack allowed on `omega_proposed <= omega_ovfl`.
pub const ORDERING_SLACK: f64 = 1e-9;
/// Central-difference step for the Jacobian check.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;
pub const JACOBIAN_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub counterexamples: Vec<String>,
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.summary
        )
    }
}

/// Brute force over piecewise-constant current profiles on `{-2..2}` A,
/// four 10 s steps, from a rested cell at half charge.
pub fn check_zero_current_optimality() -> Result<PropertyOutcome> {
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let report = verify_zero_current_optimality(40.0, &grid, 4, BatteryState::rested(0.5), &BatteryParams::default())?;
    let passed = report.zero_is_unique_minimiser() && report.nonzero_heat_positive();
    let runner_up = report
        .ranking
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| p.heat)
        .fold(f64::INFINITY, f64::min);
    Ok(PropertyOutcome {
        name: "zero-current-optimality",
        passed,
        summary: format!(
            "{} profiles ({} with Q < 0 somewhere), argmin {:?} with heat {:e} J, smallest non-zero heat {:e} J",
            report.enumerated,
            report.discarded,
            report.argmin().currents,
            report.argmin().heat,
            runner_up
        ),
        counterexamples: report
            .counterexamples()
            .iter()
            .map(|p| format!("currents {:?} heat {:e} J", p.currents, p.heat))
            .collect(),
    })
}

/// One randomly drawn single-follower case.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCase {
    pub trial: usize,
    pub scenario: Scenario,
}

/// Draw `trials` single-follower scenarios: spacing in `[0.5, 10]`,
/// velocities in `[0, v_max]`, and a lead that holds a random acceleration
/// on each 2-unit slot of `[0, 20)` (clamped so its velocity stays inside
/// `[0, v_max]`), then cruises. Horizon 70, step `1e-3`.
pub fn ordering_cases(seed: u64, trials: usize) -> Vec<OrderingCase> {
    let params = ModelParams::default();
    let v_max = params.v_max;
    let margin = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|trial| {
            let spacing = rng.gen_range(0.5..=10.0);
            let v = rng.gen_range(0.0..=v_max);
            let v_lead = rng.gen_range(margin..=v_max - margin);
            let slot = 2.0;
            let mut vl = v_lead;
            let mut breakpoints = Vec::new();
            for k in 0..10 {
                let lo = (margin - vl) / slot;
                let hi = (v_max - margin - vl) / slot;
                let a = rng.gen_range(-0.5f64..=0.5).clamp(lo, hi);
                vl += a * slot;
                breakpoints.push((k as f64 * slot, a));
            }
            breakpoints.push((20.0, 0.0));
            let initial = PlatoonState::new(0.0, VehicleState::new(spacing, v_lead), vec![VehicleState::new(0.0, v)]);
            let scenario = Scenario::new(
                params,
                FollowerModel::Proposed,
                LeadProfile::Table { breakpoints },
                initial,
                70.0,
            );
            OrderingCase { trial, scenario }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingResult {
    pub trial: usize,
    /// `(omega_proposed, omega_ovfl)`, or why the pair could not be run.
    pub omegas: std::result::Result<(f64, f64), String>,
}

impl OrderingResult {
    pub fn holds(&self) -> bool {
        matches!(self.omegas, Ok((p, o)) if p <= o + ORDERING_SLACK)
    }
}

pub fn run_ordering_case(case: &OrderingCase) -> OrderingResult {
    let run = |m: FollowerModel| -> Result<f64> {
        let sc = case.scenario.with_model(m);
        integrate_platoon(&sc)?.omega(1, sc.eta)
    };
    let omegas = run(FollowerModel::Proposed)
        .and_then(|p| Ok((p, run(FollowerModel::Ovfl)?)))
        .map_err(|e| e.to_string());
    OrderingResult {
        trial: case.trial,
        omegas,
    }
}

/// The proposed follower never spends more than the baseline one.
pub fn check_energy_ordering(seed: u64, trials: usize, jobs: usize) -> Result<PropertyOutcome> {
    let cases = ordering_cases(seed, trials);
    let results = map_ordered(jobs, &cases, run_ordering_case)?;
    let failures: Vec<(&OrderingCase, &OrderingResult)> =
        cases.iter().zip(&results).filter(|(_, r)| !r.holds()).collect();
    let worst = results
        .iter()
        .filter_map(|r| r.omegas.as_ref().ok().map(|(p, o)| p - o))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PropertyOutcome {
        name: "energy-ordering",
        passed: failures.is_empty(),
        summary: format!(
            "{}/{} trials hold (seed {seed}), max omega_proposed - omega_ovfl = {worst:e}",
            trials - failures.len(),
            trials
        ),
        counterexamples: failures
            .iter()
            .map(|(c, r)| {
                let s = &c.scenario;
                let what = match &r.omegas {
                    Ok((p, o)) => format!("omega_proposed {p:.9} > omega_ovfl {o:.9} (excess {:e})", p - o),
                    Err(e) => format!("run failed: {e}"),
                };
                format!(
                    "trial {}: spacing {:.6}, v {:.6}, v_lead {:.6}, lead {:?}: {what}",
                    c.trial,
                    s.initial.spacing(1),
                    s.initial.followers[0].velocity,
                    s.initial.lead.velocity,
                    s.lead
                )
            })
            .collect(),
    })
}

/// Analytic linearisation against central differences of the nonlinear
/// field at several cruising speeds, for both models, plus equality of the
/// Jacobians with and without the energy term.
pub fn check_jacobian() -> Result<PropertyOutcome> {
    let params = ModelParams::default();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let speeds = [0.2, 0.5, 1.0, crate::ov::TANH_2, 1.5, 1.7, 1.9];
    for &v_bar in &speeds {
        let lin = linearize_at_equilibrium(&params, v_bar)?;
        let lin0 = linearize_at_equilibrium(&params.with_kappa(0.0), v_bar)?;
        if lin.jacobian != lin0.jacobian {
            bad.push(format!("v_bar {v_bar}: kappa changes the Jacobian"));
        }
        for model in [FollowerModel::Proposed, FollowerModel::Ovfl] {
            let fd = finite_difference_jacobian(&params, model, v_bar, lin.z_eq, 0.0, JACOBIAN_FD_STEP)?;
            for r in 0..2 {
                for c in 0..2 {
                    let (a, n) = (lin.jacobian[r][c], fd[r][c]);
                    let rel = (a - n).abs() / a.abs().max(1.0);
                    worst = worst.max(rel);
                    if rel > JACOBIAN_REL_TOL {
                        bad.push(format!("v_bar {v_bar} {model} [{r}][{c}]: analytic {a} vs fd {n}"));
                    }
                }
            }
        }
    }
    Ok(PropertyOutcome {
        name: "jacobian",
        passed: bad.is_empty(),
        summary: format!(
            "{} speeds x 2 models, worst relative gap {worst:e} (step {JACOBIAN_FD_STEP:e})",
            speeds.len()
        ),
        counterexamples: bad,
    })
}

pub fn run_all(seed: u64, trials: usize, jobs: usize) -> Result<Vec<PropertyOutcome>> {
    Ok(vec![
        check_zero_current_optimality()?,
        check_energy_ordering(seed, trials, jobs)?,
        check_jacobian()?,
    ])
}
