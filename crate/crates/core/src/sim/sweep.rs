use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::models::FollowerModel;
use crate::parallel::map_ordered;

use super::integrate::integrate_platoon;
use super::scenario::Scenario;
use super::stability::{equilibrium, settle_time};
use super::trajectory::{sig9, Trajectory};

/// A follower is stalled when its velocity stays below `fraction` of the
/// lead's for at least `min_duration` once the lead has stopped
/// manoeuvring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StallCriterion {
    pub fraction: f64,
    pub min_duration: f64,
}

impl Default for StallCriterion {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            min_duration: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub jobs: usize,
    pub convergence_tol: f64,
    pub stall: StallCriterion,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            convergence_tol: 1e-3,
            stall: StallCriterion::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kappa: f64,
    pub vehicle: usize,
    pub omega: f64,
    pub convergence_time: Option<f64>,
    pub stall: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub kappa: f64,
    /// Per-follower rows, or the error that stopped this run.
    pub outcome: std::result::Result<Vec<SweepRow>, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub runs: Vec<SweepRun>,
}

impl SweepTable {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok()).flatten()
    }

    pub fn errors(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().err().map(|e| (r.kappa, e)))
    }

    pub fn row(&self, kappa: f64, vehicle: usize) -> Option<&SweepRow> {
        self.rows().find(|r| r.kappa == kappa && r.vehicle == vehicle)
    }

    /// Columns `kappa,vehicle,omega,convergence_time,stall`. A run that
    /// failed contributes one row with only `kappa` filled in.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "kappa,vehicle,omega,convergence_time,stall")?;
        for run in &self.runs {
            match &run.outcome {
                Ok(rows) => {
                    for r in rows {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            sig9(r.kappa),
                            r.vehicle,
                            sig9(r.omega),
                            r.convergence_time.map(sig9).unwrap_or_default(),
                            r.stall
                        )?;
                    }
                }
                Err(_) => writeln!(w, "{},,,,", sig9(run.kappa))?,
            }
        }
        Ok(())
    }
}

/// Run the scenario with every follower on the proposed model for each
/// `kappa`, recording omega, settling time and stall per follower.
///
/// The `kappa < min(alpha, beta)` rule is lifted so the unstable regime can
/// be probed. Failed runs are kept in the table rather than aborting the
/// sweep.
pub fn sweep_kappa(base: &Scenario, kappas: &[f64], opts: SweepOptions) -> Result<SweepTable> {
    if kappas.is_empty() {
        return Err(Error::Invalid("kappa list is empty".into()));
    }
    if let Some(k) = kappas.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
        return Err(Error::Invalid(format!("kappa values must be finite and >= 0, got {k}")));
    }
    let runs = map_ordered(opts.jobs, kappas, |&kappa| SweepRun {
        kappa,
        outcome: sweep_one(base, kappa, &opts).map_err(|e| e.labeled(format!("kappa = {kappa}"))),
    })?;
    Ok(SweepTable { runs })
}

fn sweep_one(base: &Scenario, kappa: f64, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let mut sc = base.with_model(FollowerModel::Proposed).with_kappa(kappa);
    sc.options.allow_unstable_kappa = true;
    let traj = integrate_platoon(&sc)?;
    let v_bar = *traj.vehicles[0].velocity.last().unwrap();
    let (z_eq, _) = equilibrium(v_bar)?;
    let after = sc.lead.active_until().unwrap_or(sc.t0).max(sc.t0);
    (1..=traj.followers())
        .map(|n| {
            Ok(SweepRow {
                kappa,
                vehicle: n,
                omega: traj.omega(n, sc.eta)?,
                convergence_time: settle_time(&traj, |k| {
                    (traj.spacing(n, k) - z_eq).abs().max(traj.relative_velocity(n, k).abs()) < opts.convergence_tol
                }),
                stall: is_stalled(&traj, n, after, opts.stall),
            })
        })
        .collect()
}

/// Longest run of `v_n < fraction * v_lead` at or after `after` reaches
/// `min_duration`.
pub fn is_stalled(traj: &Trajectory, n: usize, after: f64, crit: StallCriterion) -> bool {
    let v = &traj.vehicles[n].velocity;
    let lead = &traj.vehicles[0].velocity;
    let mut since: Option<f64> = None;
    for k in 0..traj.len() {
        let t = traj.times[k];
        if t < after {
            continue;
        }
        if v[k] < crit.fraction * lead[k] {
            let t0 = *since.get_or_insert(t);
            if t - t0 >= crit.min_duration {
                return true;
            }
        } else {
            since = None;
        }
    }
    false
}
