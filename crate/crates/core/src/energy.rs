//! Kinematic energy use per unit mass, with regeneration credited at the
//! drivetrain efficiency.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::models::FollowerModel;
use crate::parallel::map_ordered;
use crate::sim::{integrate_platoon, sig9, Scenario};

/// Leaky rectifier: `u / eta` while accelerating, `eta * u` while braking.
#[inline]
pub fn g_leaky(u: f64, eta: f64) -> f64 {
    if u >= 0.0 {
        u / eta
    } else {
        eta * u
    }
}

/// Power per unit mass drawn at velocity `v` and acceleration `v_dot`.
#[inline]
pub fn instantaneous_energy(v: f64, v_dot: f64, eta: f64) -> f64 {
    v * g_leaky(v_dot, eta)
}

/// Trapezoidal integral of [`instantaneous_energy`] over the samples.
///
/// ```
/// use evplatoon::energy::energy_per_unit_mass;
/// let t = [0.0, 5.0, 10.0];
/// let w = energy_per_unit_mass(&t, &[1.0; 3], &[1.0; 3], 0.8).unwrap();
/// assert!((w - 12.5).abs() < 1e-12);
/// ```
pub fn energy_per_unit_mass(times: &[f64], velocity: &[f64], v_dot: &[f64], eta: f64) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Invalid(format!(
            "energy integral needs at least 2 samples, got {}",
            times.len()
        )));
    }
    if velocity.len() != times.len() || v_dot.len() != times.len() {
        return Err(Error::Invalid("time, velocity and acceleration series differ in length".into()));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Invalid(format!("eta must lie in (0, 1], got {eta}")));
    }
    let mut prev = instantaneous_energy(velocity[0], v_dot[0], eta);
    let mut total = 0.0;
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        if !(h >= 0.0) {
            return Err(Error::Invalid(format!("times not sorted at sample {k}")));
        }
        let cur = instantaneous_energy(velocity[k], v_dot[k], eta);
        total += 0.5 * h * (prev + cur);
        prev = cur;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub model: String,
    pub eta: f64,
    pub window: (f64, f64),
    /// `(vehicle index, omega)` for every follower.
    pub per_vehicle: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub vehicle: usize,
    pub model: FollowerModel,
    pub omega: f64,
    /// Percent change against the baseline (first) model; 0 for the baseline.
    pub pct_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub reports: Vec<EnergyReport>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn omega(&self, vehicle: usize, model: FollowerModel) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.vehicle == vehicle && r.model == model)
            .map(|r| r.omega)
    }

    pub fn pct_change(&self, vehicle: usize, model: FollowerModel) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.vehicle == vehicle && r.model == model)
            .map(|r| r.pct_change)
    }

    /// Columns `vehicle,model,omega,pct_change`, vehicle-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "vehicle,model,omega,pct_change")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.vehicle, r.model, sig9(r.omega), sig9(r.pct_change))?;
        }
        Ok(())
    }
}

pub fn energy_report(scenario: &Scenario, model: FollowerModel) -> Result<EnergyReport> {
    let sc = scenario.with_model(model);
    let traj = integrate_platoon(&sc)?;
    let per_vehicle = traj
        .follower_omegas(sc.eta)?
        .into_iter()
        .enumerate()
        .map(|(i, w)| (i + 1, w))
        .collect();
    Ok(EnergyReport {
        model: model.label().to_string(),
        eta: sc.eta,
        window: (sc.t0, sc.tf),
        per_vehicle,
    })
}

/// Run every model on the same scenario (all followers on that model) and
/// tabulate omega with the percent change against `models[0]`.
///
/// Runs are spread over `jobs` threads; output order does not depend on it.
pub fn compare_models(scenario: &Scenario, models: &[FollowerModel], jobs: usize) -> Result<ComparisonTable> {
    if models.is_empty() {
        return Err(Error::Invalid("no models to compare".into()));
    }
    let reports = map_ordered(jobs, models, |&m| {
        energy_report(scenario, m).map_err(|e| e.labeled(m.label()))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let baseline = &reports[0].per_vehicle;
    let mut rows = Vec::new();
    for (i, &(vehicle, base)) in baseline.iter().enumerate() {
        for (model, report) in models.iter().zip(&reports) {
            let omega = report.per_vehicle[i].1;
            rows.push(ComparisonRow {
                vehicle,
                model: *model,
                omega,
                pct_change: (omega - base) / base * 100.0,
            });
        }
    }
    Ok(ComparisonTable { reports, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lead::LeadProfile;
    use crate::params::ModelParams;
    use crate::state::{PlatoonState, VehicleState};
    use proptest::prelude::*;

    #[test]
    fn leaky_examples() {
        assert_eq!(g_leaky(0.0, 0.8), 0.0);
        assert_eq!(g_leaky(1.0, 0.8), 1.25);
        assert_eq!(g_leaky(-1.0, 0.8), -0.8);
        assert_eq!(instantaneous_energy(0.0, 3.0, 0.8), 0.0);
        assert_eq!(instantaneous_energy(1.0, 1.0, 0.8), 1.25);
        assert!((instantaneous_energy(2.0, -0.5, 0.8) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn leaky_slopes() {
        let h = 1e-9;
        for eta in [0.5, 0.8, 1.0] {
            let right = g_leaky(h, eta) / h;
            let left = -g_leaky(-h, eta) / h;
            assert!((right / left - 1.0 / (eta * eta)).abs() < 1e-9);
            assert_eq!(g_leaky(0.0, eta), 0.0);
            assert!(g_leaky(-1e-300, eta).abs() < 1e-299);
        }
    }

    #[test]
    fn trapezoid_examples() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let ones = vec![1.0; t.len()];
        let zeros = vec![0.0; t.len()];
        assert_eq!(energy_per_unit_mass(&t, &ones, &zeros, 0.8).unwrap(), 0.0);
        let w = energy_per_unit_mass(&t, &ones, &ones, 0.8).unwrap();
        assert!((w - 12.5).abs() < 1e-12);
        // Non-uniform steps.
        let t = [0.0, 1.0, 3.0];
        let w = energy_per_unit_mass(&t, &[1.0; 3], &[1.0; 3], 1.0).unwrap();
        assert!((w - 3.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_errors() {
        assert!(energy_per_unit_mass(&[0.0], &[1.0], &[1.0], 0.8).is_err());
        assert!(energy_per_unit_mass(&[], &[], &[], 0.8).is_err());
        assert!(energy_per_unit_mass(&[1.0, 0.0], &[1.0; 2], &[1.0; 2], 0.8).is_err());
        assert!(energy_per_unit_mass(&[0.0, 1.0], &[1.0; 2], &[1.0; 2], 0.0).is_err());
    }

    #[test]
    fn quadrature_is_second_order() {
        // Acceleration stays positive on [0, 0.5], away from the kink of g.
        let eta = 0.8;
        let omega = |n: usize| {
            let t: Vec<f64> = (0..=n).map(|k| 0.5 * k as f64 / n as f64).collect();
            let v: Vec<f64> = t.iter().map(|t| (t * 3.0).sin() + 1.0).collect();
            let a: Vec<f64> = t.iter().map(|t| 3.0 * (t * 3.0).cos()).collect();
            energy_per_unit_mass(&t, &v, &a, eta).unwrap()
        };
        let (w1, w2, w3) = (omega(100), omega(200), omega(400));
        let ratio = (w1 - w2).abs() / (w2 - w3).abs();
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    fn pair_scenario(kappa: f64) -> Scenario {
        Scenario::new(
            ModelParams::default().with_kappa(kappa),
            FollowerModel::Proposed,
            LeadProfile::Fluctuating,
            PlatoonState::evenly_spaced(VehicleState::new(3.0, 1.7), 3.0, 3.5, 2, 1.7),
            30.0,
        )
        .with_dt(1e-2)
    }

    #[test]
    fn kappa_zero_models_coincide() {
        let t = compare_models(&pair_scenario(0.0), &[FollowerModel::Ovfl, FollowerModel::Proposed], 2).unwrap();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            assert_eq!(r.pct_change, 0.0);
        }
        assert_eq!(t.omega(1, FollowerModel::Ovfl), t.omega(1, FollowerModel::Proposed));
    }

    #[test]
    fn baseline_is_first_model() {
        let sc = pair_scenario(0.03);
        let t = compare_models(&sc, &[FollowerModel::Ovfl, FollowerModel::Proposed], 1).unwrap();
        let o = t.omega(2, FollowerModel::Ovfl).unwrap();
        let p = t.omega(2, FollowerModel::Proposed).unwrap();
        assert_eq!(t.pct_change(2, FollowerModel::Ovfl), Some(0.0));
        assert!((t.pct_change(2, FollowerModel::Proposed).unwrap() - (p - o) / o * 100.0).abs() < 1e-12);
        // Thread count never changes the result.
        assert_eq!(compare_models(&sc, &[FollowerModel::Ovfl, FollowerModel::Proposed], 4).unwrap(), t);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.starts_with("vehicle,model,omega,pct_change\n1,ovfl,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn errors_are_labeled_with_model() {
        let mut sc = pair_scenario(0.03);
        sc.dt = -1.0;
        let err = compare_models(&sc, &[FollowerModel::Proposed], 1).unwrap_err();
        assert!(err.to_string().starts_with("proposed"), "{err}");
    }

    proptest! {
        #[test]
        fn leaky_is_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, eta in 0.05f64..=1.0) {
            if a <= b {
                prop_assert!(g_leaky(a, eta) <= g_leaky(b, eta));
            }
        }

        #[test]
        fn leaky_never_below_identity_times_eta(u in -10.0f64..10.0, eta in 0.05f64..=1.0) {
            // Energy charged is never less than the lossless value u.
            prop_assert!(g_leaky(u, eta) >= u - 1e-12);
        }
    }
}
