//! Equilibria, linearisation in relative coordinates and perturbation
//! metrics along integrated trajectories.
//!
//! Relative coordinates for one follower behind a leader cruising at `v_bar`:
//! `z = x_l - x` (spacing) and `y = v_l - v` (relative velocity), so
//! `z' = y` and `y' = -a(z, v_bar - y)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{FollowerInput, FollowerModel};
use crate::ov::{optimal_velocity_inverse, optimal_velocity_slope};
use crate::params::ModelParams;

use super::trajectory::Trajectory;

/// Below this spacing the `beta / z^2` term is treated as singular.
const DEGENERATE_SPACING: f64 = 1e-9;

/// `(z_eq, y_eq)` for a leader cruising at `v_bar`.
pub fn equilibrium(v_bar: f64) -> Result<(f64, f64)> {
    Ok((optimal_velocity_inverse(v_bar)?, 0.0))
}

/// `(z', y')` of the relative system.
pub fn relative_field(params: &ModelParams, model: FollowerModel, v_bar: f64, z: f64, y: f64) -> Result<[f64; 2]> {
    let input = FollowerInput::new(z, v_bar, 0.0, v_bar - y);
    Ok([y, -model.accel(&input, params)?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub z_eq: f64,
    pub y_eq: f64,
    /// Row-major `[[dz'/dz, dz'/dy], [dy'/dz, dy'/dy]]`.
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
}

impl Linearization {
    pub fn trace(&self) -> f64 {
        self.jacobian[0][0] + self.jacobian[1][1]
    }

    pub fn determinant(&self) -> f64 {
        self.jacobian[0][0] * self.jacobian[1][1] - self.jacobian[0][1] * self.jacobian[1][0]
    }

    /// Both eigenvalues strictly in the open left half-plane.
    pub fn is_locally_stable(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.re < 0.0)
    }
}

/// Analytic Jacobian of the relative system at equilibrium.
///
/// The energy term `kappa v^2 y^2 / (y^2 + eps)` and its gradient vanish at
/// `y = 0`, so the result is the same for both follower models.
///
/// ```
/// use evplatoon::{params::ModelParams, sim::linearize_at_equilibrium, ov::TANH_2};
/// let lin = linearize_at_equilibrium(&ModelParams::default(), TANH_2).unwrap();
/// assert!((lin.z_eq - 2.0).abs() < 1e-12);
/// assert!((lin.trace() + 2.75).abs() < 1e-12);
/// assert!(lin.is_locally_stable());
/// ```
pub fn linearize_at_equilibrium(params: &ModelParams, v_bar: f64) -> Result<Linearization> {
    params.validate()?;
    let (z_eq, y_eq) = equilibrium(v_bar)?;
    if z_eq <= DEGENERATE_SPACING {
        return Err(Error::DegenerateEquilibrium(format!(
            "equilibrium spacing {z_eq} at v_bar = {v_bar} makes beta / z^2 singular"
        )));
    }
    let jacobian = [
        [0.0, 1.0],
        [
            -params.alpha * optimal_velocity_slope(z_eq)?,
            -params.alpha - params.beta / (z_eq * z_eq),
        ],
    ];
    let tr = jacobian[0][0] + jacobian[1][1];
    let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    Ok(Linearization {
        z_eq,
        y_eq,
        jacobian,
        eigenvalues: quadratic_roots(tr, det),
    })
}

/// Roots of `l^2 - tr l + det`.
fn quadratic_roots(tr: f64, det: f64) -> [Complex64; 2] {
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        // Stable form: avoid cancellation in the smaller-magnitude root.
        let q = 0.5 * (tr + tr.signum() * disc.sqrt());
        let (a, b) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, -im), Complex64::new(0.5 * tr, im)]
    }
}

/// Central-difference Jacobian of the nonlinear relative field.
pub fn finite_difference_jacobian(
    params: &ModelParams,
    model: FollowerModel,
    v_bar: f64,
    z: f64,
    y: f64,
    h: f64,
) -> Result<[[f64; 2]; 2]> {
    let f = |z, y| relative_field(params, model, v_bar, z, y);
    let (zp, zm) = (f(z + h, y)?, f(z - h, y)?);
    let (yp, ym) = (f(z, y + h)?, f(z, y - h)?);
    let mut j = [[0.0; 2]; 2];
    for r in 0..2 {
        j[r][0] = (zp[r] - zm[r]) / (2.0 * h);
        j[r][1] = (yp[r] - ym[r]) / (2.0 * h);
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    /// Peaks are taken over `t >= window_start`; `None` means the whole run.
    pub window_start: Option<f64>,
    pub convergence_tol: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            window_start: None,
            convergence_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub v_bar: f64,
    pub linearization: Linearization,
    /// Per follower, front to back: max `|z - z_eq|` in the window.
    pub peak_spacing_deviation: Vec<f64>,
    /// Per follower: max `|y|` in the window.
    pub peak_relative_velocity: Vec<f64>,
    /// `peak[n + 1] / peak[n]`; `None` where the front peak is zero.
    pub attenuation: Vec<Option<f64>>,
    /// Per follower: `max(|z - z_eq|, |y|)` at the last sample.
    pub terminal_deviation: Vec<f64>,
    /// Per follower: earliest sample time from which the deviation stays
    /// below tolerance until the end.
    pub convergence_time: Vec<Option<f64>>,
}

impl StabilityReport {
    /// Every attenuation ratio exists and is below one.
    pub fn attenuates(&self) -> bool {
        self.attenuation.iter().all(|r| matches!(r, Some(r) if *r < 1.0))
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.terminal_deviation.iter().all(|&d| d < tol)
    }

    /// When all followers have settled, if they do.
    pub fn platoon_convergence_time(&self) -> Option<f64> {
        self.convergence_time
            .iter()
            .try_fold(f64::NEG_INFINITY, |acc, t| t.map(|t| acc.max(t)))
    }
}

/// Perturbation metrics of `traj` around the equilibrium for `v_bar`.
pub fn stability_metrics(
    traj: &Trajectory,
    params: &ModelParams,
    v_bar: f64,
    opts: StabilityOptions,
) -> Result<StabilityReport> {
    let linearization = linearize_at_equilibrium(params, v_bar)?;
    let z_eq = linearization.z_eq;
    let start = opts.window_start.unwrap_or(f64::NEG_INFINITY);
    let window: Vec<usize> = (0..traj.len()).filter(|&k| traj.times[k] >= start).collect();
    if window.is_empty() {
        return Err(Error::Invalid(format!("no samples at or after t = {start}")));
    }
    let last = traj.len() - 1;
    let mut peak_z = Vec::new();
    let mut peak_y = Vec::new();
    let mut terminal = Vec::new();
    let mut conv = Vec::new();
    for n in 1..=traj.followers() {
        let dev_z = |k: usize| (traj.spacing(n, k) - z_eq).abs();
        let dev_y = |k: usize| traj.relative_velocity(n, k).abs();
        peak_z.push(window.iter().map(|&k| dev_z(k)).fold(0.0, f64::max));
        peak_y.push(window.iter().map(|&k| dev_y(k)).fold(0.0, f64::max));
        terminal.push(dev_z(last).max(dev_y(last)));
        conv.push(settle_time(traj, |k| dev_z(k).max(dev_y(k)) < opts.convergence_tol));
    }
    let attenuation = peak_z
        .windows(2)
        .map(|w| (w[0] > 0.0).then(|| w[1] / w[0]))
        .collect();
    Ok(StabilityReport {
        v_bar,
        linearization,
        peak_spacing_deviation: peak_z,
        peak_relative_velocity: peak_y,
        attenuation,
        terminal_deviation: terminal,
        convergence_time: conv,
    })
}

/// Earliest sample time after which `ok` holds at every remaining sample.
pub(crate) fn settle_time(traj: &Trajectory, ok: impl Fn(usize) -> bool) -> Option<f64> {
    let mut first = None;
    for k in (0..traj.len()).rev() {
        if !ok(k) {
            break;
        }
        first = Some(k);
    }
    first.map(|k| traj.times[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lead::LeadProfile;
    use crate::ov::{optimal_velocity, TANH_2};
    use crate::sim::{integrate_platoon, Scenario};
    use crate::state::{PlatoonState, VehicleState};
    use proptest::prelude::*;

    #[test]
    fn equilibrium_examples() {
        let (z, y) = equilibrium(TANH_2).unwrap();
        assert!((z - 2.0).abs() < 1e-12);
        assert_eq!(y, 0.0);
        let (z, _) = equilibrium(0.0).unwrap();
        assert!(z.abs() < 1e-12);
        assert!(equilibrium(2.5).is_err());
    }

    #[test]
    fn textbook_case() {
        let lin = linearize_at_equilibrium(&ModelParams::default(), TANH_2).unwrap();
        // V'(2) = 1.
        assert!((lin.jacobian[1][0] + 2.0).abs() < 1e-12);
        assert!((lin.trace() + 2.75).abs() < 1e-12);
        assert!((lin.determinant() - 2.0).abs() < 1e-12);
        assert!(lin.is_locally_stable());
        // Eigenvalues reproduce trace and determinant.
        let [a, b] = lin.eigenvalues;
        assert!(((a + b).re - lin.trace()).abs() < 1e-12);
        assert!(((a * b).re - lin.determinant()).abs() < 1e-12);
    }

    #[test]
    fn kappa_has_no_effect_on_jacobian() {
        for v_bar in [0.3, 1.0, TANH_2, 1.7] {
            let a = linearize_at_equilibrium(&ModelParams::default().with_kappa(0.0), v_bar).unwrap();
            let b = linearize_at_equilibrium(&ModelParams::default(), v_bar).unwrap();
            assert_eq!(a.jacobian, b.jacobian);
        }
    }

    #[test]
    fn zero_speed_is_degenerate() {
        assert!(matches!(
            linearize_at_equilibrium(&ModelParams::default(), 0.0),
            Err(Error::DegenerateEquilibrium(_))
        ));
    }

    #[test]
    fn matches_finite_differences() {
        let p = ModelParams::default();
        for v_bar in [0.2, 1.0, TANH_2, 1.7, 1.9] {
            let lin = linearize_at_equilibrium(&p, v_bar).unwrap();
            for model in [FollowerModel::Ovfl, FollowerModel::Proposed] {
                let fd = finite_difference_jacobian(&p, model, v_bar, lin.z_eq, 0.0, 1e-6).unwrap();
                for r in 0..2 {
                    for c in 0..2 {
                        let (a, n) = (lin.jacobian[r][c], fd[r][c]);
                        assert!((a - n).abs() <= 1e-6 * a.abs().max(1.0), "{model} v={v_bar} [{r}][{c}] {a} vs {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_step_bias_has_closed_form() {
        // With step h the kappa term contributes -2 kappa v h^2 / (h^2 + eps)
        // to the y-derivative estimate, which does not vanish as fast as the
        // usual O(h^2) truncation error when h ~ sqrt(eps).
        let p = ModelParams::default();
        let v_bar = 1.7;
        let h = 1e-5;
        let lin = linearize_at_equilibrium(&p, v_bar).unwrap();
        let fd = finite_difference_jacobian(&p, FollowerModel::Proposed, v_bar, lin.z_eq, 0.0, h).unwrap();
        let fd0 = finite_difference_jacobian(&p, FollowerModel::Ovfl, v_bar, lin.z_eq, 0.0, h).unwrap();
        // y' = -accel; the control term is -kappa v^2 y^2/(y^2+eps) in accel, with v = v_bar - y.
        let ctrl = |y: f64| p.kappa * (v_bar - y).powi(2) * y * y / (y * y + p.epsilon);
        let expected = (ctrl(h) - ctrl(-h)) / (2.0 * h);
        let closed = -2.0 * p.kappa * v_bar * h * h / (h * h + p.epsilon);
        assert!((expected - closed).abs() < 1e-12);
        assert!(((fd[1][1] - fd0[1][1]) - expected).abs() < 1e-9);
        assert!((fd[1][1] - lin.jacobian[1][1]).abs() > 1e-6);
    }

    #[test]
    fn quadratic_roots_cases() {
        let [a, b] = quadratic_roots(-3.0, 2.0);
        assert_eq!((a.re, b.re), (-2.0, -1.0));
        let [a, b] = quadratic_roots(-2.0, 2.0);
        assert_eq!((a, b), (Complex64::new(-1.0, -1.0), Complex64::new(-1.0, 1.0)));
        let [a, b] = quadratic_roots(0.0, 0.0);
        assert_eq!((a.re, b.re), (0.0, 0.0));
    }

    #[test]
    fn equilibrium_start_has_zero_peaks() {
        let v = 1.2;
        let z = optimal_velocity_inverse(v).unwrap();
        assert!((optimal_velocity(z).unwrap() - v).abs() < 1e-12);
        let init = PlatoonState::evenly_spaced(VehicleState::new(10.0, v), z, z, 3, v);
        let sc = Scenario::new(ModelParams::default(), FollowerModel::Proposed, LeadProfile::constant(0.0), init, 50.0)
            .with_dt(1e-2);
        let traj = integrate_platoon(&sc).unwrap();
        let rep = stability_metrics(&traj, &sc.params, v, StabilityOptions::default()).unwrap();
        for n in 0..3 {
            assert!(rep.peak_spacing_deviation[n] < 1e-12);
            assert!(rep.peak_relative_velocity[n] < 1e-12);
            assert_eq!(rep.convergence_time[n], Some(0.0));
        }
        assert_eq!(rep.platoon_convergence_time(), Some(0.0));
    }

    #[test]
    fn perturbation_decays_for_single_follower() {
        let init = PlatoonState::new(0.0, VehicleState::new(10.0, 1.0), vec![VehicleState::new(0.0, 0.5)]);
        let sc = Scenario::new(ModelParams::default(), FollowerModel::Proposed, LeadProfile::constant(0.0), init, 200.0)
            .with_dt(1e-2);
        let traj = integrate_platoon(&sc).unwrap();
        let rep = stability_metrics(&traj, &sc.params, 1.0, StabilityOptions::default()).unwrap();
        assert!(rep.converged(1e-3));
        let t = rep.convergence_time[0].unwrap();
        assert!(t > 0.0 && t < 200.0);
        // Window option only drops early samples.
        let late = stability_metrics(
            &traj,
            &sc.params,
            1.0,
            StabilityOptions {
                window_start: Some(t),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(late.peak_spacing_deviation[0] < 1e-3);
        assert!(late.peak_spacing_deviation[0] <= rep.peak_spacing_deviation[0]);
    }

    proptest! {
        #[test]
        fn locally_stable_across_speeds(v_bar in 0.05f64..1.95, alpha in 0.5f64..4.0, extra in 0.01f64..4.0) {
            let p = ModelParams { alpha, beta: alpha + extra, kappa: 0.0, ..ModelParams::default() };
            let lin = linearize_at_equilibrium(&p, v_bar).unwrap();
            prop_assert!(lin.trace() < 0.0);
            prop_assert!(lin.determinant() > 0.0);
            prop_assert!(lin.is_locally_stable());
        }
    }
}
