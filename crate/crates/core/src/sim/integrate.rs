use crate::battery::{
    cell_power_from_motor, motor_power_from_dynamics, solve_cell_current, step_battery, terminal_voltage,
    BatteryState,
};
use crate::battery::cell::raw_power_loss;
use crate::error::{Error, Result};
use crate::lead::{lead_accel, LeadProfile, Side};
use crate::models::{FollowerInput, FollowerModel, COLLISION_SPACING};
use crate::ode::{OdeSystem, Rk4};
use crate::params::ModelParams;

use super::scenario::{EventPolicy, Scenario};
use super::trajectory::{BatteryChannels, Event, EventKind, Trajectory, VehicleSeries};

/// Tolerance on velocity bounds before an event is raised.
const VELOCITY_SLACK: f64 = 1e-9;

/// The coupled platoon: state is `[x0, v0, x1, v1, ...]`, each follower
/// reacting only to its immediate predecessor.
pub(crate) struct PlatoonSystem<'a> {
    pub params: &'a ModelParams,
    pub models: &'a [FollowerModel],
    pub lead: &'a LeadProfile,
}

impl PlatoonSystem<'_> {
    pub fn follower_accel(&self, n: usize, y: &[f64], time: f64) -> Result<f64> {
        let input = FollowerInput::new(y[2 * n - 2], y[2 * n - 1], y[2 * n], y[2 * n + 1]);
        self.models[n - 1]
            .accel(&input, self.params)
            .map_err(|e| match e {
                Error::Collision { spacing, .. } => Error::Collision {
                    leader: n - 1,
                    follower: n,
                    spacing,
                    time,
                },
                e => e,
            })
    }
}

impl OdeSystem for PlatoonSystem<'_> {
    fn dim(&self) -> usize {
        2 * (self.models.len() + 1)
    }

    fn rhs(&self, t: f64, side: Side, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[1];
        dy[1] = self.lead.accel_from(t, side);
        for n in 1..=self.models.len() {
            dy[2 * n] = y[2 * n + 1];
            dy[2 * n + 1] = self.follower_accel(n, y, t)?;
        }
        Ok(())
    }
}

struct BatteryTrack {
    state: BatteryState,
    channels: BatteryChannels,
}

/// Integrate the platoon with fixed-step RK4 over the scenario horizon.
///
/// After every step: spacing at or below `1e-9` is a fatal collision; a lead
/// velocity outside `[0, v_max]` is fatal; follower velocities below zero or
/// above `v_max` are logged (negative velocity can be made fatal through
/// [`SimOptions`](super::SimOptions)). Velocities are never clamped.
///
/// With a battery block, each vehicle's `(v, a)` sample is mapped to SI, run
/// through the power chain to a cell current, and the cell is advanced with
/// that current held over the following step. The battery does not feed
/// back into the traffic dynamics.
pub fn integrate_platoon(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let sys = PlatoonSystem {
        params: &scenario.params,
        models: &scenario.models,
        lead: &scenario.lead,
    };
    let vehicles = scenario.followers() + 1;
    let mut y = Vec::with_capacity(2 * vehicles);
    for n in 0..vehicles {
        let s = scenario.initial.vehicle(n).unwrap();
        y.push(s.position);
        y.push(s.velocity);
    }

    let grid = scenario.time_grid();
    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        vehicles: (0..vehicles)
            .map(|_| VehicleSeries {
                position: Vec::with_capacity(grid.len()),
                velocity: Vec::with_capacity(grid.len()),
                accel: Vec::with_capacity(grid.len()),
                battery: None,
            })
            .collect(),
        models: scenario.models.clone(),
        events: Vec::new(),
    };
    let mut batteries: Option<Vec<BatteryTrack>> = scenario.battery.as_ref().map(|b| {
        (0..vehicles)
            .map(|_| BatteryTrack {
                state: b.initial,
                channels: BatteryChannels::default(),
            })
            .collect()
    });
    let mut active = vec![[false; 4]; vehicles];
    let mut rk = Rk4::new(sys.dim());

    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            let t_prev = grid[k - 1];
            rk.step(&sys, t_prev, t - t_prev, &mut y)?;
        }
        check_state(scenario, &y, t, &mut active, &mut traj.events)?;

        traj.times.push(t);
        for n in 0..vehicles {
            let a = if n == 0 {
                lead_accel(&scenario.lead, t)
            } else {
                sys.follower_accel(n, &y, t)?
            };
            let series = &mut traj.vehicles[n];
            series.position.push(y[2 * n]);
            series.velocity.push(y[2 * n + 1]);
            series.accel.push(a);
        }

        if let (Some(tracks), Some(block)) = (batteries.as_mut(), scenario.battery.as_ref()) {
            let dt_next = grid.get(k + 1).map(|&t1| block.scaling.time(t1 - t));
            for (n, track) in tracks.iter_mut().enumerate() {
                let v = traj.vehicles[n].velocity[k];
                let a = traj.vehicles[n].accel[k];
                let v_si = block.scaling.velocity(v.max(0.0));
                let a_si = block.scaling.acceleration(a);
                let p_cell = cell_power_from_motor(motor_power_from_dynamics(v_si, a_si, &block.body), &block.params);
                let current = solve_cell_current(p_cell, &track.state, &block.params)
                    .map_err(|e| e.labeled(format!("vehicle {n} battery at t = {t}")))?;
                let q = raw_power_loss(&track.state, current, &block.params);
                if q < -VELOCITY_SLACK {
                    log_onset(&mut active, &mut traj.events, n, EventKind::NegativeHeat, true, t, q);
                } else {
                    active[n][EventKind::NegativeHeat as usize] = false;
                }
                let soc_bad = !track.state.soc_in_range();
                if soc_bad && scenario.options.soc_breach == EventPolicy::Fatal {
                    return Err(Error::ConstraintBreach(format!(
                        "vehicle {n} SOC {} left [0, 1] at t = {t}",
                        track.state.soc
                    )));
                }
                log_onset(&mut active, &mut traj.events, n, EventKind::SocOutOfRange, soc_bad, t, track.state.soc);

                let ch = &mut track.channels;
                ch.current.push(current);
                ch.terminal_voltage.push(terminal_voltage(&track.state, current, &block.params));
                ch.soc.push(track.state.soc);
                ch.heat.push(q);
                ch.v1.push(track.state.v1);
                ch.v2.push(track.state.v2);
                if let Some(h) = dt_next {
                    track.state = step_battery(&track.state, current, h, &block.params)?;
                }
            }
        }
    }

    if let Some(tracks) = batteries {
        for (series, track) in traj.vehicles.iter_mut().zip(tracks) {
            series.battery = Some(track.channels);
        }
    }
    Ok(traj)
}

fn check_state(
    scenario: &Scenario,
    y: &[f64],
    t: f64,
    active: &mut [[bool; 4]],
    events: &mut Vec<Event>,
) -> Result<()> {
    let v_max = scenario.params.v_max;
    let v_lead = y[1];
    if !(v_lead >= -VELOCITY_SLACK && v_lead <= v_max + VELOCITY_SLACK) {
        return Err(Error::LeadVelocityOutOfRange {
            velocity: v_lead,
            v_max,
            time: t,
        });
    }
    for n in 1..active.len() {
        let spacing = y[2 * n - 2] - y[2 * n];
        if !(spacing > COLLISION_SPACING) {
            return Err(Error::Collision {
                leader: n - 1,
                follower: n,
                spacing,
                time: t,
            });
        }
        let v = y[2 * n + 1];
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "follower velocity",
                value: v,
            });
        }
        let negative = v < -VELOCITY_SLACK;
        if negative && scenario.options.negative_velocity == EventPolicy::Fatal {
            return Err(Error::NegativeVelocity {
                vehicle: n,
                velocity: v,
                time: t,
            });
        }
        log_onset(active, events, n, EventKind::NegativeVelocity, negative, t, v);
        log_onset(active, events, n, EventKind::OverSpeed, v > v_max + VELOCITY_SLACK, t, v);
    }
    Ok(())
}

fn log_onset(
    active: &mut [[bool; 4]],
    events: &mut Vec<Event>,
    vehicle: usize,
    kind: EventKind,
    now: bool,
    time: f64,
    value: f64,
) {
    let slot = &mut active[vehicle][kind as usize];
    if now && !*slot {
        events.push(Event {
            time,
            vehicle,
            kind,
            value,
        });
    }
    *slot = now;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::OcvCurve;
    use crate::ov::{optimal_velocity, optimal_velocity_inverse};
    use crate::sim::{BatteryBlock, SimOptions};
    use crate::state::{PlatoonState, VehicleState};
    use crate::battery::{BatteryParams, UnitScaling, VehicleBodyParams};

    fn pair(spacing: f64, v_lead: f64, v: f64, tf: f64) -> Scenario {
        Scenario::new(
            ModelParams::default(),
            FollowerModel::Proposed,
            LeadProfile::constant(0.0),
            PlatoonState::new(0.0, VehicleState::new(spacing, v_lead), vec![VehicleState::new(0.0, v)]),
            tf,
        )
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let v_l = 1.0;
        let z = optimal_velocity_inverse(v_l).unwrap();
        let v = optimal_velocity(z).unwrap();
        let mut sc = pair(z, v, v, 100.0);
        sc.initial.lead.velocity = v;
        sc.dt = 1e-2;
        let traj = integrate_platoon(&sc).unwrap();
        for k in 0..traj.len() {
            assert!((traj.spacing(1, k) - z).abs() < 1e-9);
            assert!(traj.relative_velocity(1, k).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic() {
        let sc = pair(2.0, 1.0, 0.2, 5.0);
        let a = integrate_platoon(&sc).unwrap();
        let b = integrate_platoon(&sc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_grid_hits_horizon() {
        let sc = pair(2.0, 1.0, 0.2, 1.0).with_dt(0.3);
        let g = sc.time_grid();
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let traj = integrate_platoon(&sc).unwrap();
        assert_eq!(traj.times.last(), Some(&1.0));
    }

    #[test]
    fn lead_out_of_range_is_fatal() {
        let mut sc = pair(5.0, 0.5, 0.5, 10.0);
        sc.lead = LeadProfile::constant(-0.2);
        match integrate_platoon(&sc) {
            Err(Error::LeadVelocityOutOfRange { time, .. }) => assert!((time - 2.5).abs() < 0.01),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_velocity_policy() {
        // Closing fast on a slow leader forces a hard brake.
        let mut sc = pair(0.1, 0.1, 1.9, 5.0);
        sc.params = sc.params.with_kappa(0.0);
        let traj = integrate_platoon(&sc).unwrap();
        let negatives = traj.events.iter().filter(|e| e.kind == EventKind::NegativeVelocity).count();
        if traj.min_follower_velocity() < -1e-9 {
            assert!(negatives > 0);
            sc.options = SimOptions {
                negative_velocity: EventPolicy::Fatal,
                ..SimOptions::default()
            };
            assert!(matches!(integrate_platoon(&sc), Err(Error::NegativeVelocity { .. })));
        } else {
            assert_eq!(negatives, 0);
        }
    }

    #[test]
    fn collision_is_reported_with_vehicles() {
        // The beta / s^2 term prevents contact at any sane step; a coarse
        // step overshoots it.
        let sc = pair(0.05, 0.0, 1.9, 5.0).with_dt(0.5);
        match integrate_platoon(&sc) {
            Err(Error::Collision { leader, follower, .. }) => assert_eq!((leader, follower), (0, 1)),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let mut sc = pair(2.0, 1.0, 0.5, 5.0);
        sc.dt = 0.0;
        assert!(integrate_platoon(&sc).is_err());
        let mut sc = pair(2.0, 1.0, 0.5, 5.0);
        sc.params.beta = 1.0;
        assert!(matches!(integrate_platoon(&sc), Err(Error::InvalidParams(_))));
        let mut sc = pair(2.0, 1.0, 0.5, 5.0);
        sc.params.kappa = 10.0;
        assert!(integrate_platoon(&sc).is_err());
        sc.options.allow_unstable_kappa = true;
        assert!(integrate_platoon(&sc).is_ok());
    }

    fn battery_scenario() -> Scenario {
        let mut sc = pair(10.0, 1.0, 0.5, 20.0);
        sc.dt = 1e-2;
        sc.battery = Some(BatteryBlock {
            params: BatteryParams::default(),
            body: VehicleBodyParams::default(),
            scaling: UnitScaling {
                length_scale: 10.0,
                time_scale: 10.0,
            },
            initial: BatteryState::rested(0.8),
        });
        sc
    }

    #[test]
    fn battery_channels_are_recorded() {
        let sc = battery_scenario();
        let traj = integrate_platoon(&sc).unwrap();
        let b = traj.vehicles[1].battery.as_ref().unwrap();
        assert_eq!(b.current.len(), traj.len());
        // Accelerating follower draws current.
        assert!(b.current[0] > 0.0);
        // Terminal voltage consistent with the recorded state.
        let p = &sc.battery.as_ref().unwrap().params;
        for k in (0..traj.len()).step_by(97) {
            let st = BatteryState::new(b.v1[k], b.v2[k], b.soc[k]);
            assert!((terminal_voltage(&st, b.current[k], p) - b.terminal_voltage[k]).abs() < 1e-12);
            assert!((b.current[k] * b.terminal_voltage[k] * p.cells() * if b.current[k] > 0.0 { p.eta } else { 1.0 / p.eta }
                - motor_power_from_dynamics(
                    sc.battery.as_ref().unwrap().scaling.velocity(traj.vehicles[1].velocity[k]),
                    sc.battery.as_ref().unwrap().scaling.acceleration(traj.vehicles[1].accel[k]),
                    &sc.battery.as_ref().unwrap().body,
                ))
            .abs()
                < 1e-6);
        }
    }

    #[test]
    fn soc_conservation() {
        // S(tf) - S(t0) = -∫ I dt / (3600 C_n) with I held over each step.
        let sc = battery_scenario();
        let traj = integrate_platoon(&sc).unwrap();
        let block = sc.battery.as_ref().unwrap();
        let b = traj.vehicles[1].battery.as_ref().unwrap();
        let last = traj.len() - 1;
        let charge: f64 = (0..last)
            .map(|k| b.current[k] * block.scaling.time(traj.times[k + 1] - traj.times[k]))
            .sum();
        let expected = -charge / (3600.0 * block.params.capacity_ah);
        assert!(((b.soc[last] - b.soc[0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn battery_overload_is_fatal() {
        let mut sc = battery_scenario();
        let block = sc.battery.as_mut().unwrap();
        block.scaling.time_scale = 0.1;
        block.params.ocv = OcvCurve::new(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let err = integrate_platoon(&sc).unwrap_err();
        assert!(matches!(err.root(), Error::PowerExceeded { .. }), "{err}");
    }
}
