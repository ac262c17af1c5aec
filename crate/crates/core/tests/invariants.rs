use evplatoon::energy::compare_models;
use evplatoon::models::{ovfl_accel, proposed_accel, FollowerInput};
use evplatoon::ov::{optimal_velocity, optimal_velocity_inverse};
use evplatoon::sim::{integrate_platoon, sweep_kappa, SweepOptions};
use evplatoon::verify::{check_energy_ordering, ordering_cases};
use evplatoon::{scenarios, FollowerModel, LeadProfile, ModelParams, PlatoonState, Scenario, VehicleState};

#[test]
fn platoon_run_has_no_collision_or_negative_velocity() {
    for model in [FollowerModel::Proposed, FollowerModel::Ovfl] {
        let traj = integrate_platoon(&scenarios::table1().with_model(model)).unwrap();
        assert!(traj.events.is_empty(), "{model}: {:?}", traj.events);
        assert!(traj.min_spacing() > 0.0);
        assert!(traj.min_follower_velocity() >= 0.0);
    }
}

#[test]
fn proposed_never_accelerates_harder_along_its_run() {
    let sc = scenarios::table1();
    let traj = integrate_platoon(&sc).unwrap();
    for k in 0..traj.len() {
        for n in 1..=traj.followers() {
            let input = FollowerInput::new(
                traj.vehicles[n - 1].position[k],
                traj.vehicles[n - 1].velocity[k],
                traj.vehicles[n].position[k],
                traj.vehicles[n].velocity[k],
            );
            assert!(proposed_accel(&input, &sc.params).unwrap() <= ovfl_accel(&input, &sc.params).unwrap());
        }
    }
}

#[test]
fn proposed_never_faster_than_ovfl_from_same_start() {
    let sc = scenarios::table1();
    let p = integrate_platoon(&sc.with_model(FollowerModel::Proposed)).unwrap();
    let o = integrate_platoon(&sc.with_model(FollowerModel::Ovfl)).unwrap();
    let excess: Vec<(f64, f64)> = (1..=p.followers())
        .map(|n| {
            (0..p.len())
                .map(|k| (p.vehicles[n].velocity[k] - o.vehicles[n].velocity[k], p.times[k]))
                .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    assert!(
        excess.iter().all(|e| e.0 <= 1e-9),
        "max v_proposed - v_ovfl (and when) per vehicle: {excess:?}"
    );
}

#[test]
fn equilibrium_is_held_for_100_time_units() {
    let v = 1.3;
    let z = optimal_velocity_inverse(v).unwrap();
    let v = optimal_velocity(z).unwrap();
    let init = PlatoonState::new(0.0, VehicleState::new(z, v), vec![VehicleState::new(0.0, v)]);
    let sc = Scenario::new(ModelParams::default(), FollowerModel::Proposed, LeadProfile::constant(0.0), init, 100.0);
    let traj = integrate_platoon(&sc).unwrap();
    for k in 0..traj.len() {
        assert!((traj.spacing(1, k) - z).abs() < 1e-9);
        assert!(traj.relative_velocity(1, k).abs() < 1e-9);
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let sc = scenarios::table1();
    assert_eq!(integrate_platoon(&sc).unwrap(), integrate_platoon(&sc).unwrap());
    assert_eq!(ordering_cases(9, 10), ordering_cases(9, 10));
    let a = check_energy_ordering(9, 4, 1).unwrap();
    let b = check_energy_ordering(9, 4, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn energy_converges_at_second_order_in_dt() {
    // Halving dt three times; successive changes should shrink about 4x.
    let sc = scenarios::table1().with_model(FollowerModel::Ovfl);
    let omega = |dt: f64| integrate_platoon(&sc.with_dt(dt)).unwrap().omega(1, sc.eta).unwrap();
    let w: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| omega(dt)).collect();
    let (d1, d2) = ((w[0] - w[1]).abs(), (w[1] - w[2]).abs());
    assert!(d1 < 4.0 * d2 * 1.25 && d1 > 4.0 * d2 * 0.75, "changes {d1:e} then {d2:e}");
}

#[test]
fn energy_does_not_grow_with_small_kappa() {
    let table = sweep_kappa(&scenarios::table1(), &[0.0, 0.01, 0.03, 0.1], SweepOptions::default()).unwrap();
    let per_vehicle: Vec<Vec<f64>> = (1..=5)
        .map(|n| [0.0, 0.01, 0.03, 0.1].iter().map(|&k| table.row(k, n).unwrap().omega).collect())
        .collect();
    let bad: Vec<usize> = (0..5)
        .filter(|&i| !per_vehicle[i].windows(2).all(|p| p[1] <= p[0]))
        .map(|i| i + 1)
        .collect();
    assert!(bad.is_empty(), "vehicles {bad:?} not monotone: {per_vehicle:?}");
}

#[test]
fn kappa_zero_compare_is_flat() {
    let sc = scenarios::table1().with_kappa(0.0);
    let t = compare_models(&sc, &[FollowerModel::Ovfl, FollowerModel::Proposed], 0).unwrap();
    assert!(t.rows.iter().all(|r| r.pct_change == 0.0));
}

#[test]
fn slow_convergence_with_larger_kappa() {
    let mut sc = scenarios::table1();
    sc.tf = 300.0;
    sc.dt = 5e-3;
    let table = sweep_kappa(&sc, &[0.0, 0.03, 0.3], SweepOptions::default()).unwrap();
    let t = |k: f64| table.row(k, 1).unwrap().convergence_time.unwrap_or(f64::INFINITY);
    assert!(t(0.0) <= t(0.03) && t(0.03) <= t(0.3), "{} {} {}", t(0.0), t(0.03), t(0.3));
    assert!(t(0.0).is_finite());
}
