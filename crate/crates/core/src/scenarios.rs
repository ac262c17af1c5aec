//! Built-in scenarios.
//!
//! All use `alpha = 2`, `beta = 3`, `kappa = 0.03`, `epsilon = 1e-6` and the
//! proposed follower model.

use crate::error::{Error, Result};
use crate::lead::LeadProfile;
use crate::models::FollowerModel;
use crate::params::ModelParams;
use crate::sim::Scenario;
use crate::state::{PlatoonState, VehicleState};

pub const BUILTIN_NAMES: [&str; 3] = ["fig1a", "fig1b", "table1"];

/// Lead cruising speed in the platoon scenario.
pub const TABLE1_LEAD_SPEED: f64 = 1.7;
/// Followers start this much faster than the lead.
pub const TABLE1_SPEED_FACTOR: f64 = 1.1;
pub const TABLE1_FIRST_SPACING: f64 = 0.3;
pub const TABLE1_SPACING: f64 = 3.5;
pub const TABLE1_FOLLOWERS: usize = 5;
pub const TABLE1_HORIZON: f64 = 70.0;

/// A fast follower closing on a slow leader at short range.
pub fn fig1a() -> Scenario {
    single_follower(VehicleState::new(0.1, 0.1), VehicleState::new(0.0, 1.9))
}

/// A slow follower far behind its leader.
pub fn fig1b() -> Scenario {
    single_follower(VehicleState::new(10.0, 1.0), VehicleState::new(0.0, 0.5))
}

fn single_follower(lead: VehicleState, follower: VehicleState) -> Scenario {
    Scenario::new(
        ModelParams::default(),
        FollowerModel::Proposed,
        LeadProfile::constant(0.0),
        PlatoonState::new(0.0, lead, vec![follower]),
        700.0,
    )
}

/// Six-vehicle platoon behind a lead that fluctuates for 20 time units.
pub fn table1() -> Scenario {
    let initial = PlatoonState::evenly_spaced(
        VehicleState::new(0.0, TABLE1_LEAD_SPEED),
        TABLE1_FIRST_SPACING,
        TABLE1_SPACING,
        TABLE1_FOLLOWERS,
        TABLE1_SPEED_FACTOR * TABLE1_LEAD_SPEED,
    );
    Scenario::new(
        ModelParams::default(),
        FollowerModel::Proposed,
        LeadProfile::Fluctuating,
        initial,
        TABLE1_HORIZON,
    )
}

pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "fig1a" => Ok(fig1a()),
        "fig1b" => Ok(fig1b()),
        "table1" => Ok(table1()),
        _ => Err(Error::Invalid(format!(
            "unknown built-in scenario '{name}' (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
