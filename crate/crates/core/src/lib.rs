//! Car-following simulation for electric-vehicle platoons: an optimal
//! velocity follow-the-leader model with an energy-saving braking term, a
//! two-RC battery cell driven by the resulting motor power, and the tools
//! to compare, sweep and verify them.

pub mod battery;
pub mod energy;
pub mod error;
pub mod lead;
pub mod models;
pub mod ode;
pub mod ov;
pub mod parallel;
pub mod params;
pub mod scenario_file;
pub mod scenarios;
pub mod sim;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use lead::LeadProfile;
pub use models::FollowerModel;
pub use params::ModelParams;
pub use sim::{integrate_platoon, Scenario, Trajectory};
pub use state::{PlatoonState, VehicleState};

/// Book chapters, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/optimal-velocity.md")]
    mod optimal_velocity {}
    #[doc = include_str!("../../../book/src/follower-models.md")]
    mod follower_models {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/battery.md")]
    mod battery {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/scenario-files.md")]
    mod scenario_files {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
