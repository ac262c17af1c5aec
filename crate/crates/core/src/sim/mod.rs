//! Platoon integration, stability analysis and parameter sweeps.

mod integrate;
mod scenario;
mod stability;
mod sweep;
mod trajectory;

pub use integrate::integrate_platoon;
pub use scenario::{BatteryBlock, EventPolicy, Scenario, SimOptions, DEFAULT_DT};
pub use stability::{
    equilibrium, finite_difference_jacobian, linearize_at_equilibrium, relative_field, stability_metrics,
    Linearization, StabilityOptions, StabilityReport,
};
pub use sweep::{is_stalled, sweep_kappa, StallCriterion, SweepOptions, SweepRow, SweepRun, SweepTable};
pub use trajectory::{sig9, BatteryChannels, Event, EventKind, Trajectory, VehicleSeries};
