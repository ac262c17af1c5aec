//! TOML scenario files.
//!
//! ```toml
//! [model]
//! alpha = 2.0
//! beta = 3.0
//! kappa = 0.03
//!
//! [lead]
//! kind = "constant"
//! accel = 0.0
//!
//! [platoon]
//! lead = { position = 10.0, velocity = 1.0 }
//! followers = [{ position = 0.0, velocity = 0.5 }]
//! model = "proposed"
//!
//! [sim]
//! tf = 700.0
//! ```
//!
//! Sections: `model`, `lead`, `platoon`, `sim`, `energy`, and optionally
//! `battery`, `battery_state`, `body`, `scaling`. Unknown keys are errors.
//! Omitted keys in `model`, `battery`, `body` and `scaling` take their
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::battery::{BatteryParams, BatteryState, UnitScaling, VehicleBodyParams};
use crate::error::{Error, Result};
use crate::lead::LeadProfile;
use crate::models::FollowerModel;
use crate::params::ModelParams;
use crate::scenarios;
use crate::sim::{BatteryBlock, EventPolicy, Scenario, SimOptions, DEFAULT_DT};
use crate::state::{PlatoonState, VehicleState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    model: ModelParams,
    lead: LeadProfile,
    platoon: PlatoonSection,
    sim: SimSection,
    #[serde(default)]
    energy: EnergySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    battery: Option<BatteryParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    battery_state: Option<BatteryState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<VehicleBodyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scaling: Option<UnitScaling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatoonSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<FollowerModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    models: Option<Vec<FollowerModel>>,
    lead: VehicleState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    followers: Option<Vec<VehicleState>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing_rule: Option<SpacingRule>,
}

/// Followers behind the lead at `first_spacing`, then `spacing`, all at
/// `velocity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpacingRule {
    count: usize,
    first_spacing: f64,
    spacing: f64,
    velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(default)]
    t0: f64,
    tf: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default)]
    negative_velocity: EventPolicy,
    #[serde(default)]
    soc_breach: EventPolicy,
    #[serde(default)]
    allow_unstable_kappa: bool,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnergySection {
    eta: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { eta: 0.8 }
    }
}

/// Parse and validate a scenario from TOML text.
pub fn parse_scenario(source: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(source).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(source, s.start)).unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let sc = file.into_scenario()?;
    sc.validate()?;
    Ok(sc)
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| e.labeled(path.display().to_string()))
}

/// A built-in scenario name, or else a path to a scenario file.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    let path = Path::new(name_or_path);
    if !path.exists() && scenarios::BUILTIN_NAMES.contains(&name_or_path) {
        return scenarios::builtin(name_or_path);
    }
    read_scenario(path)
}

/// Serialise a scenario so that [`parse_scenario`] gives it back unchanged.
pub fn dump_scenario(sc: &Scenario) -> Result<String> {
    let uniform = sc.models.first().filter(|m| sc.models.iter().all(|x| x == *m));
    let file = ScenarioFile {
        model: sc.params,
        lead: sc.lead.clone(),
        platoon: PlatoonSection {
            model: uniform.copied(),
            models: if uniform.is_some() { None } else { Some(sc.models.clone()) },
            lead: sc.initial.lead,
            followers: Some(sc.initial.followers.clone()),
            spacing_rule: None,
        },
        sim: SimSection {
            t0: sc.t0,
            tf: sc.tf,
            dt: sc.dt,
            negative_velocity: sc.options.negative_velocity,
            soc_breach: sc.options.soc_breach,
            allow_unstable_kappa: sc.options.allow_unstable_kappa,
        },
        energy: EnergySection { eta: sc.eta },
        battery: sc.battery.as_ref().map(|b| b.params.clone()),
        battery_state: sc.battery.as_ref().map(|b| b.initial),
        body: sc.battery.as_ref().map(|b| b.body),
        scaling: sc.battery.as_ref().map(|b| b.scaling),
    };
    toml::to_string(&file).map_err(|e| Error::Invalid(format!("cannot serialise scenario: {e}")))
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let p = self.platoon;
        let followers = match (p.followers, p.spacing_rule) {
            (Some(f), None) => f,
            (None, Some(r)) => {
                PlatoonState::evenly_spaced(p.lead, r.first_spacing, r.spacing, r.count, r.velocity).followers
            }
            (Some(_), Some(_)) => {
                return Err(Error::Invalid("[platoon] takes either followers or spacing_rule, not both".into()))
            }
            (None, None) => return Err(Error::Invalid("[platoon] needs followers or spacing_rule".into())),
        };
        if followers.is_empty() {
            return Err(Error::Invalid("[platoon] needs at least one follower".into()));
        }
        let models = match (p.model, p.models) {
            (Some(m), None) => vec![m; followers.len()],
            (None, Some(ms)) => ms,
            (None, None) => vec![FollowerModel::Proposed; followers.len()],
            (Some(_), Some(_)) => return Err(Error::Invalid("[platoon] takes either model or models, not both".into())),
        };
        let battery = match self.battery {
            Some(params) => Some(BatteryBlock {
                params,
                body: self.body.unwrap_or_default(),
                scaling: self.scaling.unwrap_or_default(),
                initial: self.battery_state.unwrap_or_default(),
            }),
            None if self.body.is_some() || self.scaling.is_some() || self.battery_state.is_some() => {
                return Err(Error::Invalid(
                    "[battery_state], [body] and [scaling] need a [battery] section".into(),
                ))
            }
            None => None,
        };
        let initial = PlatoonState::new(self.sim.t0, p.lead, followers);
        let mut sc = Scenario::new(self.model, FollowerModel::Proposed, self.lead, initial, self.sim.tf);
        sc.models = models;
        sc.dt = self.sim.dt;
        sc.eta = self.energy.eta;
        sc.battery = battery;
        sc.options = SimOptions {
            negative_velocity: self.sim.negative_velocity,
            soc_breach: self.sim.soc_breach,
            allow_unstable_kappa: self.sim.allow_unstable_kappa,
        };
        Ok(sc)
    }
}

/// 1-based line and column of a byte offset.
fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
