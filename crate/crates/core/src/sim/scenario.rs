use serde::{Deserialize, Serialize};

use crate::battery::{BatteryParams, BatteryState, UnitScaling, VehicleBodyParams};
use crate::error::{Error, Result};
use crate::lead::LeadProfile;
use crate::models::FollowerModel;
use crate::params::{ModelParams, ParamViolation};
use crate::state::PlatoonState;

/// Default step size in model time units.
pub const DEFAULT_DT: f64 = 1e-3;

/// What to do when a non-fatal physical violation is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventPolicy {
    #[default]
    Warn,
    Fatal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub negative_velocity: EventPolicy,
    pub soc_breach: EventPolicy,
    /// Skip the `kappa < min(alpha, beta)` rule, for sweeps that probe the
    /// unstable regime on purpose.
    pub allow_unstable_kappa: bool,
}

/// Optional battery chain evaluated alongside the traffic model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatteryBlock {
    pub params: BatteryParams,
    pub body: VehicleBodyParams,
    pub scaling: UnitScaling,
    pub initial: BatteryState,
}

impl BatteryBlock {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.body.validate()?;
        self.scaling.validate()?;
        if !self.initial.soc_in_range() {
            return Err(Error::Invalid(format!(
                "initial SOC {} outside [0, 1]",
                self.initial.soc
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    /// One entry per follower, front to back.
    pub models: Vec<FollowerModel>,
    pub lead: LeadProfile,
    pub initial: PlatoonState,
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    /// Motor efficiency used by the energy weighting.
    pub eta: f64,
    pub battery: Option<BatteryBlock>,
    pub options: SimOptions,
}

impl Scenario {
    pub fn new(params: ModelParams, model: FollowerModel, lead: LeadProfile, initial: PlatoonState, tf: f64) -> Self {
        let models = vec![model; initial.followers.len()];
        let t0 = initial.time;
        Self {
            params,
            models,
            lead,
            initial,
            t0,
            tf,
            dt: DEFAULT_DT,
            eta: 0.8,
            battery: None,
            options: SimOptions::default(),
        }
    }

    pub fn followers(&self) -> usize {
        self.initial.followers.len()
    }

    /// Same scenario with every follower on `model`.
    pub fn with_model(&self, model: FollowerModel) -> Self {
        Self {
            models: vec![model; self.followers()],
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self {
            params: self.params.with_kappa(kappa),
            ..self.clone()
        }
    }

    /// Number of steps and the resulting sample times.
    pub fn time_grid(&self) -> Vec<f64> {
        let span = self.tf - self.t0;
        let n = (span / self.dt - 1e-9).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| if k == n { self.tf } else { self.t0 + k as f64 * self.dt })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let violations: Vec<_> = self
            .params
            .violations()
            .into_iter()
            .filter(|v| !(self.options.allow_unstable_kappa && *v == ParamViolation::KappaTooLarge))
            .collect();
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        self.lead.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t0.is_finite() && self.tf.is_finite() && self.tf > self.t0) {
            return Err(Error::Invalid(format!(
                "horizon [{}, {}] must satisfy tf > t0",
                self.t0, self.tf
            )));
        }
        if self.models.len() != self.followers() {
            return Err(Error::Invalid(format!(
                "{} follower models given for {} followers",
                self.models.len(),
                self.followers()
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Invalid(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        self.initial.validate_initial(self.params.v_max)?;
        if let Some(b) = &self.battery {
            b.validate()?;
        }
        Ok(())
    }
}
