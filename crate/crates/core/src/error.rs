use thiserror::Error;

use crate::params::ParamViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what} = {value} lies outside the valid open interval ({lower}, {upper})")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid model parameters: {}", join_violations(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("collision: vehicle {follower} reached vehicle {leader} (spacing {spacing:e}) at t = {time}")]
    Collision {
        leader: usize,
        follower: usize,
        spacing: f64,
        time: f64,
    },

    #[error("lead velocity {velocity} left [0, {v_max}] at t = {time}")]
    LeadVelocityOutOfRange { velocity: f64, v_max: f64, time: f64 },

    #[error("vehicle {vehicle} has negative velocity {velocity} at t = {time}")]
    NegativeVelocity {
        vehicle: usize,
        velocity: f64,
        time: f64,
    },

    #[error("power demand {demand} W exceeds battery capability (max deliverable {max_power} W)")]
    PowerExceeded { demand: f64, max_power: f64 },

    #[error("physical constraint breached: {0}")]
    ConstraintBreach(String),

    #[error("degenerate equilibrium: {0}")]
    DegenerateEquilibrium(String),

    #[error("{label}: {inner}")]
    Labeled { label: String, inner: Box<Error> },
}

impl Error {
    pub fn labeled(self, label: impl Into<String>) -> Self {
        Error::Labeled {
            label: label.into(),
            inner: Box::new(self),
        }
    }

    /// The innermost error with any labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Labeled { inner, .. } => inner.root(),
            e => e,
        }
    }
}

fn join_violations(v: &[ParamViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
