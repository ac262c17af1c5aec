use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ov::V_SUP;

/// Car-following coefficients shared by the proposed model and OVFL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Relaxation gain toward the optimal velocity (1/time).
    pub alpha: f64,
    /// Follow-the-leader gain on `(v_l - v) / s^2` (length^2/time).
    pub beta: f64,
    /// Energy-control gain (1/length). Zero recovers OVFL.
    pub kappa: f64,
    /// Smoothing constant inside the energy-control term.
    pub epsilon: f64,
    /// Speed cap.
    pub v_max: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 3.0,
            kappa: 0.03,
            epsilon: 1e-6,
            v_max: V_SUP,
        }
    }
}

impl ModelParams {
    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    /// Check every rule and return all violations, not just the first.
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("kappa", self.kappa),
            ("epsilon", self.epsilon),
            ("v_max", self.v_max),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                out.push(ParamViolation::NonFinite(name));
            }
        }
        if !out.is_empty() {
            return out;
        }
        if self.alpha <= 0.0 {
            out.push(ParamViolation::AlphaNotPositive);
        }
        if self.beta <= 0.0 {
            out.push(ParamViolation::BetaNotPositive);
        }
        if self.kappa < 0.0 {
            out.push(ParamViolation::KappaNegative);
        }
        if self.epsilon <= 0.0 {
            out.push(ParamViolation::EpsilonNotPositive);
        }
        if self.v_max <= 0.0 {
            out.push(ParamViolation::VMaxNotPositive);
        }
        if self.beta <= self.alpha {
            out.push(ParamViolation::BetaNotAboveAlpha);
        }
        if self.kappa >= self.alpha || self.kappa >= self.beta {
            out.push(ParamViolation::KappaTooLarge);
        }
        out
    }

    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

/// Return `params` unchanged if every rule holds, otherwise the full list of
/// violations.
pub fn validate_params(params: ModelParams) -> Result<ModelParams> {
    let v = params.violations();
    if v.is_empty() {
        Ok(params)
    } else {
        Err(Error::InvalidParams(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamViolation {
    NonFinite(&'static str),
    AlphaNotPositive,
    BetaNotPositive,
    KappaNegative,
    EpsilonNotPositive,
    VMaxNotPositive,
    BetaNotAboveAlpha,
    KappaTooLarge,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::NonFinite(name) => write!(f, "{name} must be finite"),
            ParamViolation::AlphaNotPositive => f.write_str("alpha must be positive"),
            ParamViolation::BetaNotPositive => f.write_str("beta must be positive"),
            ParamViolation::KappaNegative => f.write_str("kappa must be non-negative"),
            ParamViolation::EpsilonNotPositive => f.write_str("epsilon must be positive"),
            ParamViolation::VMaxNotPositive => f.write_str("v_max must be positive"),
            ParamViolation::BetaNotAboveAlpha => f.write_str("beta must exceed alpha"),
            ParamViolation::KappaTooLarge => f.write_str("kappa must be below alpha and beta"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, beta: f64, kappa: f64) -> ModelParams {
        ModelParams {
            alpha,
            beta,
            kappa,
            epsilon: 1e-6,
            v_max: 1.964,
        }
    }

    #[test]
    fn figure_parameters_are_valid() {
        let params = p(2.0, 3.0, 0.03);
        assert_eq!(validate_params(params).unwrap(), params);
        assert!(ModelParams::default().validate().is_ok());
    }

    #[test]
    fn beta_below_alpha() {
        let err = validate_params(p(3.0, 2.0, 0.03)).unwrap_err();
        assert_eq!(err, Error::InvalidParams(vec![ParamViolation::BetaNotAboveAlpha]));
        assert!(err.to_string().contains("beta must exceed alpha"));
    }

    #[test]
    fn kappa_too_large() {
        let err = validate_params(p(2.0, 3.0, 2.5)).unwrap_err();
        assert_eq!(err, Error::InvalidParams(vec![ParamViolation::KappaTooLarge]));
        assert!(err.to_string().contains("kappa must be below alpha and beta"));
    }

    #[test]
    fn reports_every_violation() {
        let bad = ModelParams {
            alpha: -1.0,
            beta: -2.0,
            kappa: -0.1,
            epsilon: 0.0,
            v_max: 0.0,
        };
        let v = bad.violations();
        // kappa = -0.1 is also not below min(alpha, beta) = -2.
        assert_eq!(v.len(), 7, "{v:?}");
        assert!(v.contains(&ParamViolation::BetaNotAboveAlpha));
    }

    #[test]
    fn non_finite_short_circuits() {
        let bad = ModelParams {
            epsilon: f64::NAN,
            ..ModelParams::default()
        };
        assert_eq!(bad.violations(), vec![ParamViolation::NonFinite("epsilon")]);
    }
}
