//! Stabilization parameters: the grad-div weight and the rule for the LPS-SU
//! weight `tau_M`.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Floor on `|u_M|` used by the velocity-scaled tau rules.
pub const DEFAULT_VELOCITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TauRule {
    #[default]
    Off,
    Constant(f64),
    /// `h_M / (2 |u_M|)`.
    SuHalf,
    /// `min { h_M / |u_M|, h_M^2 / nu }`.
    Dimensional,
}

impl FromStr for TauRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "off" | "none" | "0" => Ok(TauRule::Off),
            "su_half" | "su-half" => Ok(TauRule::SuHalf),
            "dimensional" => Ok(TauRule::Dimensional),
            _ => {
                let v = s
                    .strip_prefix("constant:")
                    .or_else(|| s.strip_prefix("const:"))
                    .unwrap_or(s);
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("unknown tau rule '{s}'")))?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!(
                        "tau must be a finite non-negative value, got {v}"
                    )));
                }
                Ok(TauRule::Constant(v))
            }
        }
    }
}

impl fmt::Display for TauRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauRule::Off => write!(f, "off"),
            TauRule::Constant(v) => write!(f, "constant:{v}"),
            TauRule::SuHalf => write!(f, "su_half"),
            TauRule::Dimensional => write!(f, "dimensional"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    /// Grad-div weight `gamma >= 0`.
    pub gamma: f64,
    pub tau: TauRule,
    pub velocity_floor: f64,
}

impl Default for StabilizationParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            tau: TauRule::SuHalf,
            velocity_floor: DEFAULT_VELOCITY_FLOOR,
        }
    }
}

impl StabilizationParams {
    pub fn new(gamma: f64, tau: TauRule) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            tau,
            velocity_floor: DEFAULT_VELOCITY_FLOOR,
        })
    }

    /// No stabilization at all.
    pub fn none() -> Self {
        Self {
            gamma: 0.0,
            tau: TauRule::Off,
            velocity_floor: DEFAULT_VELOCITY_FLOOR,
        }
    }

    pub fn tau(&self, h: f64, speed: f64, nu: f64) -> f64 {
        tau_value(self.tau, h, speed, nu, self.velocity_floor)
    }
}

/// `tau_M` for cell diameter `h`, averaged speed `|u_M|` and viscosity `nu`.
pub fn tau_value(rule: TauRule, h: f64, speed: f64, nu: f64, floor: f64) -> f64 {
    let speed = speed.max(floor);
    match rule {
        TauRule::Off => 0.0,
        TauRule::Constant(v) => v,
        TauRule::SuHalf => h / (2.0 * speed),
        TauRule::Dimensional => (h / speed).min(h * h / nu),
    }
}
