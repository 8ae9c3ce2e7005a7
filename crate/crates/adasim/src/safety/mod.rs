//! The three intervention layers and their priority arbitration.

mod aebs;
mod arbiter;
mod check;
mod driver;

pub use aebs::{
    aebs_step, aebs_thresholds, compute_ttc, AebStage, AebsParams, AebsState, Thresholds,
};
pub use arbiter::{arbitrate, ArbiterInput, Execution};
pub use check::{safety_check, SafetyCheckParams};
pub use driver::{
    driver_step, DriverAction, DriverObservations, DriverOutput, DriverParams, DriverState,
};

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which AEBS variant is active and which sensing channel feeds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AebMode {
    #[default]
    Off,
    /// AEBS consumes the same (possibly spoofed) frames as the controllers.
    Compromised,
    /// AEBS consumes the independent, fault-free channel.
    Independent,
}

/// One Table-V-style intervention row: which safety layers run in a given
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct InterventionConfig {
    pub driver: bool,
    pub safety_check: bool,
    pub aeb: AebMode,
    pub ml: bool,
    /// Driver reaction time (s); 0 selects the 2.5 s default.
    pub driver_t_react: f64,
}

impl InterventionConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn driver_t_react(&self) -> f64 {
        if self.driver_t_react > 0.0 {
            self.driver_t_react
        } else {
            2.5
        }
    }

    /// Short stable label used in reports, e.g. "driver+check+aeb-indep".
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.driver {
            parts.push("driver".to_string());
        }
        if self.safety_check {
            parts.push("check".to_string());
        }
        match self.aeb {
            AebMode::Off => {}
            AebMode::Compromised => parts.push("aeb-comp".to_string()),
            AebMode::Independent => parts.push("aeb-indep".to_string()),
        }
        if self.ml {
            parts.push("ml".to_string());
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }

    /// Parse a comma-separated layer list: `driver,check,aeb-indep,ml` or
    /// `none`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let mut cfg = InterventionConfig::none();
        if s.trim().eq_ignore_ascii_case("none") || s.trim().is_empty() {
            return Ok(cfg);
        }
        for part in s.split([',', '+']) {
            match part.trim().to_ascii_lowercase().as_str() {
                "driver" => cfg.driver = true,
                "check" | "safety-check" | "safety_check" => cfg.safety_check = true,
                "aeb-comp" | "aeb_comp" => cfg.aeb = AebMode::Compromised,
                "aeb-indep" | "aeb_indep" => cfg.aeb = AebMode::Independent,
                "ml" => cfg.ml = true,
                other => {
                    return Err(SimError::config(format!(
                        "unknown intervention layer {other:?}"
                    )))
                }
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for InterventionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for InterventionConfig {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_list(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        let cfg = InterventionConfig {
            driver: true,
            safety_check: true,
            aeb: AebMode::Independent,
            ml: false,
            driver_t_react: 0.0,
        };
        let parsed = InterventionConfig::parse_list(&cfg.label()).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(
            InterventionConfig::parse_list("none").unwrap(),
            InterventionConfig::none()
        );
    }
}
