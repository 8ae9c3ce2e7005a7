//! Firmware-level command clamp replicating the PANDA safe-range check:
//! software longitudinal commands are limited to [-3.5, +2.0] m/s^2.

use crate::control::{CommandSource, ControlCommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SafetyCheckParams {
    pub accel_max: f64,
    pub accel_min: f64,
}

impl Default for SafetyCheckParams {
    fn default() -> Self {
        SafetyCheckParams {
            accel_max: 2.0,
            accel_min: -3.5,
        }
    }
}

/// Clamp a software-sourced longitudinal command to the safe range. AEB and
/// driver commands are physical actuation and bypass the check; curvature
/// passes through unchanged.
pub fn safety_check(cmd: ControlCommand, params: &SafetyCheckParams) -> ControlCommand {
    match cmd.source {
        CommandSource::Adas | CommandSource::Ml => ControlCommand {
            accel: cmd.accel.clamp(params.accel_min, params.accel_max),
            ..cmd
        },
        CommandSource::Aeb | CommandSource::Driver => cmd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cmd(accel: f64, source: CommandSource) -> ControlCommand {
        ControlCommand {
            accel,
            curvature: 0.01,
            source,
            t: 0.0,
        }
    }

    #[test]
    fn clamps_both_bounds() {
        let p = SafetyCheckParams::default();
        assert_abs_diff_eq!(
            safety_check(cmd(3.0, CommandSource::Adas), &p).accel,
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            safety_check(cmd(-5.0, CommandSource::Adas), &p).accel,
            -3.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            safety_check(cmd(1.0, CommandSource::Adas), &p).accel,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn aeb_and_driver_bypass() {
        let p = SafetyCheckParams::default();
        assert_abs_diff_eq!(
            safety_check(cmd(-9.8, CommandSource::Aeb), &p).accel,
            -9.8,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            safety_check(cmd(-5.0, CommandSource::Driver), &p).accel,
            -5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn curvature_untouched() {
        let p = SafetyCheckParams::default();
        let c = safety_check(cmd(-5.0, CommandSource::Ml), &p);
        assert_abs_diff_eq!(c.curvature, 0.01, epsilon = 1e-15);
        assert_eq!(c.source, CommandSource::Ml);
    }
}
