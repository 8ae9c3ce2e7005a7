//! Priority arbitration across control layers: AEB > driver > ML recovery >
//! ADAS on the longitudinal channel, driver > ML recovery > ADAS on the
//! lateral channel. The firmware range check is applied to software-sourced
//! commands before they compete.

use crate::control::CommandSource;
use crate::control::ControlCommand;
use crate::safety::check::{safety_check, SafetyCheckParams};

/// Candidate commands for one step. `None` means the layer is inactive.
#[derive(Debug, Clone, Copy)]
pub struct ArbiterInput {
    pub t: f64,
    pub adas_accel: f64,
    pub adas_curvature: f64,
    pub aeb_accel: Option<f64>,
    pub driver_accel: Option<f64>,
    pub driver_curvature: Option<f64>,
    /// Driver is braking without steering: freeze the wheel at the last
    /// executed curvature instead of following the (possibly spoofed) ADAS
    /// request.
    pub driver_hold_steering: bool,
    /// Last executed curvature, used for the steering hold.
    pub held_curvature: f64,
    pub ml_accel: Option<f64>,
    pub ml_curvature: Option<f64>,
}

/// The command pair actually sent to the actuators, with provenance.
#[derive(Debug, Clone, Copy)]
pub struct Execution {
    pub accel: f64,
    pub curvature: f64,
    pub accel_source: CommandSource,
    pub curvature_source: CommandSource,
}

fn checked(accel: f64, source: CommandSource, t: f64, check: Option<&SafetyCheckParams>) -> f64 {
    match check {
        Some(params) => {
            safety_check(
                ControlCommand {
                    accel,
                    curvature: 0.0,
                    source,
                    t,
                },
                params,
            )
            .accel
        }
        None => accel,
    }
}

pub fn arbitrate(input: &ArbiterInput, check: Option<&SafetyCheckParams>) -> Execution {
    let (accel, accel_source) = if let Some(a) = input.aeb_accel {
        (a, CommandSource::Aeb)
    } else if let Some(a) = input.driver_accel {
        (a, CommandSource::Driver)
    } else if let Some(a) = input.ml_accel {
        (
            checked(a, CommandSource::Ml, input.t, check),
            CommandSource::Ml,
        )
    } else {
        (
            checked(input.adas_accel, CommandSource::Adas, input.t, check),
            CommandSource::Adas,
        )
    };

    let (curvature, curvature_source) = if let Some(k) = input.driver_curvature {
        (k, CommandSource::Driver)
    } else if input.driver_hold_steering {
        (input.held_curvature, CommandSource::Driver)
    } else if let Some(k) = input.ml_curvature {
        (k, CommandSource::Ml)
    } else {
        (input.adas_curvature, CommandSource::Adas)
    };

    Execution {
        accel,
        curvature,
        accel_source,
        curvature_source,
    }
}
