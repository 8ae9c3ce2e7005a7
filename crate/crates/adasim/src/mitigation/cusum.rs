//! Accumulated-error change detector driving the recovery switch: the
//! executed command follows the controller until the accumulated gap to the
//! predictor exceeds a threshold, then follows the predictor until the two
//! agree again.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct CusumParams {
    /// Per-step bias subtracted from the accumulated error (command units).
    pub b0: f64,
    /// Recovery-entry threshold on the accumulated error.
    pub tau: f64,
}

impl Default for CusumParams {
    fn default() -> Self {
        CusumParams { b0: 0.05, tau: 0.5 }
    }
}

/// One channel's detector state. Longitudinal and lateral channels each carry
/// their own instance.
#[derive(Debug, Clone, Copy)]
pub struct CusumState {
    pub s: f64,
    pub b: f64,
    pub tau: f64,
    pub recovery_mode: bool,
}

impl CusumState {
    pub fn new(params: CusumParams) -> CusumState {
        CusumState {
            s: 0.0,
            b: params.b0,
            tau: params.tau,
            recovery_mode: false,
        }
    }
}

/// One detector step. `y_ml` is the predictor output, `y_op` the controller
/// output; returns the command to execute on this channel.
///
/// S(t+1) = max(0, S(t) + |y_ml - y_op| - b); recovery entered when S exceeds
/// tau and exited (with S reset to 0) once the per-step gap falls back within
/// b.
pub fn cusum_step(state: &mut CusumState, y_ml: f64, y_op: f64) -> Result<f64> {
    let delta = (y_ml - y_op).abs();
    if !delta.is_finite() {
        return Err(SimError::non_finite("cusum per-step error", delta));
    }
    if state.recovery_mode {
        if delta <= state.b {
            state.recovery_mode = false;
            state.s = 0.0;
            Ok(y_op)
        } else {
            state.s = (state.s + delta - state.b).max(0.0);
            Ok(y_ml)
        }
    } else {
        state.s = (state.s + delta - state.b).max(0.0);
        if state.s > state.tau {
            state.recovery_mode = true;
            Ok(y_ml)
        } else {
            Ok(y_op)
        }
    }
}
