//! ML-based mitigation: an actuation predictor fed from the independent
//! sensing channel, with a per-channel accumulated-error detector that swaps
//! the executed command over to the predictor while the controller diverges.

mod cusum;
mod predictor;

pub use cusum::{cusum_step, CusumParams, CusumState};
pub use predictor::{
    predictor_train, Predictor, PredictorWindow, Trace, TrainedModel, WindowFrame, FRAME_FEATURES,
    WINDOW_LEN,
};

use crate::error::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MlParams {
    /// Longitudinal channel detector (command units m/s^2).
    pub accel: CusumParams,
    /// Lateral channel detector (command units 1/m).
    pub curvature: CusumParams,
    /// Path to the persisted model, when loaded from disk.
    pub model_path: Option<String>,
}

impl Default for MlParams {
    fn default() -> Self {
        MlParams {
            accel: CusumParams { b0: 0.05, tau: 0.5 },
            curvature: CusumParams {
                b0: 0.0025,
                tau: 0.025,
            },
            model_path: None,
        }
    }
}

/// Per-run mitigation state: the sliding observation window plus one detector
/// per actuation channel.
#[derive(Debug, Clone)]
pub struct MlState {
    pub window: PredictorWindow,
    pub accel: CusumState,
    pub curvature: CusumState,
    /// First time either channel entered recovery (for mitigation-time
    /// metrics).
    pub first_trigger: Option<f64>,
}

impl MlState {
    pub fn new(params: &MlParams) -> MlState {
        MlState {
            window: PredictorWindow::default(),
            accel: CusumState::new(params.accel),
            curvature: CusumState::new(params.curvature),
            first_trigger: None,
        }
    }

    pub fn any_recovery(&self) -> bool {
        self.accel.recovery_mode || self.curvature.recovery_mode
    }
}

/// Commands the mitigation layer wants executed this step; None on a channel
/// whose detector is quiet.
#[derive(Debug, Clone, Copy, Default)]
pub struct MlOutput {
    pub accel: Option<f64>,
    pub curvature: Option<f64>,
}

/// One mitigation step against the controller's current requests. The caller
/// pushes the matching independent-channel frame into `state.window` after
/// executing the step.
pub fn ml_step(
    state: &mut MlState,
    predictor: &Predictor,
    op_accel: f64,
    op_curvature: f64,
    t: f64,
) -> Result<MlOutput> {
    let Some((ml_accel, ml_curvature)) = predictor.predict(&state.window) else {
        return Ok(MlOutput::default());
    };
    let exec_accel = cusum_step(&mut state.accel, ml_accel, op_accel)?;
    let exec_curv = cusum_step(&mut state.curvature, ml_curvature, op_curvature)?;
    if state.any_recovery() && state.first_trigger.is_none() {
        state.first_trigger = Some(t);
    }
    Ok(MlOutput {
        accel: state.accel.recovery_mode.then_some(exec_accel),
        curvature: state.curvature.recovery_mode.then_some(exec_curv),
    })
}
