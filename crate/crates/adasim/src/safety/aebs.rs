//! Phase-controlled AEBS with forward collision warning: TTC thresholds
//! select among FCW alert and 90/95/100% braking stages.

use crate::error::{Result, SimError};
use crate::perception::PerceptionFrame;
use crate::units::A_MAX_PHYSICAL;
use serde::{Deserialize, Serialize};

/// Time to collision: relative distance over relative speed; infinite when
/// not closing.
pub fn compute_ttc(rd: f64, rs: f64) -> f64 {
    if !rd.is_finite() || rs <= 0.0 {
        f64::INFINITY
    } else {
        rd / rs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub t_fcw: f64,
    pub t_pb1: f64,
    pub t_pb2: f64,
    pub t_fb: f64,
}

/// Speed-dependent staging thresholds: FCW fires when TTC is below the
/// react-and-stop time, the braking stages at v/3.8, v/5.8 and v/9.8.
pub fn aebs_thresholds(v_ego: f64, a_driver: f64, t_react: f64) -> Result<Thresholds> {
    if a_driver <= 0.0 {
        return Err(SimError::config("assumed driver deceleration must be > 0"));
    }
    Ok(Thresholds {
        t_fcw: t_react + v_ego / a_driver,
        t_pb1: v_ego / 3.8,
        t_pb2: v_ego / 5.8,
        t_fb: v_ego / A_MAX_PHYSICAL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum AebStage {
    #[default]
    Inactive,
    FcwAlert,
    Brake90,
    Brake95,
    Brake100,
}

impl AebStage {
    pub fn brake_fraction(self) -> Option<f64> {
        match self {
            AebStage::Inactive | AebStage::FcwAlert => None,
            AebStage::Brake90 => Some(0.90),
            AebStage::Brake95 => Some(0.95),
            AebStage::Brake100 => Some(1.00),
        }
    }

    fn from_ttc(ttc: f64, th: &Thresholds) -> AebStage {
        if ttc <= th.t_fb {
            AebStage::Brake100
        } else if ttc <= th.t_pb2 {
            AebStage::Brake95
        } else if ttc <= th.t_pb1 {
            AebStage::Brake90
        } else if ttc <= th.t_fcw {
            AebStage::FcwAlert
        } else {
            AebStage::Inactive
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AebsParams {
    /// Assumed driver deceleration in the FCW lead-time estimate (m/s^2).
    pub a_driver: f64,
    /// Assumed driver reaction time in the FCW lead-time estimate (s).
    pub t_react: f64,
}

impl Default for AebsParams {
    fn default() -> Self {
        AebsParams {
            a_driver: 4.5,
            t_react: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AebsState {
    pub stage: AebStage,
    /// Distance at the last detected frame; close-range detection loss is a
    /// conflict, not an all-clear.
    last_seen_rd: Option<f64>,
}

/// Detection lost below this distance is treated as close-range blindness
/// with the conflict still live (m).
const CLOSE_LOSS_RD: f64 = 5.0;

/// One AEBS step over the configured input frame. Returns the brake
/// deceleration command (m/s^2, negative) when a braking stage is active and
/// whether the FCW alert is raised.
///
/// Once braking, the stage only escalates while the conflict persists and
/// releases when the lead is seen opening or safely far; detection loss while
/// braking latches the current stage.
pub fn aebs_step(
    state: &mut AebsState,
    frame: &PerceptionFrame,
    v_ego: f64,
    mu: f64,
    params: &AebsParams,
) -> Result<(Option<f64>, bool)> {
    let th = aebs_thresholds(v_ego, params.a_driver, params.t_react)?;
    let ttc = compute_ttc(frame.rd, frame.rs);
    let raw = if frame.lead_detected {
        AebStage::from_ttc(ttc, &th)
    } else {
        AebStage::Inactive
    };

    state.stage = if frame.lead_detected {
        if state.stage >= AebStage::Brake90 {
            if frame.rs <= 0.0 || ttc > th.t_fcw {
                AebStage::Inactive
            } else {
                raw.max(state.stage)
            }
        } else {
            raw
        }
    } else if matches!(state.last_seen_rd, Some(rd) if rd < CLOSE_LOSS_RD) {
        // Lead vanished at close range: full brake until re-acquired.
        AebStage::Brake100
    } else if state.stage >= AebStage::Brake90 {
        // Hold the brake through detection loss mid-episode.
        state.stage
    } else {
        AebStage::Inactive
    };
    if frame.lead_detected {
        state.last_seen_rd = Some(frame.rd);
    }

    let cmd = state
        .stage
        .brake_fraction()
        .map(|f| -f * mu * A_MAX_PHYSICAL);
    let fcw = state.stage >= AebStage::FcwAlert;
    Ok((cmd, fcw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thresholds_hand_evaluated_at_50mph() {
        let th = aebs_thresholds(22.352, 4.5, 2.5).unwrap();
        assert_abs_diff_eq!(th.t_fcw, 2.5 + 22.352 / 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(th.t_pb1, 22.352 / 3.8, epsilon = 1e-12);
        assert_abs_diff_eq!(th.t_pb2, 22.352 / 5.8, epsilon = 1e-12);
        assert_abs_diff_eq!(th.t_fb, 22.352 / 9.8, epsilon = 1e-12);
    }

    #[test]
    fn thresholds_zero_speed() {
        let th = aebs_thresholds(0.0, 4.5, 2.5).unwrap();
        assert_eq!(
            (th.t_fcw, th.t_pb1, th.t_pb2, th.t_fb),
            (2.5, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn threshold_ordering_for_positive_speed() {
        for v in [0.5, 5.0, 13.411, 22.352, 30.0, 45.0] {
            let th = aebs_thresholds(v, 4.5, 2.5).unwrap();
            assert!(th.t_fcw > th.t_pb1 && th.t_pb1 > th.t_pb2 && th.t_pb2 > th.t_fb);
        }
    }

    #[test]
    fn ttc_basic_cases() {
        assert_abs_diff_eq!(compute_ttc(30.0, 10.0), 3.0, epsilon = 1e-12);
        assert!(compute_ttc(30.0, -2.0).is_infinite());
        assert!(compute_ttc(f64::INFINITY, 5.0).is_infinite());
        assert_abs_diff_eq!(compute_ttc(60.0, 8.9408), 6.7108, epsilon = 1e-4);
    }

    fn frame(rd: f64, rs: f64) -> PerceptionFrame {
        PerceptionFrame {
            rd,
            rs,
            curvature: 0.0,
            lane_left: 0.95,
            lane_right: 0.95,
            lead_detected: rd.is_finite(),
            out_of_road: false,
            t: 0.0,
        }
    }

    #[test]
    fn stage_selection_at_50mph() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        // TTC 5.0 between t_pb1=5.882 and t_pb2=3.854 -> Brake90.
        let (cmd, fcw) = aebs_step(&mut st, &frame(50.0, 10.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake90);
        assert_abs_diff_eq!(cmd.unwrap(), -0.9 * 9.8, epsilon = 1e-12);
        assert!(fcw);
    }

    #[test]
    fn full_brake_below_t_fb() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        let (cmd, _) = aebs_step(&mut st, &frame(10.0, 10.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake100);
        assert_abs_diff_eq!(cmd.unwrap(), -9.8, epsilon = 1e-12);
    }

    #[test]
    fn inactive_when_not_closing() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        let (cmd, fcw) = aebs_step(&mut st, &frame(f64::INFINITY, 0.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Inactive);
        assert!(cmd.is_none());
        assert!(!fcw);
    }

    #[test]
    fn stage_boundaries_exact() {
        let p = AebsParams::default();
        let v = 22.352;
        let th = aebs_thresholds(v, p.a_driver, p.t_react).unwrap();
        for (ttc, expect) in [
            (th.t_pb1 + 1e-9, AebStage::FcwAlert),
            (th.t_pb1 - 1e-9, AebStage::Brake90),
            (th.t_pb2 + 1e-9, AebStage::Brake90),
            (th.t_pb2 - 1e-9, AebStage::Brake95),
            (th.t_fb + 1e-9, AebStage::Brake95),
            (th.t_fb - 1e-9, AebStage::Brake100),
            (th.t_fcw + 1e-9, AebStage::Inactive),
            (th.t_fcw - 1e-9, AebStage::FcwAlert),
        ] {
            let mut st = AebsState::default();
            let rs = 10.0;
            aebs_step(&mut st, &frame(ttc * rs, rs), v, 1.0, &p).unwrap();
            assert_eq!(st.stage, expect, "ttc {ttc}");
        }
    }

    #[test]
    fn no_deescalation_while_closing() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        aebs_step(&mut st, &frame(20.0, 10.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake100);
        // TTC rises but still closing and below t_fcw: stage held.
        aebs_step(&mut st, &frame(50.0, 10.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake100);
    }

    #[test]
    fn releases_when_opening() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        aebs_step(&mut st, &frame(20.0, 10.0), 22.352, 1.0, &p).unwrap();
        let (cmd, _) = aebs_step(&mut st, &frame(20.0, -1.0), 10.0, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Inactive);
        assert!(cmd.is_none());
    }

    #[test]
    fn latches_through_detection_loss() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        aebs_step(&mut st, &frame(15.0, 10.0), 22.352, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake100);
        let (cmd, _) = aebs_step(&mut st, &frame(f64::INFINITY, 0.0), 15.0, 1.0, &p).unwrap();
        assert_eq!(st.stage, AebStage::Brake100);
        assert!(cmd.is_some());
    }

    #[test]
    fn brake_scales_with_friction() {
        let p = AebsParams::default();
        let mut st = AebsState::default();
        let (cmd, _) = aebs_step(&mut st, &frame(10.0, 10.0), 22.352, 0.5, &p).unwrap();
        assert_abs_diff_eq!(cmd.unwrap(), -4.9, epsilon = 1e-12);
    }

    #[test]
    fn invalid_a_driver_rejected() {
        assert!(aebs_thresholds(10.0, 0.0, 2.5).is_err());
    }
}
