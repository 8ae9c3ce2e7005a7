//! Surrogate ACC and ALC controllers standing in for the OpenPilot planner.

use crate::perception::PerceptionFrame;
use crate::units::mph;
use crate::vehicle::VehicleState;
use serde::{Deserialize, Serialize};

/// Which layer produced a control command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandSource {
    Adas,
    Driver,
    Aeb,
    Ml,
}

impl CommandSource {
    pub fn label(self) -> &'static str {
        match self {
            CommandSource::Adas => "adas",
            CommandSource::Driver => "driver",
            CommandSource::Aeb => "aeb",
            CommandSource::Ml => "ml",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ControlCommand {
    pub accel: f64,
    pub curvature: f64,
    pub source: CommandSource,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AccParams {
    pub set_speed: f64,
    pub time_headway: f64,
    /// Standstill gap margin (m).
    pub standstill_margin: f64,
    /// Distance short of the lead at which the stopping supervisor aims to
    /// come to rest (m).
    pub stop_buffer: f64,
    /// Gain on the gap error (1/s^2).
    pub gap_gain: f64,
    /// Gain on the closing speed (1/s).
    pub speed_gain: f64,
    /// Gain on the set-speed error when cruising (1/s).
    pub cruise_gain: f64,
    /// Planner output limits before the firmware check.
    pub accel_min: f64,
    pub accel_max: f64,
}

impl Default for AccParams {
    fn default() -> Self {
        AccParams {
            set_speed: mph(50.0),
            time_headway: 1.45,
            standstill_margin: 4.0,
            stop_buffer: 2.5,
            gap_gain: 0.05,
            speed_gain: 0.45,
            cruise_gain: 0.4,
            accel_min: -9.8,
            accel_max: 2.0,
        }
    }
}

impl AccParams {
    /// Gap the controller tries to hold at the given ego speed.
    pub fn gap_target(&self, v_ego: f64) -> f64 {
        self.time_headway * v_ego + self.standstill_margin
    }
}

/// Longitudinal step: proportional gap-and-closing-speed law behind a lead,
/// set-speed tracking otherwise; a stopping supervisor brakes at least hard
/// enough to come to rest short of the lead. Stateless.
pub fn acc_step(frame: &PerceptionFrame, ego: &VehicleState, params: &AccParams) -> f64 {
    let cruise = params.cruise_gain * (params.set_speed - ego.speed);
    let accel = if frame.lead_detected && frame.rd.is_finite() {
        let target = params.gap_target(ego.speed);
        let mut law = params.gap_gain * (frame.rd - target) - params.speed_gain * frame.rs;
        if frame.rs > 0.0 {
            let room = (frame.rd - params.stop_buffer).max(0.1);
            let required = frame.rs * frame.rs / (2.0 * room);
            // Engage only once an actual stop is imminent.
            if required >= 1.0 {
                law = law.min(-required);
            }
        }
        law.min(cruise)
    } else {
        cruise
    };
    accel.clamp(params.accel_min, params.accel_max)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AlcParams {
    /// Lane-centering gain (1/m per m of offset).
    pub center_gain: f64,
    /// Damping gain on the lateral rate (1/m per m/s).
    pub rate_gain: f64,
    /// Correction slew limit per control step (1/m).
    pub correction_rate_limit: f64,
}

impl Default for AlcParams {
    fn default() -> Self {
        AlcParams {
            center_gain: 0.02,
            rate_gain: 0.06,
            correction_rate_limit: 0.005,
        }
    }
}

/// Rate-limiter and hold state carried across steps within one run.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlcState {
    correction: f64,
    last_offset: Option<f64>,
    last_request: f64,
}

/// Lateral step: desired-curvature feedforward plus damped lane-centering
/// feedback. Holds the last request when the ego leaves the road.
pub fn alc_step(
    frame: &PerceptionFrame,
    _ego: &VehicleState,
    params: &AlcParams,
    state: &mut AlcState,
    kappa_max: f64,
    dt: f64,
) -> f64 {
    if frame.out_of_road {
        return state.last_request;
    }
    let offset = frame.center_offset();
    let rate = match state.last_offset {
        Some(prev) => (offset - prev) / dt,
        None => 0.0,
    };
    state.last_offset = Some(offset);
    let target = -params.center_gain * offset - params.rate_gain * rate;
    let delta = (target - state.correction)
        .clamp(-params.correction_rate_limit, params.correction_rate_limit);
    state.correction += delta;
    let request = (frame.curvature + state.correction).clamp(-kappa_max, kappa_max);
    state.last_request = request;
    request
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{self, DT};
    use approx::assert_abs_diff_eq;

    fn frame(rd: f64, rs: f64, detected: bool) -> PerceptionFrame {
        PerceptionFrame {
            rd,
            rs,
            curvature: 0.0,
            lane_left: 0.95,
            lane_right: 0.95,
            lead_detected: detected,
            out_of_road: false,
            t: 0.0,
        }
    }

    fn ego(speed: f64) -> VehicleState {
        VehicleState::new(0, 0.0, 0.0, 0.0, speed)
    }

    #[test]
    fn cruise_accelerates_below_set_speed() {
        let p = AccParams::default();
        let a = acc_step(&frame(f64::INFINITY, 0.0, false), &ego(20.0), &p);
        assert!(a > 0.0);
    }

    #[test]
    fn faulted_far_lead_keeps_accelerating() {
        let p = AccParams::default();
        // Reported RD huge under fault while below set speed.
        let a = acc_step(&frame(95.0, 0.5, true), &ego(18.0), &p);
        assert!(a > 0.0);
    }

    #[test]
    fn equilibrium_at_gap_target() {
        let p = AccParams::default();
        let v = 13.4112;
        let a = acc_step(&frame(p.gap_target(v), 0.0, true), &ego(v), &p);
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn infinite_rd_with_detected_flag_treated_as_no_lead() {
        let p = AccParams::default();
        let a = acc_step(&frame(f64::INFINITY, 3.0, true), &ego(20.0), &p);
        let b = acc_step(&frame(f64::INFINITY, 0.0, false), &ego(20.0), &p);
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn closer_reported_lead_never_raises_accel() {
        // Monotonicity of the gap law: a lead that appears farther never
        // yields a smaller acceleration request.
        let p = AccParams::default();
        let v = 20.0;
        let mut last = f64::NEG_INFINITY;
        for rd in [10.0, 20.0, 40.0, 80.0, 120.0] {
            let a = acc_step(&frame(rd, 5.0, true), &ego(v), &p);
            assert!(a >= last - 1e-12);
            last = a;
        }
    }

    #[test]
    fn alc_zero_on_centered_straight() {
        let p = AlcParams::default();
        let mut st = AlcState::default();
        let k = alc_step(
            &frame(f64::INFINITY, 0.0, false),
            &ego(20.0),
            &p,
            &mut st,
            units::kappa_max(),
            DT,
        );
        assert_abs_diff_eq!(k, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn curvature_fault_passes_through_at_onset() {
        let p = AlcParams::default();
        let mut st = AlcState::default();
        let mut f = frame(f64::INFINITY, 0.0, false);
        f.curvature = 0.003;
        let k = alc_step(&f, &ego(20.0), &p, &mut st, units::kappa_max(), DT);
        assert_abs_diff_eq!(k, 0.003, epsilon = 1e-12);
    }

    #[test]
    fn offset_left_steers_right() {
        let p = AlcParams::default();
        let mut st = AlcState::default();
        // 0.5 m left of center: lane_left shrinks, lane_right grows.
        let mut f = frame(f64::INFINITY, 0.0, false);
        f.lane_left = 0.45;
        f.lane_right = 1.45;
        let mut k = 0.0;
        for _ in 0..10 {
            k = alc_step(&f, &ego(20.0), &p, &mut st, units::kappa_max(), DT);
        }
        assert!(k < 0.0);
    }

    #[test]
    fn out_of_road_holds_last_request() {
        let p = AlcParams::default();
        let mut st = AlcState::default();
        let mut f = frame(f64::INFINITY, 0.0, false);
        f.curvature = 0.002;
        let k1 = alc_step(&f, &ego(20.0), &p, &mut st, units::kappa_max(), DT);
        f.out_of_road = true;
        f.curvature = 0.05;
        let k2 = alc_step(&f, &ego(20.0), &p, &mut st, units::kappa_max(), DT);
        assert_abs_diff_eq!(k1, k2, epsilon = 1e-15);
    }
}
