//! Perception surrogate: ground-truth extraction standing in for the camera
//! and DNN pipeline, plus source-level fault injection emulating adversarial
//! patches on the lead vehicle and the road.

use crate::error::{Result, SimError};
use crate::geometry::LateralPosition;
use crate::scenario::ScenarioSpec;
use crate::units::{self, DETECTION_FLOOR, DETECTION_RANGE, DT};
use crate::world::WorldState;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Lookahead distance for the desired-curvature output (m).
const CURVATURE_LOOKAHEAD: f64 = 20.0;
/// Plausible band for a DNN-tracked relative speed (m/s).
const RS_LIMIT: f64 = 25.0;

/// DNN-output surrogate consumed by the controllers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptionFrame {
    /// Relative distance to the lead vehicle (m); +inf when no lead.
    pub rd: f64,
    /// Relative speed (m/s), positive when closing.
    pub rs: f64,
    /// Desired path curvature (1/m).
    pub curvature: f64,
    /// Distance from the left vehicle side to the left lane line (m).
    pub lane_left: f64,
    /// Distance from the right vehicle side to the right lane line (m).
    pub lane_right: f64,
    pub lead_detected: bool,
    pub out_of_road: bool,
    pub t: f64,
}

impl PerceptionFrame {
    /// Signed center offset recovered from the lane-line distances,
    /// positive toward the left line.
    pub fn center_offset(&self) -> f64 {
        (self.lane_right - self.lane_left) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    RelativeDistance,
    DesiredCurvature,
    Mixed,
}

impl FaultKind {
    pub const ALL: [FaultKind; 3] = [
        FaultKind::RelativeDistance,
        FaultKind::DesiredCurvature,
        FaultKind::Mixed,
    ];

    pub fn targets_rd(self) -> bool {
        matches!(self, FaultKind::RelativeDistance | FaultKind::Mixed)
    }

    pub fn targets_curvature(self) -> bool {
        matches!(self, FaultKind::DesiredCurvature | FaultKind::Mixed)
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FaultKind::RelativeDistance => "rd",
            FaultKind::DesiredCurvature => "curvature",
            FaultKind::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

impl FromStr for FaultKind {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rd" | "relative_distance" => Ok(FaultKind::RelativeDistance),
            "curvature" | "desired_curvature" => Ok(FaultKind::DesiredCurvature),
            "mixed" => Ok(FaultKind::Mixed),
            other => Err(SimError::config(format!("unknown fault kind {other:?}"))),
        }
    }
}

/// How the scheduled attack value combines with the true reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdFaultMode {
    /// reported = true + value (lead appears farther).
    Additive,
    /// reported = value.
    Substitute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Ordered (threshold m, value m): the tightest satisfied threshold wins.
    #[serde(default = "default_rd_schedule")]
    pub rd_schedule: Vec<(f64, f64)>,
    #[serde(default = "default_rd_mode")]
    pub rd_mode: RdFaultMode,
    /// Peak curvature bias (1/m) once the ramp completes.
    #[serde(default = "default_curvature_bias")]
    pub curvature_bias: f64,
    /// Seconds over which the curvature bias ramps from zero to its peak
    /// after the ego enters the patch zone.
    #[serde(default = "default_ramp_time")]
    pub ramp_time: f64,
    /// Arc-length position of the road patch (m).
    #[serde(default = "default_patch_start")]
    pub patch_start: f64,
    /// Arc-length extent of the patch zone (m).
    #[serde(default = "default_patch_len")]
    pub patch_len: f64,
}

fn default_rd_schedule() -> Vec<(f64, f64)> {
    vec![(20.0, 38.0), (25.0, 15.0), (80.0, 10.0)]
}
fn default_rd_mode() -> RdFaultMode {
    RdFaultMode::Additive
}
fn default_curvature_bias() -> f64 {
    0.025
}
fn default_ramp_time() -> f64 {
    3.0
}
fn default_patch_start() -> f64 {
    40.0
}
fn default_patch_len() -> f64 {
    4000.0
}

impl FaultSpec {
    pub fn new(kind: FaultKind) -> FaultSpec {
        FaultSpec {
            kind,
            rd_schedule: default_rd_schedule(),
            rd_mode: default_rd_mode(),
            curvature_bias: default_curvature_bias(),
            ramp_time: default_ramp_time(),
            patch_start: default_patch_start(),
            patch_len: default_patch_len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for &(threshold, _) in &self.rd_schedule {
            if threshold <= prev {
                return Err(SimError::config(
                    "rd_schedule thresholds must be strictly increasing",
                ));
            }
            prev = threshold;
        }
        if self.curvature_bias.abs() > units::kappa_max() {
            return Err(SimError::config(format!(
                "curvature bias implies steering beyond 10 degrees (|bias| <= {:.5})",
                units::kappa_max()
            )));
        }
        if self.ramp_time < 0.0 || self.patch_len <= 0.0 {
            return Err(SimError::config("invalid ramp time or patch length"));
        }
        Ok(())
    }

    /// Attack value for a true relative distance, if any threshold applies.
    pub fn rd_value(&self, true_rd: f64) -> Option<f64> {
        self.rd_schedule
            .iter()
            .find(|&&(threshold, _)| true_rd < threshold)
            .map(|&(_, value)| value)
    }
}

/// Per-run injection state: tracks the previously reported distance so the
/// spoofed relative speed can be recovered by differencing, and the patch
/// entry time for the bias ramp.
#[derive(Debug, Clone, Default)]
pub struct FaultState {
    last_reported_rd: Option<f64>,
    patch_entry_t: Option<f64>,
    pub rd_active: bool,
    pub curvature_active: bool,
}

impl FaultState {
    pub fn any_active(&self) -> bool {
        self.rd_active || self.curvature_active
    }
}

/// Ground-truth perception: what a fault-free DNN surrogate reports.
pub fn sense_ground_truth(world: &WorldState, spec: &ScenarioSpec) -> PerceptionFrame {
    let (lane_left, lane_right, out_of_road) = match world.ego_lateral_position(&spec.road) {
        LateralPosition::InLane { left, right, .. } => (left, right, false),
        LateralPosition::OutOfRoad { offset } => {
            let half = spec.road.lane_width / 2.0;
            let w = world.ego.width / 2.0;
            (half - offset - w, half + offset - w, true)
        }
    };
    let curvature = spec.road.curvature_at(world.ego_s + CURVATURE_LOOKAHEAD);
    let (rd, rs, lead_detected) = match world.lead() {
        Some(lead) => {
            let gap = world.gap_to(lead);
            if !(DETECTION_FLOOR..=DETECTION_RANGE).contains(&gap) {
                (f64::INFINITY, 0.0, false)
            } else {
                (gap, world.ego.speed - lead.speed, true)
            }
        }
        None => (f64::INFINITY, 0.0, false),
    };
    PerceptionFrame {
        rd,
        rs,
        curvature,
        lane_left,
        lane_right,
        lead_detected,
        out_of_road,
        t: world.t,
    }
}

/// The independent, secure sensing channel: identical to ground truth and
/// never passed through fault injection.
pub fn independent_sense(world: &WorldState, spec: &ScenarioSpec) -> PerceptionFrame {
    sense_ground_truth(world, spec)
}

/// Apply the armed fault to a ground-truth frame. Identity when no trigger
/// condition holds. Total on valid frames.
pub fn inject_fault(
    frame: &PerceptionFrame,
    fault: &FaultSpec,
    state: &mut FaultState,
    world: &WorldState,
) -> PerceptionFrame {
    let mut out = *frame;

    // Relative-distance channel.
    state.rd_active = false;
    if fault.kind.targets_rd() && frame.lead_detected {
        if let Some(value) = fault.rd_value(frame.rd) {
            out.rd = match fault.rd_mode {
                RdFaultMode::Additive => frame.rd + value,
                RdFaultMode::Substitute => value,
            };
            out.rs = match state.last_reported_rd {
                Some(prev) => ((prev - out.rd) / DT).clamp(-RS_LIMIT, RS_LIMIT),
                None => frame.rs,
            };
            state.rd_active = true;
        }
    }
    state.last_reported_rd = if out.lead_detected && out.rd.is_finite() {
        Some(out.rd)
    } else {
        None
    };

    // Desired-curvature channel, active only inside the patch zone.
    state.curvature_active = false;
    if fault.kind.targets_curvature() {
        let in_zone =
            world.ego_s >= fault.patch_start && world.ego_s <= fault.patch_start + fault.patch_len;
        if in_zone {
            let entry = *state.patch_entry_t.get_or_insert(world.t);
            let frac = if fault.ramp_time > 0.0 {
                ((world.t - entry) / fault.ramp_time).min(1.0)
            } else {
                1.0
            };
            let bias = fault.curvature_bias * frac;
            // The deviation from truth may not imply more than 10 degrees of
            // steering.
            let max_dev = units::kappa_max();
            out.curvature = frame.curvature + bias.clamp(-max_dev, max_dev);
            state.curvature_active = true;
        } else {
            state.patch_entry_t = None;
        }
    }
    out
}
