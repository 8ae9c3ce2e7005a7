//! Online hazard/accident monitoring over ground truth, run termination on
//! accident, and per-run metric accumulation.
//!
//! Hazards may repeat; accidents end the run at first occurrence:
//! - H1: true following distance below a 2 s headway at the current speed.
//! - H2: a lane-line distance at or below 0.1 m.
//! - A1: forward collision with the in-lane lead.
//! - A2: lane departure (footprint beyond the lane) or side-vehicle contact.

use crate::perception::FaultKind;
use crate::safety::InterventionConfig;
use crate::scenario::{ScenarioId, ScenarioSpec};
use crate::units::A_MAX_PHYSICAL;
use crate::world::WorldState;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Lane-line hazard distance (m).
pub const LANE_HAZARD_DISTANCE: f64 = 0.1;
/// Safety-distance headway (s) on true following distance.
pub const HEADWAY_S: f64 = 2.0;
/// Scripted vehicles within this lateral offset count as in ego's lane.
const SAME_LANE_LAT: f64 = 1.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HazardKind {
    H1,
    H2,
    A1,
    A2,
}

impl fmt::Display for HazardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HazardKind::H1 => "H1",
            HazardKind::H2 => "H2",
            HazardKind::A1 => "A1",
            HazardKind::A2 => "A2",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HazardEvent {
    pub t: f64,
    pub kind: HazardKind,
    pub detail: String,
    pub truth_rd: f64,
    pub lane_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    NoAccident,
    A1,
    A2,
    /// Run aborted on a harness fault; excluded from rates.
    Invalid,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::NoAccident => "no-accident",
            Outcome::A1 => "A1",
            Outcome::A2 => "A2",
            Outcome::Invalid => "invalid",
        })
    }
}

/// Edge-trigger bookkeeping across steps.
#[derive(Debug, Clone, Copy, Default)]
pub struct MonitorState {
    h1_active: bool,
    h2_active: bool,
    /// Set on the step an accident is detected; the run must stop.
    pub terminal: Option<Outcome>,
}

/// Evaluate hazards and accidents for the current world state. Consumes only
/// ground truth, never perception frames.
pub fn monitor_step(
    state: &mut MonitorState,
    world: &WorldState,
    spec: &ScenarioSpec,
) -> Vec<HazardEvent> {
    let mut events = Vec::new();
    let true_rd = world.lead().map(|l| world.gap_to(l));
    let lat_pos = world.ego_lateral_position(&spec.road);
    let (lane_left, lane_right, in_lane) = match lat_pos {
        crate::geometry::LateralPosition::InLane { left, right, .. } => (left, right, true),
        crate::geometry::LateralPosition::OutOfRoad { offset } => {
            let half = spec.road.lane_width / 2.0;
            let w = world.ego.width / 2.0;
            (half - offset - w, half + offset - w, false)
        }
    };
    let offset = world.ego_lat;

    // H1: safety-distance violation against the in-lane lead.
    let h1_now = matches!(true_rd, Some(rd) if rd < HEADWAY_S * world.ego.speed);
    if h1_now && !state.h1_active {
        events.push(HazardEvent {
            t: world.t,
            kind: HazardKind::H1,
            detail: format!(
                "following distance {:.2} m below {:.2} m headway",
                true_rd.unwrap(),
                HEADWAY_S * world.ego.speed
            ),
            truth_rd: true_rd.unwrap(),
            lane_offset: offset,
        });
    }
    state.h1_active = h1_now;

    // H2: too close to a lane line.
    let h2_now = lane_left.min(lane_right) <= LANE_HAZARD_DISTANCE;
    if h2_now && !state.h2_active {
        events.push(HazardEvent {
            t: world.t,
            kind: HazardKind::H2,
            detail: format!("lane-line distance {:.3} m", lane_left.min(lane_right)),
            truth_rd: true_rd.unwrap_or(f64::INFINITY),
            lane_offset: offset,
        });
    }
    state.h2_active = h2_now;

    // Accidents: vehicle contact first, then lane departure.
    for v in &world.scripted {
        let long_overlap = (v.s - world.ego_s).abs() < (v.length + world.ego.length) / 2.0;
        let lat_overlap = (v.lat - world.ego_lat).abs() < (v.width + world.ego.width) / 2.0;
        if long_overlap && lat_overlap {
            let forward = v.lat.abs() <= SAME_LANE_LAT;
            let kind = if forward {
                HazardKind::A1
            } else {
                HazardKind::A2
            };
            events.push(HazardEvent {
                t: world.t,
                kind,
                detail: format!("contact with vehicle {}", v.id),
                truth_rd: world.gap_to(v),
                lane_offset: offset,
            });
            state.terminal = Some(if forward { Outcome::A1 } else { Outcome::A2 });
            return events;
        }
    }
    // Lane departure: any part of the ego footprint beyond a lane boundary.
    let departed = !in_lane
        || offset.abs() + world.ego.width / 2.0 > spec.road.lane_width / 2.0
        || world.off_road;
    if departed {
        events.push(HazardEvent {
            t: world.t,
            kind: HazardKind::A2,
            detail: format!("lane departure at offset {offset:.2} m"),
            truth_rd: true_rd.unwrap_or(f64::INFINITY),
            lane_offset: offset,
        });
        state.terminal = Some(Outcome::A2);
    }
    events
}

/// Mitigation timing for one intervention layer.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub fired: bool,
    pub first_t: Option<f64>,
    /// Fault activation to first trigger (s).
    pub mitigation_time: Option<f64>,
    /// Alternative reading: first trigger to run end (s).
    pub trigger_to_end: Option<f64>,
}

impl TriggerRecord {
    pub fn observe(&mut self, first_t: Option<f64>) {
        if let Some(t) = first_t {
            if !self.fired {
                self.fired = true;
                self.first_t = Some(t);
            }
        }
    }

    fn finalize(&mut self, fault_activation_t: Option<f64>, end_t: f64) {
        if let Some(t) = self.first_t {
            self.trigger_to_end = Some(end_t - t);
            if let Some(f) = fault_activation_t {
                self.mitigation_time = Some((t - f).max(0.0));
            }
        }
    }
}

/// One event-log row.
#[derive(Debug, Clone, Serialize)]
pub struct EventRow {
    pub step: usize,
    pub t: f64,
    pub signal: String,
    pub source: String,
    pub value: f64,
}

/// Per-step metric accumulator plus optional event rows; finalized into a
/// RunResult once the run ends.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub keep_events: bool,
    pub events: Vec<EventRow>,
    min_ttc: f64,
    min_t_fcw: f64,
    hardest_brake: f64,
    min_lane_distance: f64,
    follow_sum: f64,
    follow_count: usize,
    hazards: Vec<HazardEvent>,
    pub fault_activation_t: Option<f64>,
    steps: usize,
    end_t: f64,
}

impl RunLog {
    pub fn new(keep_events: bool) -> RunLog {
        RunLog {
            keep_events,
            events: Vec::new(),
            min_ttc: f64::INFINITY,
            min_t_fcw: f64::INFINITY,
            hardest_brake: 0.0,
            min_lane_distance: f64::INFINITY,
            follow_sum: 0.0,
            follow_count: 0,
            hazards: Vec::new(),
            fault_activation_t: None,
            steps: 0,
            end_t: 0.0,
        }
    }

    pub fn event(&mut self, step: usize, t: f64, signal: &str, source: &str, value: f64) {
        if self.keep_events {
            self.events.push(EventRow {
                step,
                t,
                signal: signal.to_string(),
                source: source.to_string(),
                value,
            });
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record_step(
        &mut self,
        step: usize,
        t: f64,
        true_ttc: f64,
        t_fcw_threshold: f64,
        exec_accel: f64,
        mu: f64,
        true_rd: Option<f64>,
        true_rs: Option<f64>,
        lane_distance: f64,
    ) {
        self.steps = step + 1;
        self.end_t = t;
        if true_ttc.is_finite() {
            self.min_ttc = self.min_ttc.min(true_ttc);
            self.min_t_fcw = self.min_t_fcw.min(t_fcw_threshold);
        }
        let brake_fraction = ((-exec_accel).max(0.0) / (mu * A_MAX_PHYSICAL)).min(1.0);
        self.hardest_brake = self.hardest_brake.max(brake_fraction);
        self.min_lane_distance = self.min_lane_distance.min(lane_distance);
        if let (Some(rd), Some(rs)) = (true_rd, true_rs) {
            // Stable following: lead present and relative speed nearly zero.
            if rs.abs() < 0.5 {
                self.follow_sum += rd;
                self.follow_count += 1;
            }
        }
    }

    pub fn hazard(&mut self, event: HazardEvent) {
        if self.keep_events {
            self.events.push(EventRow {
                step: self.steps,
                t: event.t,
                signal: event.kind.to_string(),
                source: "monitor".to_string(),
                value: event.truth_rd,
            });
        }
        self.hazards.push(event);
    }
}

/// Per-run record feeding the campaign aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub scenario: ScenarioId,
    pub init_gap: f64,
    pub fault: Option<FaultKind>,
    pub interventions: InterventionConfig,
    pub seed: u64,
    pub friction: f64,
    pub t_react: f64,
    pub outcome: Outcome,
    pub steps: usize,
    pub end_t: f64,
    pub min_ttc: f64,
    pub min_t_fcw: f64,
    pub hardest_brake: f64,
    /// Mean true gap over stable-following steps; NaN when never following.
    pub following_distance: f64,
    pub min_lane_distance: f64,
    pub fault_activation_t: Option<f64>,
    pub aeb: TriggerRecord,
    pub driver_brake: TriggerRecord,
    pub driver_steer: TriggerRecord,
    pub ml: TriggerRecord,
    /// Fault was active and the run ended without accident.
    pub prevented: bool,
    #[serde(skip)]
    pub hazards: Vec<HazardEvent>,
    #[serde(skip)]
    pub events: Vec<EventRow>,
}

/// Header metadata identifying one run; filled by the runner.
#[derive(Debug, Clone)]
pub struct RunIdentity {
    pub scenario: ScenarioId,
    pub init_gap: f64,
    pub fault: Option<FaultKind>,
    pub interventions: InterventionConfig,
    pub seed: u64,
    pub friction: f64,
    pub t_react: f64,
}

/// Close out a run log into an immutable result.
pub fn finalize_metrics(
    log: RunLog,
    identity: RunIdentity,
    outcome: Outcome,
    mut aeb: TriggerRecord,
    mut driver_brake: TriggerRecord,
    mut driver_steer: TriggerRecord,
    mut ml: TriggerRecord,
) -> RunResult {
    let fault_t = log.fault_activation_t;
    aeb.finalize(fault_t, log.end_t);
    driver_brake.finalize(fault_t, log.end_t);
    driver_steer.finalize(fault_t, log.end_t);
    ml.finalize(fault_t, log.end_t);
    let prevented = fault_t.is_some() && outcome == Outcome::NoAccident;
    RunResult {
        scenario: identity.scenario,
        init_gap: identity.init_gap,
        fault: identity.fault,
        interventions: identity.interventions,
        seed: identity.seed,
        friction: identity.friction,
        t_react: identity.t_react,
        outcome,
        steps: log.steps,
        end_t: log.end_t,
        min_ttc: log.min_ttc,
        min_t_fcw: log.min_t_fcw,
        hardest_brake: log.hardest_brake,
        following_distance: if log.follow_count > 0 {
            log.follow_sum / log.follow_count as f64
        } else {
            f64::NAN
        },
        min_lane_distance: log.min_lane_distance,
        fault_activation_t: fault_t,
        aeb,
        driver_brake,
        driver_steer,
        ml,
        prevented,
        hazards: log.hazards,
        events: log.events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{InitJitter, WorldState};

    fn setup(gap: f64) -> (ScenarioSpec, WorldState) {
        let spec = ScenarioSpec::builtin(ScenarioId::S1, gap);
        let w = WorldState::init(&spec, 0, InitJitter::default());
        (spec, w)
    }

    #[test]
    fn quiescent_when_far_and_centered() {
        let (spec, w) = setup(100.0);
        let mut st = MonitorState::default();
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.is_empty());
        assert!(st.terminal.is_none());
    }

    #[test]
    fn h1_when_inside_headway() {
        let (spec, mut w) = setup(60.0);
        // 10 m gap at 22.352 m/s: threshold 44.7 m.
        w.scripted[0].s = w.ego_s + 10.0 + 4.9;
        let mut st = MonitorState::default();
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.iter().any(|e| e.kind == HazardKind::H1));
        // Edge-triggered: still inside, no repeat.
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.is_empty());
    }

    #[test]
    fn h2_near_lane_line() {
        let (spec, mut w) = setup(100.0);
        // left = 0.95 - offset; offset 0.87 -> left 0.08.
        w.ego_lat = 0.87;
        let mut st = MonitorState::default();
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.iter().any(|e| e.kind == HazardKind::H2));
        assert!(st.terminal.is_none());
    }

    #[test]
    fn a1_on_forward_contact_terminates() {
        let (spec, mut w) = setup(60.0);
        w.scripted[0].s = w.ego_s + 4.0; // centers 4 m apart: overlap
        let mut st = MonitorState::default();
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.iter().any(|e| e.kind == HazardKind::A1));
        assert_eq!(st.terminal, Some(Outcome::A1));
    }

    #[test]
    fn a2_on_lane_departure() {
        let (spec, mut w) = setup(100.0);
        w.ego_lat = 1.0; // footprint edge at 1.9 m, beyond the 1.85 m boundary
        let mut st = MonitorState::default();
        let events = monitor_step(&mut st, &w, &spec);
        assert!(events.iter().any(|e| e.kind == HazardKind::A2));
        assert_eq!(st.terminal, Some(Outcome::A2));
    }

    #[test]
    fn a2_on_side_contact() {
        let (spec, mut w) = setup(100.0);
        w.scripted[0].s = w.ego_s;
        w.scripted[0].lat = 2.0; // beside ego, lateral overlap at ego_lat 0.5
        w.ego_lat = 0.5;
        let mut st = MonitorState::default();
        monitor_step(&mut st, &w, &spec);
        assert_eq!(st.terminal, Some(Outcome::A2));
    }

    #[test]
    fn mitigation_time_subtraction() {
        let mut log = RunLog::new(false);
        log.fault_activation_t = Some(20.0);
        log.record_step(0, 30.0, 4.0, 7.0, -2.0, 1.0, Some(40.0), Some(0.1), 0.9);
        let mut aeb = TriggerRecord::default();
        aeb.observe(Some(23.3));
        let identity = RunIdentity {
            scenario: ScenarioId::S1,
            init_gap: 60.0,
            fault: Some(FaultKind::RelativeDistance),
            interventions: InterventionConfig::none(),
            seed: 1,
            friction: 1.0,
            t_react: 2.5,
        };
        let result = finalize_metrics(
            log,
            identity,
            Outcome::NoAccident,
            aeb,
            TriggerRecord::default(),
            TriggerRecord::default(),
            TriggerRecord::default(),
        );
        let mt = result.aeb.mitigation_time.unwrap();
        assert!((mt - 3.3).abs() < 1e-9);
        assert!(result.prevented);
        assert!(!result.driver_brake.fired);
    }

    #[test]
    fn no_brake_means_zero_hardest_brake() {
        let mut log = RunLog::new(false);
        for i in 0..100 {
            log.record_step(
                i,
                i as f64 * 0.01,
                f64::INFINITY,
                7.0,
                1.0,
                1.0,
                None,
                None,
                0.95,
            );
        }
        let identity = RunIdentity {
            scenario: ScenarioId::S1,
            init_gap: 60.0,
            fault: None,
            interventions: InterventionConfig::none(),
            seed: 1,
            friction: 1.0,
            t_react: 2.5,
        };
        let result = finalize_metrics(
            log,
            identity,
            Outcome::NoAccident,
            TriggerRecord::default(),
            TriggerRecord::default(),
            TriggerRecord::default(),
            TriggerRecord::default(),
        );
        assert_eq!(result.hardest_brake, 0.0);
        assert!(!result.prevented); // no fault armed
    }
}
