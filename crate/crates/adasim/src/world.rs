//! World state: the ego vehicle in Cartesian coordinates plus scripted
//! traffic in lane (Frenet) coordinates, advanced in lockstep at 100 Hz.

use crate::error::Result;
use crate::geometry::{LaneGeometry, LateralPosition};
use crate::scenario::{ScenarioSpec, SideScript, Trigger};
use crate::units::{A_MAX_PHYSICAL, A_PROP_MAX, DT};
use crate::vehicle::{step_vehicle, VehicleState};

const EGO_ID: u32 = 0;
/// Scripted vehicles are treated as in ego's lane while their center is
/// within half a lane of the lane center.
const SAME_LANE_LAT: f64 = 1.85;

#[derive(Debug, Clone, Copy)]
struct LateralRamp {
    start_t: f64,
    duration: f64,
    from: f64,
    to: f64,
}

#[derive(Debug, Clone)]
pub struct ScriptedVehicle {
    pub id: u32,
    /// Centerline arc length of the vehicle center (m).
    pub s: f64,
    /// Signed lateral offset from the ego-lane centerline (m).
    pub lat: f64,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
    target_speed: f64,
    accel_mag: f64,
    next_phase: usize,
    ramp: Option<LateralRamp>,
    /// True while a cut-in ramp toward ego's lane is in progress.
    pub cutting_in: bool,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub t: f64,
    pub step_index: usize,
    pub ego: VehicleState,
    /// Ego arc length along the centerline; refreshed every step.
    pub ego_s: f64,
    /// Ego signed lateral offset; refreshed every step.
    pub ego_lat: f64,
    /// True once the ego can no longer be projected onto the road.
    pub off_road: bool,
    pub scripted: Vec<ScriptedVehicle>,
    pub rng_seed: u64,
}

/// Per-run jitter applied to scenario initial conditions so seeded
/// repetitions explore slightly different executions.
#[derive(Debug, Clone, Copy, Default)]
pub struct InitJitter {
    pub ego_speed: f64,
    pub gap: f64,
    pub lead_speed: f64,
    pub lateral: f64,
}

impl WorldState {
    pub fn init(spec: &ScenarioSpec, seed: u64, jitter: InitJitter) -> WorldState {
        let ego_s0 = 5.0;
        let pose = spec.road.pose_at(ego_s0);
        let mut ego = VehicleState::new(
            EGO_ID,
            pose.x - pose.heading.sin() * jitter.lateral,
            pose.y + pose.heading.cos() * jitter.lateral,
            pose.heading,
            (spec.ego_init_speed + jitter.ego_speed).max(1.0),
        );
        ego.curvature = pose.curvature;

        let gap = (spec.init_gap + jitter.gap).max(10.0);
        let lead_speed = (spec.lead_init_speed + jitter.lead_speed).max(0.0);
        let mut scripted = vec![ScriptedVehicle {
            id: 1,
            s: ego_s0 + gap + 4.9, // center-to-center from bumper gap
            lat: 0.0,
            speed: lead_speed,
            length: 4.9,
            width: 1.8,
            target_speed: lead_speed,
            accel_mag: 2.0,
            next_phase: 0,
            ramp: None,
            cutting_in: false,
        }];
        match spec.side {
            Some(SideScript::CutIn {
                ahead_gap, speed, ..
            }) => {
                scripted.push(ScriptedVehicle {
                    id: 2,
                    s: ego_s0 + ahead_gap + 4.9,
                    lat: spec.road.lane_width,
                    speed,
                    length: 4.9,
                    width: 1.8,
                    target_speed: speed,
                    accel_mag: 2.0,
                    next_phase: usize::MAX,
                    ramp: None,
                    cutting_in: false,
                });
            }
            Some(SideScript::CutOut {
                reveal_gap,
                reveal_speed,
                ..
            }) => {
                scripted.push(ScriptedVehicle {
                    id: 2,
                    s: scripted[0].s + reveal_gap + 4.9,
                    lat: 0.0,
                    speed: reveal_speed,
                    length: 4.9,
                    width: 1.8,
                    target_speed: reveal_speed,
                    accel_mag: 2.0,
                    next_phase: usize::MAX,
                    ramp: None,
                    cutting_in: false,
                });
            }
            None => {}
        }
        WorldState {
            t: 0.0,
            step_index: 0,
            ego,
            ego_s: ego_s0,
            ego_lat: jitter.lateral,
            off_road: false,
            scripted,
            rng_seed: seed,
        }
    }

    /// Bumper-to-bumper gap from ego to a scripted vehicle (negative on
    /// longitudinal overlap).
    pub fn gap_to(&self, v: &ScriptedVehicle) -> f64 {
        (v.s - self.ego_s) - (v.length + self.ego.length) / 2.0
    }

    /// Nearest scripted vehicle ahead of ego within its lane, if any.
    pub fn lead(&self) -> Option<&ScriptedVehicle> {
        self.scripted
            .iter()
            .filter(|v| v.s > self.ego_s && v.lat.abs() <= SAME_LANE_LAT)
            .min_by(|a, b| a.s.partial_cmp(&b.s).unwrap())
    }

    /// True while a cut-in maneuver toward ego's lane is in progress ahead of
    /// ego and close enough for the driver to notice.
    pub fn cut_in_visible(&self) -> bool {
        self.scripted
            .iter()
            .any(|v| v.cutting_in && v.s > self.ego_s && self.gap_to(v) < 40.0)
    }

    /// Ego lane-relative footprint position.
    pub fn ego_lateral_position(&self, road: &LaneGeometry) -> LateralPosition {
        if self.off_road {
            return LateralPosition::OutOfRoad {
                offset: self.ego_lat,
            };
        }
        road.lateral_position(self.ego_lat, self.ego.width)
    }

    /// Advance scripted traffic one step: trigger lead profile phases and
    /// lateral maneuvers, then integrate speeds along the centerline.
    pub fn script_step(&mut self, spec: &ScenarioSpec) {
        let (t, ego_s, ego_len) = (self.t, self.ego_s, self.ego.length);
        let gap_of = |v: &ScriptedVehicle| (v.s - ego_s) - (v.length + ego_len) / 2.0;
        let triggered = |trigger: Trigger, v: &ScriptedVehicle| match trigger {
            Trigger::Time(at) => t >= at,
            Trigger::Gap(g) => gap_of(v) <= g,
        };

        for i in 0..self.scripted.len() {
            let v = &self.scripted[i];
            // Lead speed phases apply to the primary lead only.
            if v.id == 1 {
                if let Some(phase) = spec.lead_profile.get(v.next_phase) {
                    if triggered(phase.trigger, v) {
                        let v = &mut self.scripted[i];
                        v.target_speed = phase.target_speed;
                        v.accel_mag = phase.accel;
                        v.next_phase += 1;
                    }
                }
            }
            let v = &self.scripted[i];
            if v.ramp.is_none() {
                match spec.side {
                    Some(SideScript::CutIn {
                        trigger, duration, ..
                    }) if v.id == 2 && triggered(trigger, v) => {
                        let v = &mut self.scripted[i];
                        v.ramp = Some(LateralRamp {
                            start_t: t,
                            duration,
                            from: v.lat,
                            to: 0.0,
                        });
                        v.cutting_in = true;
                    }
                    Some(SideScript::CutOut {
                        trigger, duration, ..
                    }) if v.id == 1 && triggered(trigger, v) => {
                        let v = &mut self.scripted[i];
                        v.ramp = Some(LateralRamp {
                            start_t: t,
                            duration,
                            from: v.lat,
                            to: spec.road.lane_width,
                        });
                    }
                    _ => {}
                }
            }
        }

        let mu = spec.friction;
        for v in &mut self.scripted {
            let accel = (2.0 * (v.target_speed - v.speed))
                .clamp(-v.accel_mag, v.accel_mag)
                .clamp(-mu * A_MAX_PHYSICAL, mu * A_PROP_MAX);
            v.speed = (v.speed + accel * DT).max(0.0);
            v.s += v.speed * DT;
            if let Some(ramp) = v.ramp {
                let frac = ((self.t - ramp.start_t) / ramp.duration).clamp(0.0, 1.0);
                v.lat = ramp.from + (ramp.to - ramp.from) * frac;
                if frac >= 1.0 {
                    v.ramp = None;
                    v.cutting_in = false;
                }
            }
        }
    }

    /// Advance the ego vehicle by one step and refresh its lane coordinates.
    pub fn ego_step(
        &mut self,
        cmd_accel: f64,
        cmd_curvature: f64,
        spec: &ScenarioSpec,
    ) -> Result<()> {
        self.ego = step_vehicle(&self.ego, cmd_accel, cmd_curvature, spec.friction, DT)?;
        match spec.road.project(self.ego.x, self.ego.y) {
            Some((s, lat)) => {
                self.ego_s = s;
                self.ego_lat = lat;
            }
            None => self.off_road = true,
        }
        self.step_index += 1;
        self.t = self.step_index as f64 * DT;
        Ok(())
    }
}
