//! Driving scenarios S1-S6 and the TOML scenario file schema.

use crate::error::{Result, SimError};
use crate::geometry::{LaneGeometry, SegmentKind};
use crate::units::{self, mph};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
        ScenarioId::S5,
        ScenarioId::S6,
    ];
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ScenarioId {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(ScenarioId::S1),
            "S2" => Ok(ScenarioId::S2),
            "S3" => Ok(ScenarioId::S3),
            "S4" => Ok(ScenarioId::S4),
            "S5" => Ok(ScenarioId::S5),
            "S6" => Ok(ScenarioId::S6),
            other => Err(SimError::config(format!("unknown scenario id {other:?}"))),
        }
    }
}

/// When a scripted phase or maneuver starts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Trigger {
    /// Simulation time (s).
    Time(f64),
    /// True bumper-to-bumper gap between ego and the scripted vehicle (m).
    Gap(f64),
}

/// One scripted speed phase of the lead vehicle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LeadPhase {
    pub trigger: Trigger,
    /// Speed the lead tracks once the phase is active (m/s).
    pub target_speed: f64,
    /// Acceleration magnitude bound while tracking (m/s^2).
    pub accel: f64,
}

/// Lateral maneuver of the side vehicle (S5) or the nearer lead (S6).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SideScript {
    /// A vehicle from the adjacent lane merges into ego's lane ahead of ego.
    CutIn {
        trigger: Trigger,
        /// Lane-change ramp duration (s).
        duration: f64,
        /// Initial bumper-to-bumper gap ahead of ego (m).
        ahead_gap: f64,
        speed: f64,
    },
    /// The nearer of two leads departs ego's lane, revealing the farther one.
    CutOut {
        trigger: Trigger,
        duration: f64,
        /// Gap between the nearer and the farther lead (m).
        reveal_gap: f64,
        reveal_speed: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub ego_init_speed: f64,
    pub init_gap: f64,
    pub lead_init_speed: f64,
    pub lead_profile: Vec<LeadPhase>,
    pub side: Option<SideScript>,
    pub road: LaneGeometry,
    pub friction: f64,
    pub speed_limit: f64,
}

impl ScenarioSpec {
    /// Build one of the six scripted scenarios at the given initial gap.
    pub fn builtin(id: ScenarioId, init_gap: f64) -> ScenarioSpec {
        let straight = || LaneGeometry::straight(4000.0);
        let curvy = || {
            LaneGeometry::new(
                &[
                    SegmentKind::Straight { len: 500.0 },
                    SegmentKind::Arc {
                        radius: 300.0,
                        angle_deg: 60.0,
                    },
                    SegmentKind::Straight { len: 3000.0 },
                ],
                units::LANE_WIDTH,
                2,
            )
            .unwrap()
        };
        let base = |road: LaneGeometry, lead_speed: f64| ScenarioSpec {
            id,
            ego_init_speed: mph(50.0),
            init_gap,
            lead_init_speed: lead_speed,
            lead_profile: Vec::new(),
            side: None,
            road,
            friction: 1.0,
            speed_limit: mph(50.0),
        };
        match id {
            ScenarioId::S1 => base(straight(), mph(30.0)),
            ScenarioId::S2 => {
                let mut s = base(straight(), mph(30.0));
                s.lead_profile.push(LeadPhase {
                    trigger: Trigger::Gap(40.0),
                    target_speed: mph(40.0),
                    accel: 1.5,
                });
                s
            }
            ScenarioId::S3 => {
                let mut s = base(curvy(), mph(40.0));
                s.lead_profile.push(LeadPhase {
                    trigger: Trigger::Gap(50.0),
                    target_speed: mph(30.0),
                    accel: 2.0,
                });
                s
            }
            ScenarioId::S4 => {
                let mut s = base(curvy(), mph(30.0));
                // The lead first speeds up to highway speed, then slams to a
                // stop braking harder than the ego's service brake is allowed
                // to, leaving the ego almost no margin.
                s.lead_profile.push(LeadPhase {
                    trigger: Trigger::Gap(68.0),
                    target_speed: mph(50.0),
                    accel: 2.0,
                });
                s.lead_profile.push(LeadPhase {
                    trigger: Trigger::Time(50.0),
                    target_speed: 0.0,
                    accel: 4.5,
                });
                s
            }
            ScenarioId::S5 => {
                let mut s = base(straight(), mph(30.0));
                s.side = Some(SideScript::CutIn {
                    trigger: Trigger::Time(2.0),
                    duration: 3.0,
                    ahead_gap: 45.0,
                    speed: mph(40.0),
                });
                s
            }
            ScenarioId::S6 => {
                let mut s = base(curvy(), mph(30.0));
                s.side = Some(SideScript::CutOut {
                    trigger: Trigger::Gap(40.0),
                    duration: 3.0,
                    reveal_gap: 40.0,
                    reveal_speed: mph(30.0),
                });
                s
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ego_init_speed <= 0.0 || self.init_gap <= 0.0 {
            return Err(SimError::config("ego speed and initial gap must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.friction) || self.friction <= 0.0 {
            return Err(SimError::config("friction must lie in (0, 1]"));
        }
        for phase in &self.lead_profile {
            if phase.accel <= 0.0 || phase.target_speed < 0.0 {
                return Err(SimError::config("invalid lead profile phase"));
            }
        }
        Ok(())
    }

    /// Parse the TOML scenario document format:
    /// `[scenario]`, `[road]`, repeated `[[lead_profile]]`, optional `[side]`.
    pub fn from_toml_str(text: &str) -> Result<ScenarioSpec> {
        let doc: ScenarioDoc =
            toml::from_str(text).map_err(|e| SimError::config(format!("scenario TOML: {e}")))?;
        doc.build()
    }

    pub fn load(path: &std::path::Path) -> Result<ScenarioSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Deserialize)]
struct ScenarioDoc {
    scenario: ScenarioSection,
    road: RoadSection,
    #[serde(default)]
    lead_profile: Vec<LeadPhaseSection>,
    #[serde(default)]
    side: Option<SideSection>,
}

#[derive(Debug, Deserialize)]
struct ScenarioSection {
    id: String,
    #[serde(default = "default_ego_speed")]
    ego_init_speed: f64,
    init_gap: f64,
    lead_init_speed: f64,
    #[serde(default = "default_friction")]
    friction: f64,
    #[serde(default = "default_ego_speed")]
    speed_limit: f64,
}

fn default_ego_speed() -> f64 {
    mph(50.0)
}
fn default_friction() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
struct RoadSection {
    #[serde(default = "default_lane_width")]
    lane_width: f64,
    #[serde(default = "default_lane_count")]
    lane_count: u32,
    segments: Vec<SegmentKind>,
}

fn default_lane_width() -> f64 {
    units::LANE_WIDTH
}
fn default_lane_count() -> u32 {
    2
}

#[derive(Debug, Deserialize)]
struct LeadPhaseSection {
    trigger_time: Option<f64>,
    trigger_gap: Option<f64>,
    target_speed: f64,
    accel: f64,
}

#[derive(Debug, Deserialize)]
struct SideSection {
    kind: String,
    trigger_time: Option<f64>,
    trigger_gap: Option<f64>,
    #[serde(default = "default_ramp")]
    duration: f64,
    ahead_gap: Option<f64>,
    speed: Option<f64>,
    reveal_gap: Option<f64>,
    reveal_speed: Option<f64>,
}

fn default_ramp() -> f64 {
    3.0
}

fn parse_trigger(time: Option<f64>, gap: Option<f64>, what: &str) -> Result<Trigger> {
    match (time, gap) {
        (Some(t), None) => Ok(Trigger::Time(t)),
        (None, Some(g)) => Ok(Trigger::Gap(g)),
        _ => Err(SimError::config(format!(
            "{what}: exactly one of trigger_time / trigger_gap required"
        ))),
    }
}

impl ScenarioDoc {
    fn build(self) -> Result<ScenarioSpec> {
        let id: ScenarioId = self.scenario.id.parse()?;
        let road = LaneGeometry::new(
            &self.road.segments,
            self.road.lane_width,
            self.road.lane_count,
        )?;
        let lead_profile = self
            .lead_profile
            .iter()
            .map(|p| {
                Ok(LeadPhase {
                    trigger: parse_trigger(p.trigger_time, p.trigger_gap, "lead_profile")?,
                    target_speed: p.target_speed,
                    accel: p.accel,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let side = match self.side {
            None => None,
            Some(s) => {
                let trigger = parse_trigger(s.trigger_time, s.trigger_gap, "side")?;
                Some(match s.kind.as_str() {
                    "cut_in" => SideScript::CutIn {
                        trigger,
                        duration: s.duration,
                        ahead_gap: s
                            .ahead_gap
                            .ok_or_else(|| SimError::config("cut_in requires ahead_gap"))?,
                        speed: s
                            .speed
                            .ok_or_else(|| SimError::config("cut_in requires speed"))?,
                    },
                    "cut_out" => SideScript::CutOut {
                        trigger,
                        duration: s.duration,
                        reveal_gap: s
                            .reveal_gap
                            .ok_or_else(|| SimError::config("cut_out requires reveal_gap"))?,
                        reveal_speed: s
                            .reveal_speed
                            .ok_or_else(|| SimError::config("cut_out requires reveal_speed"))?,
                    },
                    other => return Err(SimError::config(format!("unknown side kind {other:?}"))),
                })
            }
        };
        let spec = ScenarioSpec {
            id,
            ego_init_speed: self.scenario.ego_init_speed,
            init_gap: self.scenario.init_gap,
            lead_init_speed: self.scenario.lead_init_speed,
            lead_profile,
            side,
            road,
            friction: self.scenario.friction,
            speed_limit: self.scenario.speed_limit,
        };
        spec.validate()?;
        Ok(spec)
    }
}
