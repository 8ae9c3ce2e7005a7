//! Road and lane geometry: piecewise straight/arc centerlines with arc-length
//! parameterization and point projection.

use crate::error::{Result, SimError};
use crate::units;
use serde::{Deserialize, Serialize};

/// One centerline piece. Arcs carry a signed sweep angle: positive turns left.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    Straight { len: f64 },
    Arc { radius: f64, angle_deg: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    kind: SegmentKind,
    /// Start pose of the segment.
    x: f64,
    y: f64,
    heading: f64,
    /// Arc length at the segment start.
    s0: f64,
    len: f64,
}

/// A pose on the centerline.
#[derive(Debug, Clone, Copy)]
pub struct CenterlinePose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Signed curvature (1/m), positive for left turns.
    pub curvature: f64,
}

/// Lane-relative position of a vehicle footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LateralPosition {
    InLane {
        /// Signed center offset (m), positive toward the left lane line.
        offset: f64,
        /// Distance from the left vehicle side to the left lane line.
        left: f64,
        /// Distance from the right vehicle side to the right lane line.
        right: f64,
    },
    /// Center of the vehicle has left its lane; A2 evidence.
    OutOfRoad { offset: f64 },
}

#[derive(Debug, Clone)]
pub struct LaneGeometry {
    segments: Vec<Segment>,
    pub lane_width: f64,
    pub lane_count: u32,
    total_len: f64,
}

impl LaneGeometry {
    pub fn new(kinds: &[SegmentKind], lane_width: f64, lane_count: u32) -> Result<Self> {
        if kinds.is_empty() {
            return Err(SimError::config("road needs at least one segment"));
        }
        if lane_width <= 0.0 || lane_count < 1 {
            return Err(SimError::config("invalid lane width or count"));
        }
        let min_radius = 1.0 / units::kappa_max();
        let mut segments = Vec::with_capacity(kinds.len());
        let (mut x, mut y, mut heading, mut s0) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for kind in kinds {
            let len = match *kind {
                SegmentKind::Straight { len } => {
                    if len <= 0.0 {
                        return Err(SimError::config("straight segment length must be > 0"));
                    }
                    len
                }
                SegmentKind::Arc { radius, angle_deg } => {
                    if radius < min_radius {
                        return Err(SimError::config(format!(
                            "arc radius {radius} below minimum turning radius {min_radius:.1}"
                        )));
                    }
                    if angle_deg == 0.0 {
                        return Err(SimError::config("arc sweep angle must be nonzero"));
                    }
                    radius * angle_deg.to_radians().abs()
                }
            };
            segments.push(Segment {
                kind: *kind,
                x,
                y,
                heading,
                s0,
                len,
            });
            let end = Self::pose_on_segment(segments.last().unwrap(), len);
            x = end.x;
            y = end.y;
            heading = end.heading;
            s0 += len;
        }
        Ok(LaneGeometry {
            segments,
            lane_width,
            lane_count,
            total_len: s0,
        })
    }

    /// A long straight road.
    pub fn straight(len: f64) -> Self {
        Self::new(&[SegmentKind::Straight { len }], units::LANE_WIDTH, 2).unwrap()
    }

    pub fn total_len(&self) -> f64 {
        self.total_len
    }

    fn pose_on_segment(seg: &Segment, d: f64) -> CenterlinePose {
        match seg.kind {
            SegmentKind::Straight { .. } => CenterlinePose {
                x: seg.x + seg.heading.cos() * d,
                y: seg.y + seg.heading.sin() * d,
                heading: seg.heading,
                curvature: 0.0,
            },
            SegmentKind::Arc { radius, angle_deg } => {
                let left = angle_deg > 0.0;
                let phi = d / radius;
                if left {
                    let cx = seg.x - seg.heading.sin() * radius;
                    let cy = seg.y + seg.heading.cos() * radius;
                    let h = seg.heading + phi;
                    CenterlinePose {
                        x: cx + h.sin() * radius,
                        y: cy - h.cos() * radius,
                        heading: h,
                        curvature: 1.0 / radius,
                    }
                } else {
                    let cx = seg.x + seg.heading.sin() * radius;
                    let cy = seg.y - seg.heading.cos() * radius;
                    let h = seg.heading - phi;
                    CenterlinePose {
                        x: cx - h.sin() * radius,
                        y: cy + h.cos() * radius,
                        heading: h,
                        curvature: -1.0 / radius,
                    }
                }
            }
        }
    }

    /// Centerline pose at arc length `s`, clamped to the road extent.
    pub fn pose_at(&self, s: f64) -> CenterlinePose {
        let s = s.clamp(0.0, self.total_len);
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|seg| s >= seg.s0)
            .unwrap_or(&self.segments[0]);
        Self::pose_on_segment(seg, (s - seg.s0).min(seg.len))
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.pose_at(s).curvature
    }

    /// Project a point onto the centerline: returns (arc length, signed
    /// lateral offset, positive left of travel direction). `None` when the
    /// point is beyond one lane width of every centerline point.
    pub fn project(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for seg in &self.segments {
            let cand = match seg.kind {
                SegmentKind::Straight { .. } => {
                    let (dx, dy) = (x - seg.x, y - seg.y);
                    let (cx, sx) = (seg.heading.cos(), seg.heading.sin());
                    let along = (dx * cx + dy * sx).clamp(0.0, seg.len);
                    let lat = -dx * sx + dy * cx;
                    (seg.s0 + along, lat)
                }
                SegmentKind::Arc { radius, angle_deg } => {
                    let left = angle_deg > 0.0;
                    let (cx, cy) = if left {
                        (
                            seg.x - seg.heading.sin() * radius,
                            seg.y + seg.heading.cos() * radius,
                        )
                    } else {
                        (
                            seg.x + seg.heading.sin() * radius,
                            seg.y - seg.heading.cos() * radius,
                        )
                    };
                    let (rx, ry) = (x - cx, y - cy);
                    let dist = (rx * rx + ry * ry).sqrt();
                    // Angle of the point around the center, measured from the
                    // segment start, along the travel direction.
                    let start_ang = if left {
                        seg.heading - std::f64::consts::FRAC_PI_2
                    } else {
                        seg.heading + std::f64::consts::FRAC_PI_2
                    };
                    let point_ang = ry.atan2(rx);
                    let mut sweep = if left {
                        point_ang - start_ang
                    } else {
                        start_ang - point_ang
                    };
                    while sweep < -std::f64::consts::PI {
                        sweep += 2.0 * std::f64::consts::PI;
                    }
                    while sweep > std::f64::consts::PI {
                        sweep -= 2.0 * std::f64::consts::PI;
                    }
                    let sweep = sweep.clamp(0.0, seg.len / radius);
                    let lat = if left { radius - dist } else { dist - radius };
                    (seg.s0 + sweep * radius, lat)
                }
            };
            // Distance to the actual clamped centerline point so endpoint
            // clamping does not under-report lateral error.
            let pose = Self::pose_on_segment(seg, cand.0 - seg.s0);
            let dist = ((x - pose.x).powi(2) + (y - pose.y).powi(2)).sqrt();
            let lat = if cand.1 < 0.0 { -dist } else { dist };
            if best.is_none_or(|(_, blat)| dist < blat.abs()) {
                best = Some((cand.0, lat));
            }
        }
        let (s, lat) = best?;
        if lat.abs() > self.lane_width {
            None
        } else {
            Some((s, lat))
        }
    }

    /// Lane-line distances for a vehicle of the given width centered at the
    /// signed offset. `left + right + width == lane_width` holds in-lane.
    pub fn lateral_position(&self, offset: f64, width: f64) -> LateralPosition {
        let half = self.lane_width / 2.0;
        if offset.abs() > half {
            return LateralPosition::OutOfRoad { offset };
        }
        LateralPosition::InLane {
            offset,
            left: half - offset - width / 2.0,
            right: half + offset - width / 2.0,
        }
    }
}
