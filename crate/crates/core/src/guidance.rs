//! Carrot-chasing path following over a waypoint list.
//!
//! The vehicle is projected onto the current segment, a virtual target (the
//! carrot) is placed `carrot_delta` metres further along the segment, and the
//! desired heading points from the vehicle to the carrot. Cross-track error is
//! positive when the vehicle is left of the w1 -> w2 direction.

use serde::{Deserialize, Serialize};

use crate::math::{wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    w1: Vec2,
    w2: Vec2,
}

impl PathSegment {
    /// Returns `None` for a degenerate (zero-length) segment.
    pub fn new(w1: Vec2, w2: Vec2) -> Option<Self> {
        ((w2 - w1).norm() > 0.0).then_some(Self { w1, w2 })
    }

    pub fn start(&self) -> Vec2 {
        self.w1
    }

    pub fn end(&self) -> Vec2 {
        self.w2
    }

    pub fn length(&self) -> f64 {
        (self.w2 - self.w1).norm()
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        self.w1 + (self.w2 - self.w1) * s
    }

    pub fn cross_track(&self, p: Vec2) -> f64 {
        let d = self.w2 - self.w1;
        let r = p - self.w1;
        (d.x * r.y - d.y * r.x) / d.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceParams {
    pub carrot_delta: f64,
    pub accept_radius: f64,
    pub cruise_speed: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            carrot_delta: 3.0,
            accept_radius: 2.0,
            cruise_speed: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceOutput {
    pub heading_des: f64,
    pub speed_des: f64,
    pub cross_track: f64,
    pub segment_index: usize,
    pub mission_complete: bool,
}

/// Closest point on the finite segment and its clamped arc parameter.
pub fn project_onto_segment(p: Vec2, seg: &PathSegment) -> (Vec2, f64) {
    let d = seg.w2 - seg.w1;
    let s = ((p - seg.w1).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (seg.point_at(s), s)
}

pub fn carrot_point(p: Vec2, seg: &PathSegment, params: &GuidanceParams) -> Vec2 {
    let (_, s) = project_onto_segment(p, seg);
    seg.point_at((s + params.carrot_delta / seg.length()).min(1.0))
}

pub fn carrot_chase(p: Vec2, seg: &PathSegment, params: &GuidanceParams) -> GuidanceOutput {
    let carrot = carrot_point(p, seg, params);
    let to_carrot = carrot - p;
    // At the carrot itself any heading is valid, so fall back to the path direction.
    let dir = if to_carrot.norm() > 0.0 {
        to_carrot
    } else {
        seg.w2 - seg.w1
    };
    GuidanceOutput {
        heading_des: wrap_angle(dir.y.atan2(dir.x)),
        speed_des: params.cruise_speed,
        cross_track: seg.cross_track(p),
        segment_index: 0,
        mission_complete: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MissionProgress {
    pub index: usize,
    pub complete: bool,
}

/// Advances to the next segment once `p` is within the acceptance radius
/// (inclusive) of the current segment's end waypoint.
pub fn advance_mission(
    p: Vec2,
    waypoints: &[Vec2],
    current_index: usize,
    params: &GuidanceParams,
) -> MissionProgress {
    let segments = waypoints.len().saturating_sub(1);
    if current_index >= segments {
        return MissionProgress {
            index: current_index,
            complete: true,
        };
    }
    let target = waypoints[current_index + 1];
    if (p - target).norm() <= params.accept_radius {
        let index = current_index + 1;
        MissionProgress {
            index,
            complete: index >= segments,
        }
    } else {
        MissionProgress {
            index: current_index,
            complete: false,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum MissionError {
    #[error("path needs at least one waypoint")]
    Empty,
    #[error("waypoints {0} and {1} coincide")]
    DegenerateSegment(usize, usize),
}

/// A waypoint route plus the segment currently being tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    waypoints: Vec<Vec2>,
    index: usize,
    complete: bool,
    last: Option<GuidanceOutput>,
}

impl Mission {
    /// Builds a route. A single waypoint is reached along a segment from `start`.
    pub fn new(start: Vec2, waypoints: &[Vec2]) -> Result<Self, MissionError> {
        let route: Vec<Vec2> = match waypoints.len() {
            0 => return Err(MissionError::Empty),
            1 => vec![start, waypoints[0]],
            _ => waypoints.to_vec(),
        };
        for i in 0..route.len() - 1 {
            if PathSegment::new(route[i], route[i + 1]).is_none() {
                return Err(MissionError::DegenerateSegment(i, i + 1));
            }
        }
        Ok(Self {
            waypoints: route,
            index: 0,
            complete: false,
            last: None,
        })
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn segment(&self, index: usize) -> PathSegment {
        let i = index.min(self.waypoints.len() - 2);
        PathSegment::new(self.waypoints[i], self.waypoints[i + 1])
            .expect("validated in Mission::new")
    }

    /// Segment being tracked; the last one once the mission is complete.
    pub fn current_segment(&self) -> PathSegment {
        self.segment(self.index)
    }

    /// One guidance update: advance the segment if accepted, then chase the carrot.
    pub fn update(&mut self, p: Vec2, params: &GuidanceParams) -> GuidanceOutput {
        if !self.complete {
            let progress = advance_mission(p, &self.waypoints, self.index, params);
            self.index = progress.index;
            self.complete = progress.complete;
        }
        let seg = self.segment(self.index);
        let mut out = carrot_chase(p, &seg, params);
        out.segment_index = self.index.min(self.waypoints.len() - 2);
        if self.complete {
            out.mission_complete = true;
            out.speed_des = 0.0;
            if let Some(prev) = self.last {
                out.heading_des = prev.heading_des;
            }
        }
        self.last = Some(out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn seg(a: (f64, f64), b: (f64, f64)) -> PathSegment {
        PathSegment::new(v(a.0, a.1), v(b.0, b.1)).unwrap()
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(PathSegment::new(v(1.0, 1.0), v(1.0, 1.0)).is_none());
    }

    #[test]
    fn projection_examples() {
        let (q, s) = project_onto_segment(v(5.0, 2.0), &seg((0.0, 0.0), (10.0, 0.0)));
        assert_eq!((q, s), (v(5.0, 0.0), 0.5));

        let (q, s) = project_onto_segment(v(-3.0, 1.0), &seg((0.0, 0.0), (10.0, 0.0)));
        assert_eq!((q, s), (v(0.0, 0.0), 0.0));

        let (q, s) = project_onto_segment(v(7.0, -4.0), &seg((0.0, 0.0), (6.0, 8.0)));
        assert_abs_diff_eq!(s, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(q.x, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn carrot_examples() {
        let params = GuidanceParams {
            carrot_delta: 2.0,
            ..Default::default()
        };
        let s = seg((0.0, 0.0), (10.0, 0.0));

        let out = carrot_chase(v(5.0, 2.0), &s, &params);
        assert_eq!(carrot_point(v(5.0, 2.0), &s, &params), v(7.0, 0.0));
        assert_abs_diff_eq!(out.heading_des, -FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(out.cross_track, 2.0, epsilon = 1e-12);

        let out = carrot_chase(v(3.0, 0.0), &s, &params);
        assert_eq!(carrot_point(v(3.0, 0.0), &s, &params), v(5.0, 0.0));
        assert_eq!(out.cross_track, 0.0);
        assert_eq!(out.heading_des, 0.0);

        let out = carrot_chase(v(9.5, 0.0), &s, &params);
        assert_eq!(carrot_point(v(9.5, 0.0), &s, &params), v(10.0, 0.0));
        assert_eq!(out.heading_des, 0.0);
    }

    #[test]
    fn right_of_path_is_negative() {
        let out = carrot_chase(
            v(5.0, -1.5),
            &seg((0.0, 0.0), (10.0, 0.0)),
            &GuidanceParams::default(),
        );
        assert_abs_diff_eq!(out.cross_track, -1.5, epsilon = 1e-12);
    }

    #[test]
    fn mission_advance_examples() {
        let params = GuidanceParams::default();
        let wps = [v(0.0, 0.0), v(10.0, 0.0)];
        assert_eq!(
            advance_mission(v(9.0, 0.5), &wps, 0, &params),
            MissionProgress {
                index: 1,
                complete: true
            }
        );
        assert_eq!(
            advance_mission(v(2.0, 0.0), &wps, 0, &params),
            MissionProgress {
                index: 0,
                complete: false
            }
        );

        let wps = [v(0.0, 0.0), v(10.0, 0.0), v(10.0, 10.0)];
        let p = v(10.0 - params.accept_radius, 0.0);
        assert_eq!(
            advance_mission(p, &wps, 0, &params),
            MissionProgress {
                index: 1,
                complete: false
            }
        );
    }

    #[test]
    fn completed_mission_commands_zero_speed() {
        let params = GuidanceParams::default();
        let mut m = Mission::new(v(0.0, 0.0), &[v(0.0, 0.0), v(10.0, 0.0)]).unwrap();
        let out = m.update(v(5.0, 0.0), &params);
        assert!(!out.mission_complete);
        assert_eq!(out.speed_des, params.cruise_speed);
        let out = m.update(v(9.0, 0.0), &params);
        assert!(out.mission_complete && m.is_complete());
        assert_eq!(out.speed_des, 0.0);
    }

    #[test]
    fn single_waypoint_route_starts_at_vehicle() {
        let m = Mission::new(v(1.0, 2.0), &[v(20.0, 2.0)]).unwrap();
        assert_eq!(m.waypoints(), &[v(1.0, 2.0), v(20.0, 2.0)]);
        assert_eq!(Mission::new(v(0.0, 0.0), &[]), Err(MissionError::Empty));
        assert_eq!(
            Mission::new(v(0.0, 0.0), &[v(1.0, 1.0), v(1.0, 1.0)]),
            Err(MissionError::DegenerateSegment(0, 1))
        );
    }

    proptest! {
        #[test]
        fn carrot_geometry_invariants(
            ax in -50.0f64..50.0, ay in -50.0f64..50.0,
            bx in -50.0f64..50.0, by in -50.0f64..50.0,
            px in -80.0f64..80.0, py in -80.0f64..80.0,
            delta in 0.1f64..10.0,
        ) {
            let Some(s) = PathSegment::new(v(ax, ay), v(bx, by)) else { return Ok(()); };
            prop_assume!(s.length() > 1e-3);
            let params = GuidanceParams { carrot_delta: delta, ..Default::default() };
            let p = v(px, py);
            let c = carrot_point(p, &s, &params);

            // carrot lies on the finite segment
            let (qc, _) = project_onto_segment(c, &s);
            prop_assert!((qc - c).norm() < 1e-9 * (1.0 + s.length()));

            // |cross_track| is the distance to the infinite line
            let d = (s.end() - s.start()).normalize();
            let foot = s.start() + d * (p - s.start()).dot(&d);
            let out = carrot_chase(p, &s, &params);
            prop_assert!((out.cross_track.abs() - (p - foot).norm()).abs() < 1e-9 * (1.0 + (p - foot).norm()));

            // heading points toward the carrot
            if (c - p).norm() > 1e-9 {
                let h = v(out.heading_des.cos(), out.heading_des.sin());
                prop_assert!(h.dot(&(c - p)) > 0.0);
            }
        }
    }
}
