//! Operator waypoint paths: interpolation, arc-length sampling, corridor
//! boundaries, kinematic feasibility and the editing operations.
//!
//! A path is a natural quintic spline with chord-length knot spacing,
//! replaced by the natural cubic when the quintic degenerates. The
//! interpolation is global: editing any waypoint may move every sample, so
//! each edit rebuilds the whole spline from its waypoint list.

mod edit;
mod feasibility;
mod spline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{closest_on_segment, Vec2};
use spline::{gauss_legendre, ParametricSpline};

pub use edit::{
    append_waypoint, delete_last_waypoint, move_waypoint, EditGuard, PathEdit, WaypointPath,
};
pub use feasibility::{check_feasibility, FeasibilityReport, FeasibilitySegment};

/// Arc-length spacing of path samples (meters).
pub const DS_SAMPLE: f64 = 0.01;

/// Minimum distance between consecutive waypoints (meters).
pub const MIN_SPACING: f64 = 0.05;

/// Quadrature pieces per spline span for arc-length integration.
const PIECES_PER_SPAN: usize = 16;

pub type Waypoint = Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("a path needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("degenerate waypoint at index {index}: {reason}")]
    DegenerateInput { index: usize, reason: String },
    #[error("path is frozen while the vehicle is moving")]
    PathFrozen,
    #[error("waypoint index {index} out of range for {len} waypoints")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("waypoint {index} has already been passed by the vehicle")]
    PassedWaypointImmutable { index: usize },
    #[error("corridor width must be finite and > 0, got {0}")]
    InvalidWidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// Arc length from the path start.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Signed curvature, positive for left turns.
    pub curvature: f64,
}

impl PathSample {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Unit left normal.
    pub fn normal(&self) -> Vec2 {
        Vec2::from_angle(self.heading).perp()
    }
}

/// Immutable interpolated path with arc-length samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpline {
    waypoints: Vec<Waypoint>,
    waypoint_s: Vec<f64>,
    samples: Vec<PathSample>,
    total_length: f64,
}

/// Closest point on the sampled centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub s: f64,
    /// Positive on the left of the path direction.
    pub lateral_offset: f64,
    pub distance: f64,
}

pub(crate) fn validate_waypoints(waypoints: &[Waypoint]) -> Result<(), PathError> {
    for (index, p) in waypoints.iter().enumerate() {
        if !p.is_finite() {
            return Err(PathError::DegenerateInput {
                index,
                reason: "non-finite coordinate".into(),
            });
        }
    }
    for (i, w) in waypoints.windows(2).enumerate() {
        let d = w[0].distance(w[1]);
        if d < MIN_SPACING {
            return Err(PathError::DegenerateInput {
                index: i + 1,
                reason: format!("{d:.4} m from previous waypoint, minimum is {MIN_SPACING} m"),
            });
        }
    }
    Ok(())
}

/// Interpolates the waypoints and samples the curve every [`DS_SAMPLE`] of arc length.
pub fn build_spline(waypoints: &[Waypoint]) -> Result<PathSpline, PathError> {
    if waypoints.len() < 2 {
        return Err(PathError::TooFewWaypoints(waypoints.len()));
    }
    validate_waypoints(waypoints)?;

    let curve = ParametricSpline::through(waypoints);

    // Piece table: (span, u_start, u_end, cumulative length at u_start).
    let mut pieces = Vec::with_capacity(curve.span_count() * PIECES_PER_SPAN);
    let mut waypoint_s = Vec::with_capacity(waypoints.len());
    let mut total = 0.0;
    waypoint_s.push(0.0);
    for span in 0..curve.span_count() {
        let (t0, t1) = curve.span_range(span);
        let h = t1 - t0;
        for k in 0..PIECES_PER_SPAN {
            let u0 = h * k as f64 / PIECES_PER_SPAN as f64;
            let u1 = h * (k + 1) as f64 / PIECES_PER_SPAN as f64;
            let len = gauss_legendre(|u| curve.speed(span, u), u0, u1);
            pieces.push((span, u0, u1, total));
            total += len;
        }
        waypoint_s.push(total);
    }

    let intervals = ((total / DS_SAMPLE) - 1e-9).ceil().max(1.0) as usize;
    let mut samples = Vec::with_capacity(intervals + 1);
    let mut piece = 0;
    for k in 0..=intervals {
        let target = if k == intervals {
            total
        } else {
            k as f64 * DS_SAMPLE
        };
        while piece + 1 < pieces.len() && pieces[piece + 1].3 <= target {
            piece += 1;
        }
        let (span, u0, u1, base) = pieces[piece];
        let u = invert_arc_length(&curve, span, u0, u1, target - base);
        let pt = curve.eval_span(span, u);
        samples.push(PathSample {
            s: target,
            x: pt.pos.x,
            y: pt.pos.y,
            heading: pt.heading(),
            curvature: pt.curvature(),
        });
    }

    Ok(PathSpline {
        waypoints: waypoints.to_vec(),
        waypoint_s,
        samples,
        total_length: total,
    })
}

/// Finds `u` in `[u0, u1]` whose arc length from `u0` equals `target`.
fn invert_arc_length(curve: &ParametricSpline, span: usize, u0: f64, u1: f64, target: f64) -> f64 {
    if target <= 0.0 {
        return u0;
    }
    let piece_len = gauss_legendre(|u| curve.speed(span, u), u0, u1);
    if target >= piece_len {
        return u1;
    }
    let (mut lo, mut hi) = (u0, u1);
    let mut u = u0 + (u1 - u0) * target / piece_len;
    for _ in 0..50 {
        let f = gauss_legendre(|v| curve.speed(span, v), u0, u) - target;
        if f.abs() < 1e-14 {
            break;
        }
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let speed = curve.speed(span, u);
        let newton = u - f / speed;
        u = if speed > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    u
}

impl PathSpline {
    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    /// Arc length at each waypoint.
    pub fn waypoint_s(&self) -> &[f64] {
        &self.waypoint_s
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn start(&self) -> Vec2 {
        self.samples[0].position()
    }

    pub fn end(&self) -> Vec2 {
        self.samples[self.samples.len() - 1].position()
    }

    /// Position on the sampled centerline at arc length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.total_length);
        let i = self.segment_index(s);
        let a = &self.samples[i];
        let b = &self.samples[i + 1];
        let t = if b.s > a.s {
            (s - a.s) / (b.s - a.s)
        } else {
            0.0
        };
        a.position().lerp(b.position(), t)
    }

    fn segment_index(&self, s: f64) -> usize {
        let n = self.samples.len();
        match self
            .samples
            .binary_search_by(|p| p.s.partial_cmp(&s).expect("finite arc length"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Nearest point on the sampled centerline. Ties resolve to the smallest arc length.
    pub fn project(&self, point: Vec2) -> Projection {
        self.project_range(point, 0, self.samples.len() - 1)
    }

    /// Like [`PathSpline::project`], restricted to `[s_min, s_max]`.
    pub fn project_window(&self, point: Vec2, s_min: f64, s_max: f64) -> Projection {
        let lo = self.segment_index(s_min.max(0.0));
        let hi = (self.segment_index(s_max.min(self.total_length)) + 1).min(self.samples.len() - 1);
        self.project_range(point, lo, hi.max(lo + 1))
    }

    fn project_range(&self, point: Vec2, first: usize, last: usize) -> Projection {
        let mut best = Projection {
            s: self.samples[first].s,
            lateral_offset: 0.0,
            distance: f64::INFINITY,
        };
        for i in first..last {
            let a = &self.samples[i];
            let b = &self.samples[i + 1];
            let (foot, t) = closest_on_segment(point, a.position(), b.position());
            let d = point.distance(foot);
            if d < best.distance {
                let dir = b.position() - a.position();
                let side = dir.cross(point - foot);
                best = Projection {
                    s: a.s + t * (b.s - a.s),
                    lateral_offset: if side < 0.0 { -d } else { d },
                    distance: d,
                };
            }
        }
        best
    }

    /// Corridor boundary polylines at `±width / 2` along the sample normals.
    pub fn offset_boundaries(&self, width: f64) -> Result<Boundaries, PathError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(PathError::InvalidWidth(width));
        }
        let half = width / 2.0;
        let mut left = Vec::with_capacity(self.samples.len());
        let mut right = Vec::with_capacity(self.samples.len());
        let mut self_intersecting = false;
        for p in &self.samples {
            let n = p.normal();
            left.push(p.position() + n * half);
            right.push(p.position() - n * half);
            if p.curvature.abs() * half > 1.0 {
                self_intersecting = true;
            }
        }
        Ok(Boundaries {
            left,
            right,
            self_intersecting,
        })
    }
}

/// Free-function form of [`PathSpline::offset_boundaries`].
pub fn offset_boundaries(spline: &PathSpline, width: f64) -> Result<Boundaries, PathError> {
    spline.offset_boundaries(width)
}

/// Free-function form of [`PathSpline::project`].
pub fn project(spline: &PathSpline, point: Vec2) -> Projection {
    spline.project(point)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    pub left: Vec<Vec2>,
    pub right: Vec<Vec2>,
    /// Set when the turning radius at some sample is below `width / 2`,
    /// so the inner boundary folds over itself.
    pub self_intersecting: bool,
}
