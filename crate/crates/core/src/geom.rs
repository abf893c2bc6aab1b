//! Planar geometry shared by the path, vehicle and world modules.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in the world frame (meters). Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotated by +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Closest point to `p` on segment `a..b` and its parameter in [0, 1].
pub fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (Vec2, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.distance(closest_on_segment(p, a, b).0)
}

/// Rectangle with arbitrary orientation, used for obstacles and vehicle footprints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Vec2,
    pub half_extents: Vec2,
    pub rotation: f64,
}

impl OrientedRect {
    pub fn new(center: Vec2, half_extents: Vec2, rotation: f64) -> Self {
        Self {
            center,
            half_extents,
            rotation,
        }
    }

    /// Local x and y axes in the world frame.
    pub fn axes(&self) -> [Vec2; 2] {
        let ax = Vec2::from_angle(self.rotation);
        [ax, ax.perp()]
    }

    /// Corners in counterclockwise order starting at local (-hx, -hy).
    pub fn corners(&self) -> [Vec2; 4] {
        let [ax, ay] = self.axes();
        let x = ax * self.half_extents.x;
        let y = ay * self.half_extents.y;
        let c = self.center;
        [c - x - y, c + x - y, c + x + y, c - x + y]
    }

    pub fn bounding_radius(&self) -> f64 {
        self.half_extents.norm()
    }

    fn project_onto(corners: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
        let mut min = corners[0].dot(axis);
        let mut max = min;
        for c in &corners[1..] {
            let p = c.dot(axis);
            min = min.min(p);
            max = max.max(p);
        }
        (min, max)
    }

    /// Separating-axis overlap test. Touching rectangles overlap.
    pub fn overlaps(&self, other: &OrientedRect) -> bool {
        let gap = self.center.distance(other.center);
        if gap > self.bounding_radius() + other.bounding_radius() {
            return false;
        }
        let a = self.corners();
        let b = other.corners();
        for axis in self.axes().into_iter().chain(other.axes()) {
            let (min_a, max_a) = Self::project_onto(&a, axis);
            let (min_b, max_b) = Self::project_onto(&b, axis);
            if max_a < min_b || max_b < min_a {
                return false;
            }
        }
        true
    }

    /// Closed containment test in the rectangle's local frame.
    pub fn contains(&self, p: Vec2) -> bool {
        let local = (p - self.center).rotate(-self.rotation);
        local.x.abs() <= self.half_extents.x && local.y.abs() <= self.half_extents.y
    }

    /// Euclidean distance between the two rectangles, 0 when they overlap.
    pub fn distance(&self, other: &OrientedRect) -> f64 {
        if self.overlaps(other) {
            return 0.0;
        }
        let a = self.corners();
        let b = other.corners();
        let mut best = f64::INFINITY;
        for (poly, edges) in [(&a, &b), (&b, &a)] {
            for &p in poly.iter() {
                for i in 0..4 {
                    best = best.min(point_segment_distance(p, edges[i], edges[(i + 1) % 4]));
                }
            }
        }
        best
    }

    /// Distance from a point to the rectangle, 0 inside.
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let local = (p - self.center).rotate(-self.rotation);
        let dx = (local.x.abs() - self.half_extents.x).max(0.0);
        let dy = (local.y.abs() - self.half_extents.y).max(0.0);
        dx.hypot(dy)
    }
}
