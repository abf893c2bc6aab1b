//! Generator for the bundled loop course.
//!
//! A counterclockwise rounded rectangle, 10.5 m x 6.3 m between straight
//! centerlines with 1.5 m corner radii, about 31 m per lap. Foam cubes
//! (0.2 m) line both sides of a 1.1 m corridor every 1.5 m. The vehicle
//! starts on the bottom straight heading +x; the finish line sits 0.5 m
//! behind the start, so a lap covers about 30.5 m.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Bounds, Obstacle, Pose, WorldMap};
use crate::geom::Vec2;

const CORNER_RADIUS: f64 = 1.5;
const CUBE_HALF: f64 = 0.1;
const CUBE_OFFSET: f64 = 0.55;
const CUBE_SPACING: f64 = 1.5;
const CENTERLINE_STEP: f64 = 0.5;

enum Piece {
    Line { from: Vec2, to: Vec2 },
    Arc { center: Vec2, start_angle: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match self {
            Piece::Line { from, to } => from.distance(*to),
            Piece::Arc { .. } => CORNER_RADIUS * FRAC_PI_2,
        }
    }

    /// Position and heading at arc length `s` into the piece.
    fn at(&self, s: f64) -> (Vec2, f64) {
        match self {
            Piece::Line { from, to } => {
                let d = *to - *from;
                (from.lerp(*to, s / d.norm()), d.y.atan2(d.x))
            }
            Piece::Arc {
                center,
                start_angle,
            } => {
                let angle = start_angle + s / CORNER_RADIUS;
                (
                    *center + Vec2::from_angle(angle) * CORNER_RADIUS,
                    angle + FRAC_PI_2,
                )
            }
        }
    }
}

fn pieces() -> Vec<Piece> {
    let r = CORNER_RADIUS;
    let (w, h) = (10.5, 6.3);
    let line = |a: (f64, f64), b: (f64, f64)| Piece::Line {
        from: Vec2::new(a.0, a.1),
        to: Vec2::new(b.0, b.1),
    };
    let arc = |c: (f64, f64), start_angle: f64| Piece::Arc {
        center: Vec2::new(c.0, c.1),
        start_angle,
    };
    vec![
        line((3.0, 0.0), (w - r, 0.0)),
        arc((w - r, r), -FRAC_PI_2),
        line((w, r), (w, h - r)),
        arc((w - r, h - r), 0.0),
        line((w - r, h), (r, h)),
        arc((r, h - r), FRAC_PI_2),
        line((0.0, h - r), (0.0, r)),
        arc((r, r), PI),
        line((r, 0.0), (3.0, 0.0)),
    ]
}

/// Point and heading at arc length `s` along the whole loop.
fn along(pieces: &[Piece], mut s: f64) -> (Vec2, f64) {
    for p in pieces {
        let len = p.length();
        if s <= len {
            return p.at(s);
        }
        s -= len;
    }
    let last = pieces.last().expect("non-empty course");
    last.at(last.length())
}

pub fn default_course() -> WorldMap {
    let pieces = pieces();

    let mut centerline = vec![pieces[0].at(0.0).0];
    for p in &pieces {
        let n = (p.length() / CENTERLINE_STEP).ceil() as usize;
        for k in 1..=n {
            centerline.push(p.at(p.length() * k as f64 / n as f64).0);
        }
    }

    let total: f64 = pieces.iter().map(Piece::length).sum();
    let mut obstacles = Vec::new();
    let mut s = CUBE_SPACING / 2.0;
    while s < total {
        let (c, heading) = along(&pieces, s);
        let normal = Vec2::from_angle(heading).perp();
        for side in [1.0, -1.0] {
            obstacles.push(Obstacle {
                center: c + normal * (side * CUBE_OFFSET),
                half_extents: Vec2::new(CUBE_HALF, CUBE_HALF),
                rotation_rad: heading,
            });
        }
        s += CUBE_SPACING;
    }

    let gate = CUBE_OFFSET - CUBE_HALF;
    WorldMap {
        name: "default-loop".into(),
        bounds: Bounds {
            min: Vec2::new(-2.0, -2.0),
            max: Vec2::new(12.5, 8.3),
        },
        start_pose: Pose {
            x: 3.0,
            y: 0.0,
            heading: 0.0,
        },
        finish_line: [Vec2::new(2.5, gate), Vec2::new(2.5, -gate)],
        obstacles,
        reference_centerline: Some(centerline),
    }
}
