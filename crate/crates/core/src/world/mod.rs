//! Premapped environment: bounds, box obstacles, start pose, finish line and
//! an optional reference centerline for scripted operators.

mod course;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{OrientedRect, Vec2};

pub use course::default_course;

pub const MAP_FORMAT: &str = "telepath-map/1";

/// The bundled course, byte-identical to what [`default_course`] produces.
pub const DEFAULT_MAP_JSON: &str = include_str!("../../assets/default_map.json");

/// Maximum distance between the start pose and the first centerline point.
const CENTERLINE_START_TOLERANCE: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("map parse error: {0}")]
    Parse(String),
    #[error("invalid map field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> MapError {
    MapError::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: Vec2,
    pub half_extents: Vec2,
    pub rotation_rad: f64,
}

impl Obstacle {
    pub fn rect(&self) -> OrientedRect {
        OrientedRect::new(self.center, self.half_extents, self.rotation_rad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldMap {
    pub name: String,
    pub bounds: Bounds,
    pub start_pose: Pose,
    /// Directed segment; a valid crossing moves from its right side to its left side.
    pub finish_line: [Vec2; 2],
    pub obstacles: Vec<Obstacle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_centerline: Option<Vec<Vec2>>,
}

#[derive(Serialize)]
struct MapDocumentRef<'a> {
    format: &'a str,
    #[serde(flatten)]
    map: &'a WorldMap,
}

#[derive(Deserialize)]
struct MapDocument {
    format: String,
    #[serde(flatten)]
    map: WorldMap,
}

/// Parses and validates a map document.
pub fn load_map(text: &str) -> Result<WorldMap, MapError> {
    let doc: MapDocument =
        serde_json::from_str(text).map_err(|e| MapError::Parse(e.to_string()))?;
    if doc.format != MAP_FORMAT {
        return Err(invalid(
            "format",
            format!("expected \"{MAP_FORMAT}\", got \"{}\"", doc.format),
        ));
    }
    doc.map.validate()?;
    Ok(doc.map)
}

pub fn save_map(map: &WorldMap) -> String {
    let mut text = serde_json::to_string_pretty(&MapDocumentRef {
        format: MAP_FORMAT,
        map,
    })
    .expect("map serializes");
    text.push('\n');
    text
}

impl WorldMap {
    /// The bundled default course.
    pub fn builtin_default() -> WorldMap {
        load_map(DEFAULT_MAP_JSON).expect("bundled map is valid")
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let finite = |v: Vec2| v.is_finite();
        if !(finite(self.bounds.min) && finite(self.bounds.max)) {
            return Err(invalid("bounds", "non-finite coordinate"));
        }
        if !(self.bounds.min.x < self.bounds.max.x && self.bounds.min.y < self.bounds.max.y) {
            return Err(invalid("bounds", "min must be below max on both axes"));
        }
        let sp = &self.start_pose;
        if !(sp.x.is_finite() && sp.y.is_finite() && sp.heading.is_finite()) {
            return Err(invalid("start_pose", "non-finite value"));
        }
        if !self.bounds.contains(sp.position()) {
            return Err(invalid("start_pose", "outside bounds"));
        }
        for (i, p) in self.finish_line.iter().enumerate() {
            if !finite(*p) || !self.bounds.contains(*p) {
                return Err(invalid(format!("finish_line[{i}]"), "outside bounds"));
            }
        }
        if self.finish_line[0] == self.finish_line[1] {
            return Err(invalid("finish_line", "endpoints coincide"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(finite(o.center) && o.rotation_rad.is_finite()) {
                return Err(invalid(format!("obstacles[{i}]"), "non-finite value"));
            }
            if !(o.half_extents.x > 0.0 && o.half_extents.y > 0.0 && finite(o.half_extents)) {
                return Err(invalid(
                    format!("obstacles[{i}].half_extents"),
                    "must be strictly positive",
                ));
            }
        }
        if let Some(line) = &self.reference_centerline {
            let Some(first) = line.first() else {
                return Err(invalid("reference_centerline", "empty polyline"));
            };
            if line.iter().any(|p| !p.is_finite()) {
                return Err(invalid("reference_centerline", "non-finite coordinate"));
            }
            if first.distance(sp.position()) > CENTERLINE_START_TOLERANCE {
                return Err(invalid(
                    "reference_centerline",
                    format!("must start within {CENTERLINE_START_TOLERANCE} m of start_pose"),
                ));
            }
        }
        Ok(())
    }

    /// Indices of obstacles overlapping `fp`. Touching counts as overlap.
    pub fn collides(&self, fp: &OrientedRect) -> Vec<usize> {
        self.obstacles
            .iter()
            .enumerate()
            .filter(|(_, o)| o.rect().overlaps(fp))
            .map(|(i, _)| i)
            .collect()
    }

    /// Distance from `fp` to the nearest obstacle; `f64::INFINITY` without obstacles.
    pub fn clearance(&self, fp: &OrientedRect) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.rect().distance(fp))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when the motion `prev -> curr` crosses the finish line in its crossing direction.
    pub fn crossed_finish(&self, prev: Vec2, curr: Vec2) -> bool {
        let [a, b] = self.finish_line;
        let dir = b - a;
        let before = dir.cross(prev - a);
        let after = dir.cross(curr - a);
        if !(before < 0.0 && after >= 0.0) {
            return false;
        }
        // The motion segment must straddle (or touch) the finish segment's extent.
        let motion = curr - prev;
        let ea = motion.cross(a - prev);
        let eb = motion.cross(b - prev);
        ea * eb <= 0.0
    }
}

/// Free-function form of [`WorldMap::collides`].
pub fn collides(fp: &OrientedRect, map: &WorldMap) -> Vec<usize> {
    map.collides(fp)
}

/// Free-function form of [`WorldMap::clearance`].
pub fn clearance(fp: &OrientedRect, map: &WorldMap) -> f64 {
    map.clearance(fp)
}

/// Free-function form of [`WorldMap::crossed_finish`].
pub fn crossed_finish(prev: Vec2, curr: Vec2, map: &WorldMap) -> bool {
    map.crossed_finish(prev, curr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "format": "telepath-map/1",
            "name": "empty",
            "bounds": {"min": [-1.0, -1.0], "max": [5.0, 5.0]},
            "start_pose": {"x": 0.0, "y": 0.0, "heading": 0.0},
            "finish_line": [[2.0, 1.0], [2.0, -1.0]],
            "obstacles": []
        }"#
    }

    fn with_box(center: Vec2, half: Vec2, rot: f64) -> WorldMap {
        let mut m = load_map(minimal()).unwrap();
        m.obstacles.push(Obstacle {
            center,
            half_extents: half,
            rotation_rad: rot,
        });
        m
    }

    #[test]
    fn minimal_map_loads() {
        let m = load_map(minimal()).unwrap();
        assert!(m.obstacles.is_empty());
        assert_eq!(m.reference_centerline, None);
        assert_eq!(
            m.clearance(&OrientedRect::new(Vec2::ZERO, Vec2::new(0.1, 0.1), 0.0)),
            f64::INFINITY
        );
    }

    #[test]
    fn negative_half_extent_names_obstacle() {
        let text = minimal().replace(
            r#""obstacles": []"#,
            r#""obstacles": [
                {"center": [3.0, 3.0], "half_extents": [0.1, 0.1], "rotation_rad": 0.0},
                {"center": [4.0, 3.0], "half_extents": [-0.1, 0.1], "rotation_rad": 0.0}
            ]"#,
        );
        match load_map(&text) {
            Err(MapError::Validation { field, .. }) => {
                assert_eq!(field, "obstacles[1].half_extents")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_wrong_format() {
        assert!(matches!(load_map("{"), Err(MapError::Parse(_))));
        let text = minimal().replace("telepath-map/1", "other/2");
        assert!(
            matches!(load_map(&text), Err(MapError::Validation { field, .. }) if field == "format")
        );
        let text = minimal().replace(r#""x": 0.0"#, r#""x": 9.0"#);
        assert!(
            matches!(load_map(&text), Err(MapError::Validation { field, .. }) if field == "start_pose")
        );
    }

    #[test]
    fn centerline_must_start_near_start_pose() {
        let mut m = load_map(minimal()).unwrap();
        m.reference_centerline = Some(vec![Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]);
        assert!(
            matches!(m.validate(), Err(MapError::Validation { field, .. }) if field == "reference_centerline")
        );
        m.reference_centerline = Some(vec![Vec2::new(0.3, 0.0), Vec2::new(2.0, 0.0)]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn save_load_roundtrip() {
        let mut m = with_box(Vec2::new(1.234_567_890_123, 0.1), Vec2::new(0.1, 0.2), 0.3);
        m.reference_centerline = Some(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0 / 3.0, 0.0)]);
        assert_eq!(load_map(&save_map(&m)).unwrap(), m);
    }

    #[test]
    fn far_obstacles_do_not_collide() {
        let m = with_box(Vec2::new(3.0, 3.0), Vec2::new(0.1, 0.1), 0.0);
        let fp = OrientedRect::new(Vec2::new(0.25, 0.0), Vec2::new(0.25, 0.1), 0.0);
        assert!(m.collides(&fp).is_empty());
        assert!(m.clearance(&fp) > 1.0);
    }

    #[test]
    fn corner_to_corner_touch_collides() {
        let m = with_box(Vec2::new(1.0, 1.0), Vec2::new(0.5, 0.5), 0.0);
        let fp = OrientedRect::new(Vec2::ZERO, Vec2::new(0.5, 0.5), 0.0);
        assert_eq!(m.collides(&fp), vec![0]);
        assert_eq!(m.clearance(&fp), 0.0);
    }

    #[test]
    fn parallel_edges_clearance() {
        // Footprint edge at x = 1, obstacle edge at x = 1.4.
        let m = with_box(Vec2::new(1.6, 0.0), Vec2::new(0.2, 0.5), 0.0);
        let fp = OrientedRect::new(Vec2::new(0.5, 0.0), Vec2::new(0.5, 0.2), 0.0);
        assert!((m.clearance(&fp) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn finish_crossing_is_directional() {
        let m = load_map(minimal()).unwrap();
        assert!(m.crossed_finish(Vec2::new(1.9, 0.0), Vec2::new(2.1, 0.0)));
        assert!(!m.crossed_finish(Vec2::new(2.1, 0.0), Vec2::new(1.9, 0.0)));
        assert!(!m.crossed_finish(Vec2::new(1.0, 0.5), Vec2::new(1.5, 0.5)));
        // Beyond the finish segment's extent.
        assert!(!m.crossed_finish(Vec2::new(1.9, 3.0), Vec2::new(2.1, 3.0)));
        // Landing exactly on the line counts once.
        assert!(m.crossed_finish(Vec2::new(1.9, 0.0), Vec2::new(2.0, 0.0)));
        assert!(!m.crossed_finish(Vec2::new(2.0, 0.0), Vec2::new(2.1, 0.0)));
    }

    #[test]
    fn bundled_map_matches_generator() {
        assert_eq!(WorldMap::builtin_default(), default_course());
        assert_eq!(save_map(&default_course()), DEFAULT_MAP_JSON);
    }
}
