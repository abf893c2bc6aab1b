use serde::{Deserialize, Serialize};

use super::{build_spline, validate_waypoints, PathError, PathSpline, Waypoint};

/// Vehicle-side conditions under which an edit is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditGuard {
    /// Reject every edit while the vehicle moves.
    pub freeze_while_moving: bool,
    /// Arc-length progress of the vehicle when it is moving, `None` at rest.
    pub driving: Option<f64>,
}

impl EditGuard {
    pub const IDLE: EditGuard = EditGuard {
        freeze_while_moving: true,
        driving: None,
    };

    pub fn is_frozen(&self) -> bool {
        self.freeze_while_moving && self.driving.is_some()
    }

    fn check_frozen(&self) -> Result<(), PathError> {
        if self.is_frozen() {
            Err(PathError::PathFrozen)
        } else {
            Ok(())
        }
    }
}

impl Default for EditGuard {
    fn default() -> Self {
        Self::IDLE
    }
}

pub fn append_waypoint(
    spline: &PathSpline,
    p: Waypoint,
    guard: &EditGuard,
) -> Result<PathSpline, PathError> {
    guard.check_frozen()?;
    let mut pts = spline.waypoints().to_vec();
    pts.push(p);
    build_spline(&pts)
}

pub fn move_waypoint(
    spline: &PathSpline,
    index: usize,
    p: Waypoint,
    guard: &EditGuard,
) -> Result<PathSpline, PathError> {
    let len = spline.waypoints().len();
    if index >= len {
        return Err(PathError::IndexOutOfRange { index, len });
    }
    guard.check_frozen()?;
    if let Some(progress) = guard.driving {
        if spline.waypoint_s()[index] <= progress {
            return Err(PathError::PassedWaypointImmutable { index });
        }
    }
    let mut pts = spline.waypoints().to_vec();
    pts[index] = p;
    build_spline(&pts)
}

/// Removes the last waypoint. Returns `None` when fewer than two remain.
pub fn delete_last_waypoint(
    spline: &PathSpline,
    guard: &EditGuard,
) -> Result<Option<PathSpline>, PathError> {
    guard.check_frozen()?;
    let pts = spline.waypoints();
    if pts.len() <= 2 {
        return Ok(None);
    }
    build_spline(&pts[..pts.len() - 1]).map(Some)
}

/// Operator edit carried by a `PathSet` message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PathEdit {
    Replace { waypoints: Vec<Waypoint> },
    Append { point: Waypoint },
    Move { index: usize, point: Waypoint },
    DeleteLast,
    Clear,
}

/// Waypoint list of any length plus its spline once two or more points exist.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaypointPath {
    waypoints: Vec<Waypoint>,
    spline: Option<PathSpline>,
}

impl WaypointPath {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self, PathError> {
        if waypoints.len() >= 2 {
            let spline = build_spline(&waypoints)?;
            Ok(Self {
                waypoints,
                spline: Some(spline),
            })
        } else {
            validate_waypoints(&waypoints)?;
            Ok(Self {
                waypoints,
                spline: None,
            })
        }
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn spline(&self) -> Option<&PathSpline> {
        self.spline.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.spline.is_none()
    }

    /// Applies an edit, producing a new path. The receiver is left untouched.
    pub fn apply(&self, edit: &PathEdit, guard: &EditGuard) -> Result<WaypointPath, PathError> {
        match (edit, &self.spline) {
            (PathEdit::Append { point }, Some(spline)) => {
                let spline = append_waypoint(spline, *point, guard)?;
                Ok(Self::from_spline(spline))
            }
            (PathEdit::Move { index, point }, Some(spline)) => {
                let spline = move_waypoint(spline, *index, *point, guard)?;
                Ok(Self::from_spline(spline))
            }
            (PathEdit::DeleteLast, Some(spline)) => match delete_last_waypoint(spline, guard)? {
                Some(spline) => Ok(Self::from_spline(spline)),
                None => Self::new(self.waypoints[..self.waypoints.len() - 1].to_vec()),
            },
            (edit, _) => {
                guard.check_frozen()?;
                let mut pts = self.waypoints.clone();
                match edit {
                    PathEdit::Replace { waypoints } => pts = waypoints.clone(),
                    PathEdit::Append { point } => pts.push(*point),
                    PathEdit::Move { index, point } => {
                        let len = pts.len();
                        *pts.get_mut(*index)
                            .ok_or(PathError::IndexOutOfRange { index: *index, len })? = *point;
                    }
                    PathEdit::DeleteLast => {
                        pts.pop();
                    }
                    PathEdit::Clear => pts.clear(),
                }
                Self::new(pts)
            }
        }
    }

    fn from_spline(spline: PathSpline) -> Self {
        Self {
            waypoints: spline.waypoints().to_vec(),
            spline: Some(spline),
        }
    }
}
