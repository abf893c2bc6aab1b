//! Path tracking for sequential guidance, operator speed setpoints and the
//! direct-control command mapping.
//!
//! Sequential guidance steers with pure pursuit toward a goal point a fixed
//! arc length ahead of the vehicle's projection onto the path. Speed follows
//! the operator setpoint but always yields to end-of-path braking, so the
//! vehicle comes to rest on the path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, Vec2};
use crate::path::{PathSpline, Projection};
use crate::vehicle::{self, ControlInput, VehicleError, VehicleParams, VehicleState};

pub const DEFAULT_LOOKAHEAD: f64 = 0.6;
pub const DEFAULT_STEP_DV: f64 = 0.05;
/// Extra distance added to the stopping distance before end-of-path braking.
pub const END_MARGIN: f64 = 0.01;
/// Prediction horizon for [`simulate_tracking`] (seconds).
pub const T_MAX: f64 = 600.0;
/// Proportional speed gain (1/s) before clamping to the actuator limits.
const SPEED_GAIN: f64 = 10.0;
/// Projection search window around the current progress.
const WINDOW_BEHIND: f64 = 0.25;
const WINDOW_AHEAD: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("no drivable path")]
    EmptyPath,
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
}

/// Operator speed request in sequential mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSetpoint {
    pub target_v: f64,
    pub step_dv: f64,
}

impl SpeedSetpoint {
    pub fn new(step_dv: f64) -> Self {
        Self {
            target_v: 0.0,
            step_dv,
        }
    }

    pub fn at(target_v: f64, step_dv: f64) -> Self {
        Self { target_v, step_dv }
    }
}

impl Default for SpeedSetpoint {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_DV)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedEvent {
    Accelerate,
    Decelerate,
}

/// Steps the setpoint by one quantum, clamped to `[0, v_max]`.
pub fn update_setpoint(
    sp: SpeedSetpoint,
    event: SpeedEvent,
    params: &VehicleParams,
) -> SpeedSetpoint {
    let steps = (sp.target_v / sp.step_dv).round();
    let steps = match event {
        SpeedEvent::Accelerate => steps + 1.0,
        SpeedEvent::Decelerate => steps - 1.0,
    };
    SpeedSetpoint {
        target_v: (steps * sp.step_dv).clamp(0.0, params.v_max),
        step_dv: sp.step_dv,
    }
}

/// Operator-vehicle interaction concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    /// Waypoint path first, then speed commands while the vehicle tracks the path.
    Sequential,
    /// Continuous steering and pedal commands.
    Direct,
}

impl DriveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DriveMode::Sequential => "sequential",
            DriveMode::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingMode {
    SequentialIdle,
    SequentialDriving,
    Direct,
    SafetyStopping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingState {
    pub s_progress: f64,
    pub lookahead: f64,
    pub mode: TrackingMode,
}

/// Pure pursuit toward the path point `lookahead` ahead of `s_proj`.
pub fn pursuit_steering_from(
    state: &VehicleState,
    spline: &PathSpline,
    s_proj: f64,
    lookahead: f64,
    params: &VehicleParams,
) -> f64 {
    let goal = spline.point_at(s_proj + lookahead);
    let to_goal = goal - state.position();
    let alpha = wrap_angle(to_goal.y.atan2(to_goal.x) - state.heading);
    (2.0 * params.wheelbase * alpha.sin() / lookahead)
        .atan()
        .clamp(-params.max_steering, params.max_steering)
}

/// Pure pursuit steering using a global projection of the vehicle onto the path.
pub fn pure_pursuit_steering(
    state: &VehicleState,
    spline: Option<&PathSpline>,
    lookahead: f64,
    params: &VehicleParams,
) -> Result<f64, ControllerError> {
    let spline = spline.ok_or(ControllerError::EmptyPath)?;
    let s = spline.project(state.position()).s;
    Ok(pursuit_steering_from(state, spline, s, lookahead, params))
}

/// Acceleration command tracking the setpoint, overridden by end-of-path braking.
/// A zero setpoint brakes fully down to standstill.
pub fn longitudinal_accel(
    state: &VehicleState,
    sp: &SpeedSetpoint,
    remaining: f64,
    params: &VehicleParams,
) -> f64 {
    let stopping = state.v * state.v / (2.0 * params.decel) + END_MARGIN;
    if remaining <= stopping || sp.target_v == 0.0 {
        return if state.v > 0.0 { -params.decel } else { 0.0 };
    }
    (SPEED_GAIN * (sp.target_v - state.v)).clamp(-params.decel, params.accel)
}

/// Stateful path follower: keeps monotone progress along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTracker {
    lookahead: f64,
    s_progress: Option<f64>,
}

impl PathTracker {
    pub fn new(lookahead: f64) -> Self {
        Self {
            lookahead,
            s_progress: None,
        }
    }

    pub fn s_progress(&self) -> f64 {
        self.s_progress.unwrap_or(0.0)
    }

    pub fn lookahead(&self) -> f64 {
        self.lookahead
    }

    /// Updates progress from the vehicle position and returns the arc length.
    pub fn update_progress(&mut self, state: &VehicleState, spline: &PathSpline) -> f64 {
        let found = self.locate(state.position(), spline).s;
        let s = self.s_progress.map_or(found, |prev| found.max(prev));
        self.s_progress = Some(s);
        s
    }

    /// Projection onto the path near the current progress (global before the first update).
    pub fn locate(&self, p: Vec2, spline: &PathSpline) -> Projection {
        match self.s_progress {
            None => spline.project(p),
            Some(prev) => spline.project_window(p, prev - WINDOW_BEHIND, prev + WINDOW_AHEAD),
        }
    }

    /// One control tick of sequential path tracking.
    pub fn control(
        &mut self,
        state: &VehicleState,
        spline: &PathSpline,
        sp: &SpeedSetpoint,
        params: &VehicleParams,
    ) -> ControlInput {
        let s = self.update_progress(state, spline);
        let remaining = (spline.total_length() - s).max(0.0);
        ControlInput {
            steering_target: pursuit_steering_from(state, spline, s, self.lookahead, params),
            accel_cmd: longitudinal_accel(state, sp, remaining, params),
        }
    }

    pub fn remaining(&self, spline: &PathSpline) -> f64 {
        (spline.total_length() - self.s_progress()).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingConfig {
    pub lookahead: f64,
    pub dt: f64,
    pub horizon: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            lookahead: DEFAULT_LOOKAHEAD,
            dt: 0.01,
            horizon: T_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// One pose per step, starting with the initial state.
    pub poses: Vec<VehicleState>,
    /// The vehicle had not come to rest when the horizon ran out.
    pub horizon_exceeded: bool,
}

/// One control tick followed by one vehicle step.
pub fn tracking_step(
    tracker: &mut PathTracker,
    state: &VehicleState,
    spline: &PathSpline,
    sp: &SpeedSetpoint,
    params: &VehicleParams,
    dt: f64,
) -> Result<VehicleState, ControllerError> {
    let input = tracker.control(state, spline, sp, params);
    Ok(vehicle::step(state, &input, params, dt)?)
}

/// Forward-simulates path tracking under a fixed setpoint until the vehicle
/// rests at the path end (or at a zero setpoint), or the horizon runs out.
pub fn simulate_tracking(
    spline: Option<&PathSpline>,
    start: &VehicleState,
    sp: &SpeedSetpoint,
    params: &VehicleParams,
    config: &TrackingConfig,
) -> Result<Prediction, ControllerError> {
    let spline = spline.ok_or(ControllerError::EmptyPath)?;
    simulate_tracking_from(
        PathTracker::new(config.lookahead),
        spline,
        start,
        sp,
        params,
        config,
    )
}

/// Like [`simulate_tracking`], continuing from an existing tracker's progress.
/// The tracker's own lookahead is used.
pub fn simulate_tracking_from(
    mut tracker: PathTracker,
    spline: &PathSpline,
    start: &VehicleState,
    sp: &SpeedSetpoint,
    params: &VehicleParams,
    config: &TrackingConfig,
) -> Result<Prediction, ControllerError> {
    let max_steps = (config.horizon / config.dt).ceil() as usize;
    let mut poses = vec![*start];
    let mut state = *start;
    for _ in 0..max_steps {
        state = tracking_step(&mut tracker, &state, spline, sp, params, config.dt)?;
        poses.push(state);
        if state.v == 0.0 {
            tracker.update_progress(&state, spline);
            if sp.target_v == 0.0 || tracker.remaining(spline) <= END_MARGIN {
                return Ok(Prediction {
                    poses,
                    horizon_exceeded: false,
                });
            }
        }
    }
    Ok(Prediction {
        poses,
        horizon_exceeded: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pedal {
    Accel,
    Brake,
    #[default]
    None,
}

/// Maps a normalized steering input and pedal state onto actuator commands.
pub fn direct_command(steer_input: f64, pedal: Pedal, params: &VehicleParams) -> ControlInput {
    let steer = if steer_input.is_finite() {
        steer_input.clamp(-1.0, 1.0)
    } else {
        0.0
    };
    ControlInput {
        steering_target: steer * params.max_steering,
        accel_cmd: match pedal {
            Pedal::Accel => params.accel,
            Pedal::Brake => -params.decel,
            Pedal::None => 0.0,
        },
    }
}
