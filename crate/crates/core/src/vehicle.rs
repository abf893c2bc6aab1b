//! Kinematic single-track vehicle model.
//!
//! The state position is the rear-axle midpoint. The footprint rectangle is
//! centered `length / 2` ahead of it along the heading.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, OrientedRect, Vec2};

/// Steering slew limit in rad/s.
pub const STEER_RATE: f64 = 4.0;

/// Largest integration step accepted by [`step`].
pub const MAX_DT: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("non-finite value in vehicle state, input or step size")]
    NonFiniteState,
    #[error("step size {0} outside (0, {MAX_DT}]")]
    InvalidStep(f64),
    #[error("invalid vehicle parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
}

/// Physical limits of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub max_steering: f64,
    pub width: f64,
    pub length: f64,
    pub v_max: f64,
    pub accel: f64,
    pub decel: f64,
}

impl Default for VehicleParams {
    /// 1:10 scale car, capped at the 0.35 m/s study speed.
    fn default() -> Self {
        Self {
            wheelbase: 0.32,
            max_steering: 0.40,
            width: 0.20,
            length: 0.50,
            v_max: 0.35,
            accel: 0.5,
            decel: 1.0,
        }
    }
}

impl VehicleParams {
    /// Largest drivable path curvature, `tan(max_steering) / wheelbase`.
    pub fn kappa_max(&self) -> f64 {
        self.max_steering.tan() / self.wheelbase
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        let fields = [
            ("wheelbase", self.wheelbase),
            ("max_steering", self.max_steering),
            ("width", self.width),
            ("length", self.length),
            ("v_max", self.v_max),
            ("accel", self.accel),
            ("decel", self.decel),
        ];
        for (field, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(VehicleError::InvalidParams {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if self.max_steering >= std::f64::consts::FRAC_PI_2 {
            return Err(VehicleError::InvalidParams {
                field: "max_steering",
                reason: "must be below pi/2".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Wrapped to (-pi, pi].
    pub heading: f64,
    pub v: f64,
    pub steering: f64,
}

impl VehicleState {
    pub fn at_rest(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
            v: 0.0,
            steering: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.heading, self.v, self.steering]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Actuator command: steering target and longitudinal acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub steering_target: f64,
    /// Positive accelerates, negative brakes, zero holds speed.
    pub accel_cmd: f64,
}

/// Advances the kinematic bicycle model by one explicit Euler step.
///
/// Position and heading integrate with the speed and steering at the start
/// of the step. Speed and steering are then updated and re-clamped.
pub fn step(
    state: &VehicleState,
    input: &ControlInput,
    params: &VehicleParams,
    dt: f64,
) -> Result<VehicleState, VehicleError> {
    if !(state.is_finite() && input.steering_target.is_finite() && input.accel_cmd.is_finite()) {
        return Err(VehicleError::NonFiniteState);
    }
    if !dt.is_finite() {
        return Err(VehicleError::NonFiniteState);
    }
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(VehicleError::InvalidStep(dt));
    }

    let v = state.v.clamp(0.0, params.v_max);
    let steering = state
        .steering
        .clamp(-params.max_steering, params.max_steering);
    let (sin_h, cos_h) = state.heading.sin_cos();

    let x = state.x + v * cos_h * dt;
    let y = state.y + v * sin_h * dt;
    let heading = wrap_angle(state.heading + v * steering.tan() / params.wheelbase * dt);

    let accel = input.accel_cmd.clamp(-params.decel, params.accel);
    let v_next = (v + accel * dt).clamp(0.0, params.v_max);

    let target = input
        .steering_target
        .clamp(-params.max_steering, params.max_steering);
    let max_delta = STEER_RATE * dt;
    let steering_next = (steering + (target - steering).clamp(-max_delta, max_delta))
        .clamp(-params.max_steering, params.max_steering);

    Ok(VehicleState {
        x,
        y,
        heading,
        v: v_next,
        steering: steering_next,
    })
}

/// Vehicle body rectangle: `length x width`, centered `length / 2` ahead of the rear axle.
pub fn footprint(state: &VehicleState, params: &VehicleParams) -> OrientedRect {
    let heading = wrap_angle(state.heading);
    let center = state.position() + Vec2::from_angle(heading) * (params.length / 2.0);
    OrientedRect::new(
        center,
        Vec2::new(params.length / 2.0, params.width / 2.0),
        heading,
    )
}
