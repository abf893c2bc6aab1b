//! What the vehicle does on its own once the operator link is lost.

use serde::{Deserialize, Serialize};

use crate::controller::{DriveMode, SpeedSetpoint};
use crate::vehicle::{ControlInput, VehicleParams, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisconnectPolicy {
    /// Brake to a standstill as soon as possible while still tracking the path.
    #[default]
    StopOnPath,
    /// Keep the current setpoint and stop at the end of the entered path.
    FinishPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum SafetyAction {
    /// Keep tracking the path with the setpoint forced to zero.
    StopOnPath,
    /// Keep tracking the path with the setpoint unchanged.
    FinishPath,
    /// Hold the steering angle and brake fully.
    BrakeHold { steering: f64 },
}

pub fn on_disconnect(
    mode: DriveMode,
    policy: DisconnectPolicy,
    state: &VehicleState,
) -> SafetyAction {
    match (mode, policy) {
        (DriveMode::Sequential, DisconnectPolicy::StopOnPath) => SafetyAction::StopOnPath,
        (DriveMode::Sequential, DisconnectPolicy::FinishPath) => SafetyAction::FinishPath,
        (DriveMode::Direct, _) => SafetyAction::BrakeHold {
            steering: state.steering,
        },
    }
}

impl SafetyAction {
    /// Setpoint the path tracker follows while the action is in force.
    pub fn setpoint(&self, sp: SpeedSetpoint) -> SpeedSetpoint {
        match self {
            SafetyAction::StopOnPath => SpeedSetpoint {
                target_v: 0.0,
                ..sp
            },
            _ => sp,
        }
    }

    /// Actuator command replacing operator input, for actions that bypass the tracker.
    pub fn override_input(&self, params: &VehicleParams) -> Option<ControlInput> {
        match self {
            SafetyAction::BrakeHold { steering } => Some(ControlInput {
                steering_target: *steering,
                accel_cmd: -params.decel,
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle;

    #[test]
    fn direct_mode_brakes_with_frozen_steering() {
        let params = VehicleParams::default();
        let mut s = VehicleState::at_rest(0.0, 0.0, 0.0);
        s.v = 0.35;
        s.steering = 0.2;
        let action = on_disconnect(DriveMode::Direct, DisconnectPolicy::StopOnPath, &s);
        let input = action.override_input(&params).unwrap();
        let mut t = 0.0_f64;
        while s.v > 0.0 {
            s = vehicle::step(&s, &input, &params, 0.01).unwrap();
            assert_eq!(s.steering, 0.2);
            t += 0.01;
        }
        assert!((t - 0.35).abs() < 0.011, "{t}");
    }

    #[test]
    fn sequential_policies() {
        let s = VehicleState::at_rest(0.0, 0.0, 0.0);
        let sp = SpeedSetpoint::at(0.3, 0.05);
        let stop = on_disconnect(DriveMode::Sequential, DisconnectPolicy::StopOnPath, &s);
        assert_eq!(stop.setpoint(sp).target_v, 0.0);
        let finish = on_disconnect(DriveMode::Sequential, DisconnectPolicy::FinishPath, &s);
        assert_eq!(finish.setpoint(sp), sp);
        assert!(stop.override_input(&VehicleParams::default()).is_none());
    }
}
