//! Drives the single-track model around a circle of radius 2 m and reports
//! how far the explicit integration drifts for a few step sizes.

use std::f64::consts::TAU;

use telepath::vehicle::{step, ControlInput, VehicleParams, VehicleState};

fn main() {
    let params = VehicleParams::default();
    let radius = 2.0;
    let steering = (params.wheelbase / radius).atan();
    let input = ControlInput {
        steering_target: steering,
        accel_cmd: 0.0,
    };
    println!(
        "steering {steering:.4} rad for R = {radius} m at v = {} m/s",
        params.v_max
    );

    for dt in [0.1, 0.01, 0.001] {
        let mut s = VehicleState {
            v: params.v_max,
            steering,
            ..VehicleState::default()
        };
        let steps = (TAU * radius / params.v_max / dt).round() as usize;
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            s = step(&s, &input, &params, dt).expect("valid step");
            let r = ((s.x).powi(2) + (s.y - radius).powi(2)).sqrt();
            worst = worst.max((r - radius).abs());
        }
        println!(
            "dt {dt:>5}: {steps:>6} steps, closure error {:.2e} m, worst radius error {worst:.2e} m",
            s.position().norm()
        );
    }

    // Limits: full throttle and an absurd steering request.
    let mut s = VehicleState::default();
    let greedy = ControlInput {
        steering_target: 3.0,
        accel_cmd: 10.0,
    };
    for _ in 0..200 {
        s = step(&s, &greedy, &params, 0.01).expect("valid step");
    }
    println!(
        "after 2 s of full input: v = {:.3} m/s, steering = {:.3} rad",
        s.v, s.steering
    );
}
