//! Predicts the vehicle's route along an S-shaped path, then drives it with
//! the same controller and shows that execution follows the prediction.

use telepath::controller::{
    simulate_tracking, tracking_step, PathTracker, SpeedSetpoint, TrackingConfig,
    DEFAULT_LOOKAHEAD, T_MAX,
};
use telepath::geom::Vec2;
use telepath::path::build_spline;
use telepath::vehicle::{VehicleParams, VehicleState};

fn main() {
    let params = VehicleParams::default();
    let waypoints: Vec<Vec2> = (0..=12)
        .map(|k| {
            let x = k as f64 * 0.5;
            Vec2::new(x, 0.6 * (x * 0.9).sin())
        })
        .collect();
    let spline = build_spline(&waypoints).expect("valid waypoints");
    let start = VehicleState::at_rest(0.0, 0.0, 0.5);
    let sp = SpeedSetpoint::at(params.v_max, 0.05);
    let config = TrackingConfig {
        lookahead: DEFAULT_LOOKAHEAD,
        dt: 0.01,
        horizon: T_MAX,
    };

    let prediction = simulate_tracking(Some(&spline), &start, &sp, &params, &config)
        .expect("valid tracking input");
    let end = prediction.poses.last().unwrap();
    println!(
        "prediction: {} poses, {:.2} s, ends {:.3} m from the path end",
        prediction.poses.len(),
        (prediction.poses.len() - 1) as f64 * config.dt,
        end.position().distance(spline.end())
    );

    let mut tracker = PathTracker::new(DEFAULT_LOOKAHEAD);
    let mut state = start;
    let (mut worst_gap, mut worst_offset): (f64, f64) = (0.0, 0.0);
    for predicted in &prediction.poses[1..] {
        state = tracking_step(&mut tracker, &state, &spline, &sp, &params, config.dt)
            .expect("valid step");
        worst_gap = worst_gap.max(state.position().distance(predicted.position()));
        worst_offset = worst_offset.max(spline.project(state.position()).distance);
    }
    println!("execution vs prediction: max gap {worst_gap:.1e} m");
    println!("max distance from the path: {worst_offset:.4} m");
}
