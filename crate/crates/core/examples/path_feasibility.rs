//! Builds a path from clicked waypoints, edits it, and reports which parts
//! the default vehicle can drive.

use telepath::geom::Vec2;
use telepath::path::{check_feasibility, EditGuard, PathEdit, WaypointPath};
use telepath::vehicle::VehicleParams;

fn main() {
    let params = VehicleParams::default();
    let guard = EditGuard::default();
    let clicks = [(0.0, 0.0), (2.0, 0.0), (3.0, 1.0), (3.2, 2.5), (2.5, 3.0)];

    let mut path = WaypointPath::default();
    for (x, y) in clicks {
        path = path
            .apply(
                &PathEdit::Append {
                    point: Vec2::new(x, y),
                },
                &guard,
            )
            .expect("valid waypoint");
    }
    report(&path, &params);

    // Moving waypoint 3 outwards sharpens the turn there past the steering limit.
    let edit = PathEdit::Move {
        index: 3,
        point: Vec2::new(4.0, 2.8),
    };
    path = path.apply(&edit, &guard).expect("valid move");
    println!("\nafter moving waypoint 3:");
    report(&path, &params);
}

fn report(path: &WaypointPath, params: &VehicleParams) {
    let spline = path.spline().expect("two or more waypoints");
    let report = check_feasibility(spline, params);
    println!(
        "{} waypoints, length {:.2} m, kappa_max {:.3} 1/m",
        path.waypoints().len(),
        spline.total_length(),
        report.kappa_max
    );
    for seg in &report.segments {
        let peak = spline
            .samples()
            .iter()
            .filter(|s| s.s >= seg.s_start && s.s <= seg.s_end)
            .map(|s| s.curvature.abs())
            .fold(0.0, f64::max);
        let tag = if seg.feasible {
            "ok        "
        } else {
            "INFEASIBLE"
        };
        println!(
            "  {tag} s = {:5.2} .. {:5.2}  peak |kappa| {peak:.3}",
            seg.s_start, seg.s_end
        );
    }
    let bounds = spline
        .offset_boundaries(params.width)
        .expect("positive width");
    println!(
        "  corridor: {} boundary points per side, self-intersecting: {}",
        bounds.left.len(),
        bounds.self_intersecting
    );
}
