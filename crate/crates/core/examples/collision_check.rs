//! Places the vehicle footprint at a few poses on the default course and
//! reports contacts, clearance and finish-line crossings.

use telepath::geom::Vec2;
use telepath::vehicle::{footprint, VehicleParams, VehicleState};
use telepath::world::WorldMap;

fn main() {
    let map = WorldMap::builtin_default();
    let params = VehicleParams::default();
    println!("{}: {} obstacles", map.name, map.obstacles.len());

    let poses = [
        ("start pose", VehicleState::at_rest(3.0, 0.0, 0.0)),
        ("drifted 0.3 m left", VehicleState::at_rest(3.75, 0.3, 0.0)),
        ("on a cube", VehicleState::at_rest(3.75, 0.55, 0.0)),
        (
            "sideways",
            VehicleState::at_rest(3.75, 0.2, std::f64::consts::FRAC_PI_2),
        ),
    ];
    for (label, state) in poses {
        let fp = footprint(&state, &params);
        let hits = map.collides(&fp);
        println!(
            "{label:>20}: clearance {:.3} m, hits {:?}",
            map.clearance(&fp),
            hits
        );
    }

    let finish =
        |a: (f64, f64), b: (f64, f64)| map.crossed_finish(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1));
    println!("cross finish forwards:  {}", finish((2.4, 0.0), (2.6, 0.0)));
    println!("cross finish backwards: {}", finish((2.6, 0.0), (2.4, 0.0)));
}
