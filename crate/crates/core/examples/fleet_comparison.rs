//! Runs both bot fleets on the default course over a mildly impaired link.
//!
//! cargo run --release --example fleet_comparison -- [runs]

use telepath::sim::{compare_fleets, export_metrics, FleetSummary};
use telepath::world::WorldMap;

fn main() {
    let runs = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let rows = compare_fleets(&WorldMap::builtin_default(), runs).expect("valid fleet");
    print!("{}", export_metrics(&rows));
    let s = FleetSummary::of(&rows);
    println!(
        "\nmedian lap: sequential {:.2} s, direct {:.2} s; collisions {}, incomplete {}",
        s.sequential_median.unwrap_or(f64::NAN),
        s.direct_median.unwrap_or(f64::NAN),
        s.collisions,
        s.incomplete
    );
}
