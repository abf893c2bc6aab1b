//! One scripted lap of the default course.
//!
//! cargo run --example bot_lap -- [sequential|direct] [seed] [log.ndjson]

use telepath::controller::DriveMode;
use telepath::sim::{compute_metrics, export_metrics, run, Scenario};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode = match args.next().as_deref() {
        Some("direct") => DriveMode::Direct,
        _ => DriveMode::Sequential,
    };
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let log = run(&Scenario::bot_lap(mode, seed)).expect("valid scenario");
    let m = compute_metrics(&log);
    print!("{}", export_metrics(std::slice::from_ref(&m)));
    println!(
        "{} ticks, {} records",
        log.ticks().count(),
        log.records.len()
    );
    if let Some(path) = args.next() {
        std::fs::write(&path, log.to_ndjson())?;
        println!("log written to {path}");
    }
    Ok(())
}
