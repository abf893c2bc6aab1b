//! Writes the bundled loop course as a map file.
//!
//! cargo run --example export_default_map -- maps/loop.json

use telepath::world::{save_map, WorldMap};

fn main() -> std::io::Result<()> {
    let map = WorldMap::builtin_default();
    let text = save_map(&map);
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, text)?;
            println!(
                "wrote {path}: {} obstacles, {} centerline points",
                map.obstacles.len(),
                map.reference_centerline.as_ref().map_or(0, Vec::len)
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}
