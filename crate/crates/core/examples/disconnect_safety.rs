//! Cuts the operator link while the sequential bot is in a corner and shows
//! the vehicle braking to a standstill on its path.

use telepath::controller::DriveMode;
use telepath::link::SessionEventKind;
use telepath::sim::{run, Scenario};

fn main() {
    let cut = 22.0;
    let scenario = Scenario {
        link_cut_at: Some(cut),
        timeout_s: cut + 3.0,
        ..Scenario::bot_lap(DriveMode::Sequential, 0)
    };
    let log = run(&scenario).expect("valid scenario");
    for (t, event) in log.events() {
        println!("{t:7.2} s  {event:?}");
    }
    let disconnect = log
        .events()
        .find(|(_, e)| *e == SessionEventKind::Disconnect)
        .map(|(t, _)| t)
        .expect("link was cut");
    println!("\n   t [s]   v [m/s]      x       y");
    for (t, s) in log
        .ticks()
        .filter(|(t, _)| *t >= cut - 0.2 && *t <= disconnect + 0.5)
    {
        if ((t * 100.0).round() as i64) % 5 == 0 {
            println!("{t:8.2} {:8.3} {:7.3} {:7.3}", s.v, s.x, s.y);
        }
    }
}
