//! Bot fleets on one map: sequential versus direct control.

use std::thread;

use super::metrics::{compute_metrics, median, SessionMetrics};
use super::scenario::{MapRef, Scenario};
use super::session::{run, RunError};
use crate::controller::DriveMode;
use crate::link::LinkConfig;
use crate::world::WorldMap;

/// Link used by the comparison fleets: a mildly imperfect network.
pub fn fleet_link() -> LinkConfig {
    LinkConfig {
        latency: 0.05,
        jitter: 0.02,
        loss_rate: 0.01,
        ..LinkConfig::default()
    }
}

pub fn fleet_scenario(map: &WorldMap, mode: DriveMode, seed: u64) -> Scenario {
    Scenario {
        map: MapRef::Inline(Box::new(map.clone())),
        link: fleet_link(),
        ..Scenario::bot_lap(mode, seed)
    }
}

/// Runs `runs` seeds per fleet, sequential fleet first, in parallel.
pub fn compare_fleets(map: &WorldMap, runs: usize) -> Result<Vec<SessionMetrics>, RunError> {
    let scenarios: Vec<Scenario> = [DriveMode::Sequential, DriveMode::Direct]
        .into_iter()
        .flat_map(|mode| (0..runs as u64).map(move |seed| (mode, seed)))
        .map(|(mode, seed)| fleet_scenario(map, mode, seed))
        .collect();
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = scenarios.len().div_ceil(workers).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .chunks(chunk)
            .map(|batch| {
                scope.spawn(move || {
                    batch
                        .iter()
                        .map(|s| run(s).map(|log| compute_metrics(&log)))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        let mut all = Vec::with_capacity(scenarios.len());
        for h in handles {
            all.extend(h.join().expect("fleet worker panicked")?);
        }
        Ok(all)
    })
}

/// Median completion time of each fleet over its completed runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetSummary {
    pub sequential_median: Option<f64>,
    pub direct_median: Option<f64>,
    pub collisions: u32,
    pub incomplete: usize,
}

impl FleetSummary {
    pub fn of(rows: &[SessionMetrics]) -> Self {
        let times = |mode| -> Vec<f64> {
            rows.iter()
                .filter(|m| m.mode == mode)
                .filter_map(|m| m.task_completion_time)
                .collect()
        };
        Self {
            sequential_median: median(&mut times(DriveMode::Sequential)),
            direct_median: median(&mut times(DriveMode::Direct)),
            collisions: rows.iter().map(|m| m.collision_count).sum(),
            incomplete: rows.iter().filter(|m| !m.completed).count(),
        }
    }
}
