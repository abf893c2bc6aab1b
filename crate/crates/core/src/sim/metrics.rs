//! Task KPIs, computed from a session log alone.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::log::{LogRecord, SessionLog};
use crate::controller::{DriveMode, PathTracker, DEFAULT_LOOKAHEAD};
use crate::link::SessionEventKind;
use crate::path::{build_spline, PathSpline};

/// Collision ticks separated by less clear time than this form one episode.
pub const EPISODE_GAP: f64 = 0.5;

pub const CSV_HEADER: &str = "scenario,mode,seed,completed,task_completion_time_s,collisions,max_lateral_error_m,path_entered_length_m";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub scenario: String,
    pub mode: DriveMode,
    pub seed: u64,
    pub completed: bool,
    /// First motion to finish crossing; present iff `completed`.
    pub task_completion_time: Option<f64>,
    pub collision_count: u32,
    pub distinct_obstacles_hit: u32,
    pub path_entered_length: f64,
    pub max_lateral_error: f64,
}

/// Windowed projection of successive positions onto one path.
struct LateralTracker {
    spline: PathSpline,
    tracker: PathTracker,
}

impl LateralTracker {
    fn new(spline: PathSpline) -> Self {
        Self {
            spline,
            tracker: PathTracker::new(DEFAULT_LOOKAHEAD),
        }
    }

    fn offset(&mut self, state: &crate::vehicle::VehicleState) -> f64 {
        let d = self.tracker.locate(state.position(), &self.spline).distance;
        self.tracker.update_progress(state, &self.spline);
        d
    }
}

pub fn compute_metrics(log: &SessionLog) -> SessionMetrics {
    let header = &log.header;
    let dt = header.dt;

    let mut reference = match header.mode {
        DriveMode::Direct => header
            .map
            .reference_centerline
            .as_deref()
            .and_then(|line| build_spline(line).ok())
            .map(LateralTracker::new),
        DriveMode::Sequential => None,
    };
    let mut entered: Option<LateralTracker> = None;
    let mut path_entered_length = 0.0;

    let mut first_motion = None;
    let mut finish = None;
    let mut max_lateral_error: f64 = 0.0;
    let mut episodes = 0u32;
    let mut last_hit: Option<f64> = None;
    let mut obstacles = BTreeSet::new();

    for r in &log.records {
        match r {
            LogRecord::Tick { t, state, .. } => {
                if first_motion.is_none() && state.v > 0.0 {
                    first_motion = Some(*t);
                }
                let lt = match header.mode {
                    DriveMode::Direct => reference.as_mut(),
                    DriveMode::Sequential => entered.as_mut(),
                };
                if let Some(lt) = lt {
                    max_lateral_error = max_lateral_error.max(lt.offset(state));
                }
            }
            LogRecord::Path { waypoints, .. } => {
                entered = build_spline(waypoints).ok().map(LateralTracker::new);
                path_entered_length = entered.as_ref().map_or(0.0, |e| e.spline.total_length());
            }
            LogRecord::Collision { t, obstacles: hit } => {
                let clear_time = last_hit.map(|prev| t - prev - dt);
                if clear_time.is_none_or(|gap| gap >= EPISODE_GAP) {
                    episodes += 1;
                }
                last_hit = Some(*t);
                obstacles.extend(hit.iter().copied());
            }
            LogRecord::Event {
                t,
                event: SessionEventKind::Finish,
                ..
            } => finish = finish.or(Some(*t)),
            _ => {}
        }
    }

    let task_completion_time = finish.map(|f| f - first_motion.unwrap_or(0.0));
    SessionMetrics {
        scenario: header.name.clone(),
        mode: header.mode,
        seed: header.seed,
        completed: finish.is_some(),
        task_completion_time,
        collision_count: episodes,
        distinct_obstacles_hit: obstacles.len() as u32,
        path_entered_length,
        max_lateral_error,
    }
}

/// Formats with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn export_metrics(rows: &[SessionMetrics]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .expect("in-memory write");
    for m in rows {
        w.write_record([
            m.scenario.clone(),
            m.mode.as_str().to_string(),
            m.seed.to_string(),
            m.completed.to_string(),
            m.task_completion_time.map(sig6).unwrap_or_default(),
            m.collision_count.to_string(),
            sig6(m.max_lateral_error),
            sig6(m.path_entered_length),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// One parsed row of [`export_metrics`] output.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub mode: DriveMode,
    pub seed: u64,
    pub completed: bool,
    pub task_completion_time_s: Option<f64>,
    pub collisions: u32,
    pub max_lateral_error_m: f64,
    pub path_entered_length_m: f64,
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
