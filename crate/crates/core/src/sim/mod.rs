//! Headless session host: scenarios, the fixed-step loop, scripted
//! operators, session logs and KPI metrics.

pub mod bots;
mod compare;
mod log;
mod metrics;
mod scenario;
mod session;

pub use bots::{
    resample_polyline, DirectBot, Operator, OperatorOutput, SequentialBot, DIRECT_BOT_LOOKAHEAD,
    WP_SPACING,
};
pub use compare::{compare_fleets, fleet_scenario, FleetSummary};
pub use log::{Direction, LogError, LogHeader, LogRecord, SessionLog, LOG_FORMAT};
pub use metrics::{
    compute_metrics, export_metrics, median, parse_metrics_csv, sig6, MetricsRow, SessionMetrics,
    CSV_HEADER, EPISODE_GAP,
};
pub use scenario::{
    load_scenario, save_scenario, ClockMode, ControllerSettings, MapRef, OperatorKind, Scenario,
    ScenarioError, DEFAULT_DT, SCENARIO_FORMAT,
};
pub use session::{
    run, Outcome, RunError, Session, VehicleAgent, MIN_LAP_DISTANCE, TELEMETRY_PERIOD,
};
