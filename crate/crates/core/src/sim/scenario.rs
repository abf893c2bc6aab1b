use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{DriveMode, DEFAULT_LOOKAHEAD, DEFAULT_STEP_DV};
use crate::link::{DisconnectPolicy, LinkConfig, LinkConfigError};
use crate::vehicle::{VehicleError, VehicleParams};
use crate::world::{load_map, MapError, WorldMap};

pub const SCENARIO_FORMAT: &str = "telepath-scenario/1";
pub const DEFAULT_DT: f64 = 0.01;
pub const MAX_SCENARIO_DT: f64 = 0.05;
pub const DEFAULT_TIMEOUT: f64 = 600.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("map `{path}`: {source}")]
    MapFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error(transparent)]
    Link(#[from] LinkConfigError),
    #[error("scripted operator needs a map with a reference centerline")]
    MissingCenterline,
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapRef {
    /// A map bundled with the library; only `"default"` exists.
    Builtin(String),
    /// A map file, relative paths resolved against the scenario file.
    File(PathBuf),
    Inline(Box<WorldMap>),
}

impl Default for MapRef {
    fn default() -> Self {
        MapRef::Builtin("default".into())
    }
}

impl MapRef {
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<WorldMap, ScenarioError> {
        match self {
            MapRef::Builtin(name) if name == "default" => Ok(WorldMap::builtin_default()),
            MapRef::Builtin(name) => Err(invalid("map", format!("unknown builtin map `{name}`"))),
            MapRef::File(path) => {
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| ScenarioError::MapFile { path, source })?;
                Ok(load_map(&text)?)
            }
            MapRef::Inline(map) => {
                map.validate()?;
                Ok((**map).clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Commands come from a connected operator station, or nowhere.
    #[default]
    External,
    BotSequential,
    BotDirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    Realtime,
    #[default]
    FastAsPossible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSettings {
    pub lookahead: f64,
    pub step_dv: f64,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        Self {
            lookahead: DEFAULT_LOOKAHEAD,
            step_dv: DEFAULT_STEP_DV,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub map: MapRef,
    pub vehicle: VehicleParams,
    pub link: LinkConfig,
    pub mode: DriveMode,
    pub operator: OperatorKind,
    pub dt: f64,
    pub clock: ClockMode,
    /// Seeds the link's random streams; overrides `link.seed` during a run.
    pub seed: u64,
    pub controller: ControllerSettings,
    /// Reject path edits while the vehicle moves.
    pub freeze_while_moving: bool,
    pub disconnect_policy: DisconnectPolicy,
    pub timeout_s: f64,
    /// Simulated time after which every message on the link is lost.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_cut_at: Option<f64>,
    /// End the session after this many collision episodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_limit: Option<u32>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "session".into(),
            map: MapRef::default(),
            vehicle: VehicleParams::default(),
            link: LinkConfig::default(),
            mode: DriveMode::Sequential,
            operator: OperatorKind::External,
            dt: DEFAULT_DT,
            clock: ClockMode::FastAsPossible,
            seed: 0,
            controller: ControllerSettings::default(),
            freeze_while_moving: true,
            disconnect_policy: DisconnectPolicy::StopOnPath,
            timeout_s: DEFAULT_TIMEOUT,
            link_cut_at: None,
            collision_limit: None,
        }
    }
}

#[derive(Serialize)]
struct ScenarioDocumentRef<'a> {
    format: &'a str,
    #[serde(flatten)]
    scenario: &'a Scenario,
}

impl Scenario {
    /// A scripted lap on the bundled course.
    pub fn bot_lap(mode: DriveMode, seed: u64) -> Self {
        Self {
            name: format!("{}-lap", mode.as_str()),
            mode,
            operator: match mode {
                DriveMode::Sequential => OperatorKind::BotSequential,
                DriveMode::Direct => OperatorKind::BotDirect,
            },
            seed,
            ..Self::default()
        }
    }

    /// Checks the scenario and loads its map.
    pub fn prepare(&self, base_dir: Option<&Path>) -> Result<WorldMap, ScenarioError> {
        if !(self.dt > 0.0 && self.dt <= MAX_SCENARIO_DT) {
            return Err(invalid("dt", format!("must lie in (0, {MAX_SCENARIO_DT}]")));
        }
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(invalid("timeout_s", "must be finite and > 0"));
        }
        if !(self.controller.lookahead.is_finite() && self.controller.lookahead > 0.0) {
            return Err(invalid("controller.lookahead", "must be finite and > 0"));
        }
        if !(self.controller.step_dv.is_finite() && self.controller.step_dv > 0.0) {
            return Err(invalid("controller.step_dv", "must be finite and > 0"));
        }
        if self.link_cut_at.is_some_and(|t| !t.is_finite()) {
            return Err(invalid("link_cut_at", "must be finite"));
        }
        let bot_mode = match self.operator {
            OperatorKind::External => None,
            OperatorKind::BotSequential => Some(DriveMode::Sequential),
            OperatorKind::BotDirect => Some(DriveMode::Direct),
        };
        if bot_mode.is_some_and(|m| m != self.mode) {
            return Err(invalid("operator", "bot does not match the drive mode"));
        }
        self.vehicle.validate()?;
        self.link.validate()?;
        let map = self.map.resolve(base_dir)?;
        if bot_mode.is_some() && map.reference_centerline.is_none() {
            return Err(ScenarioError::MissingCenterline);
        }
        Ok(map)
    }

    /// JSON snapshot for log headers. The clock mode only affects pacing and
    /// is left out so that both modes log identically.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(ScenarioDocumentRef {
            format: SCENARIO_FORMAT,
            scenario: self,
        })
        .expect("scenario serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("clock");
        }
        v
    }
}

pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let parse = |e: serde_json::Error| ScenarioError::Parse(e.to_string());
    let mut doc: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(text).map_err(parse)?;
    // Pulled out by hand: unknown-field checks do not survive `serde(flatten)`.
    match doc.remove("format") {
        Some(serde_json::Value::String(f)) if f == SCENARIO_FORMAT => {}
        other => {
            return Err(invalid(
                "format",
                format!(
                    "expected \"{SCENARIO_FORMAT}\", got {}",
                    other.unwrap_or_default()
                ),
            ))
        }
    }
    serde_json::from_value(serde_json::Value::Object(doc)).map_err(parse)
}

pub fn save_scenario(scenario: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&ScenarioDocumentRef {
        format: SCENARIO_FORMAT,
        scenario,
    })
    .expect("scenario serializes");
    text.push('\n');
    text
}
