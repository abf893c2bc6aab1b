//! Session log: newline-delimited JSON, one header line followed by
//! timestamped records.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::DriveMode;
use crate::geom::Vec2;
use crate::link::{Message, MessageKind, SessionEventKind};
use crate::vehicle::VehicleState;
use crate::world::WorldMap;

pub const LOG_FORMAT: &str = "telepath-log/1";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("log has no header record")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Link direction: uplink carries operator commands to the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub name: String,
    pub mode: DriveMode,
    pub seed: u64,
    pub dt: f64,
    pub scenario: serde_json::Value,
    pub map: WorldMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    /// A message handed to the link; `deliver_at` is `None` when it was lost.
    Send {
        t: f64,
        dir: Direction,
        deliver_at: Option<f64>,
        message: Message,
    },
    Deliver {
        t: f64,
        dir: Direction,
        seq: u64,
        kind: MessageKind,
    },
    /// Vehicle state at the end of a simulation step.
    Tick {
        t: f64,
        state: VehicleState,
        target_v: f64,
    },
    Collision {
        t: f64,
        obstacles: Vec<usize>,
    },
    /// The vehicle committed a new waypoint path.
    Path {
        t: f64,
        waypoints: Vec<Vec2>,
    },
    Event {
        t: f64,
        event: SessionEventKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
    },
}

impl LogRecord {
    pub fn time(&self) -> f64 {
        match self {
            LogRecord::Send { t, .. }
            | LogRecord::Deliver { t, .. }
            | LogRecord::Tick { t, .. }
            | LogRecord::Collision { t, .. }
            | LogRecord::Path { t, .. }
            | LogRecord::Event { t, .. } => *t,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename = "header")]
struct HeaderLine {
    #[serde(flatten)]
    header: LogHeader,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: LogHeader,
    pub records: Vec<LogRecord>,
}

impl SessionLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn events(&self) -> impl Iterator<Item = (f64, SessionEventKind)> + '_ {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Event { t, event, .. } => Some((*t, *event)),
            _ => None,
        })
    }

    pub fn ticks(&self) -> impl Iterator<Item = (f64, &VehicleState)> + '_ {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Tick { t, state, .. } => Some((*t, state)),
            _ => None,
        })
    }

    pub fn write_ndjson(&self, mut w: impl Write) -> io::Result<()> {
        let header = HeaderLine {
            header: self.header.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = Vec::new();
        self.write_ndjson(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn read_ndjson(r: impl BufRead) -> Result<Self, LogError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let parse_err = |line: usize, e: serde_json::Error| LogError::Parse {
            line: line + 1,
            reason: e.to_string(),
        };
        let (n, first) = lines.next().ok_or(LogError::MissingHeader)?;
        let HeaderLine { header } = serde_json::from_str(&first?).map_err(|e| parse_err(n, e))?;
        if header.format != LOG_FORMAT {
            return Err(LogError::Parse {
                line: 1,
                reason: format!(
                    "expected format \"{LOG_FORMAT}\", got \"{}\"",
                    header.format
                ),
            });
        }
        let mut log = SessionLog::new(header);
        for (n, line) in lines {
            log.push(serde_json::from_str(&line?).map_err(|e| parse_err(n, e))?);
        }
        Ok(log)
    }

    pub fn parse(text: &str) -> Result<Self, LogError> {
        Self::read_ndjson(text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{Payload, VelocityCommand};

    fn header() -> LogHeader {
        LogHeader {
            format: LOG_FORMAT.into(),
            name: "t".into(),
            mode: DriveMode::Sequential,
            seed: 1,
            dt: 0.01,
            scenario: serde_json::json!({"name": "t"}),
            map: crate::world::default_course(),
        }
    }

    #[test]
    fn ndjson_round_trip() {
        let mut log = SessionLog::new(header());
        log.push(LogRecord::Send {
            t: 0.01,
            dir: Direction::Uplink,
            deliver_at: Some(0.06000000000000001),
            message: Message {
                seq: 4,
                sent_at: 0.01,
                payload: Payload::VelocityCmd(VelocityCommand::Stop),
            },
        });
        log.push(LogRecord::Tick {
            t: 0.02,
            state: VehicleState::at_rest(3.0, 0.1, 0.3),
            target_v: 0.05,
        });
        log.push(LogRecord::Event {
            t: 0.02,
            event: SessionEventKind::StartMoving,
            detail: None,
        });
        let text = log.to_ndjson();
        assert!(text.starts_with(r#"{"type":"header","format":"telepath-log/1""#));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(SessionLog::parse(&text).unwrap(), log);
    }

    #[test]
    fn header_is_required() {
        assert!(matches!(
            SessionLog::parse(""),
            Err(LogError::MissingHeader)
        ));
        let tick = r#"{"type":"tick","t":0.0,"state":{"x":0,"y":0,"heading":0,"v":0,"steering":0},"target_v":0}"#;
        assert!(matches!(
            SessionLog::parse(tick),
            Err(LogError::Parse { line: 1, .. })
        ));
    }
}
