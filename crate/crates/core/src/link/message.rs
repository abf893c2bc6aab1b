use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::controller::{DriveMode, Pedal, TrackingMode};
use crate::geom::Vec2;
use crate::path::{FeasibilitySegment, PathEdit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Hello,
    Heartbeat,
    PathSet,
    PathState,
    VelocityCmd,
    DirectCmd,
    Telemetry,
    SessionEvent,
    Ack,
}

impl MessageKind {
    pub const ALL: [MessageKind; 9] = [
        MessageKind::Hello,
        MessageKind::Heartbeat,
        MessageKind::PathSet,
        MessageKind::PathState,
        MessageKind::VelocityCmd,
        MessageKind::DirectCmd,
        MessageKind::Telemetry,
        MessageKind::SessionEvent,
        MessageKind::Ack,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MessageKind::Hello => "Hello",
            MessageKind::Heartbeat => "Heartbeat",
            MessageKind::PathSet => "PathSet",
            MessageKind::PathState => "PathState",
            MessageKind::VelocityCmd => "VelocityCmd",
            MessageKind::DirectCmd => "DirectCmd",
            MessageKind::Telemetry => "Telemetry",
            MessageKind::SessionEvent => "SessionEvent",
            MessageKind::Ack => "Ack",
        }
    }

    pub fn parse(s: &str) -> Option<MessageKind> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Operator,
    Vehicle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloPayload {
    pub role: Role,
    pub mode: DriveMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityCommand {
    Accelerate,
    Decelerate,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectCmdPayload {
    /// Normalized steering in `[-1, 1]`, positive to the left.
    pub steer: f64,
    pub pedal: Pedal,
}

/// Everything the operator station renders for the current path. All of it
/// is computed vehicle-side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStatePayload {
    /// Increments with every committed path change.
    pub revision: u64,
    pub waypoints: Vec<Vec2>,
    pub centerline: Vec<Vec2>,
    pub left: Vec<Vec2>,
    pub right: Vec<Vec2>,
    pub segments: Vec<FeasibilitySegment>,
    pub predicted: Vec<Vec2>,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryPayload {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub steering: f64,
    pub target_v: f64,
    pub mode: TrackingMode,
    pub s_progress: Option<f64>,
    /// Distance to the nearest obstacle; `None` on a map without obstacles.
    pub clearance: Option<f64>,
    pub colliding: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionEventKind {
    StartMoving,
    Finish,
    Disconnect,
    Reconnect,
    NoPath,
    PathEnd,
    CommandRejected,
    SchemaError,
    CollisionLimit,
    Timeout,
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEventPayload {
    pub event: SessionEventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AckPayload {
    pub ack_seq: u64,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Hello(HelloPayload),
    Heartbeat,
    PathSet(PathEdit),
    PathState(Box<PathStatePayload>),
    VelocityCmd(VelocityCommand),
    DirectCmd(DirectCmdPayload),
    Telemetry(TelemetryPayload),
    SessionEvent(SessionEventPayload),
    Ack(AckPayload),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Hello(_) => MessageKind::Hello,
            Payload::Heartbeat => MessageKind::Heartbeat,
            Payload::PathSet(_) => MessageKind::PathSet,
            Payload::PathState(_) => MessageKind::PathState,
            Payload::VelocityCmd(_) => MessageKind::VelocityCmd,
            Payload::DirectCmd(_) => MessageKind::DirectCmd,
            Payload::Telemetry(_) => MessageKind::Telemetry,
            Payload::SessionEvent(_) => MessageKind::SessionEvent,
            Payload::Ack(_) => MessageKind::Ack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub seq: u64,
    pub sent_at: f64,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

#[derive(Serialize, Deserialize)]
struct Empty {}

#[derive(Serialize, Deserialize)]
struct Velocity {
    command: VelocityCommand,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PayloadRef<'a> {
    Hello(&'a HelloPayload),
    Empty(Empty),
    PathSet(&'a PathEdit),
    PathState(&'a PathStatePayload),
    Velocity(Velocity),
    DirectCmd(&'a DirectCmdPayload),
    Telemetry(&'a TelemetryPayload),
    SessionEvent(&'a SessionEventPayload),
    Ack(&'a AckPayload),
}

#[derive(Serialize)]
struct WireOut<'a> {
    kind: &'static str,
    seq: u64,
    sent_at: f64,
    payload: PayloadRef<'a>,
}

#[derive(Deserialize)]
struct WireIn {
    kind: String,
    seq: u64,
    sent_at: f64,
    payload: serde_json::Value,
}

impl Serialize for Message {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let payload = match &self.payload {
            Payload::Hello(p) => PayloadRef::Hello(p),
            Payload::Heartbeat => PayloadRef::Empty(Empty {}),
            Payload::PathSet(p) => PayloadRef::PathSet(p),
            Payload::PathState(p) => PayloadRef::PathState(p),
            Payload::VelocityCmd(c) => PayloadRef::Velocity(Velocity { command: *c }),
            Payload::DirectCmd(p) => PayloadRef::DirectCmd(p),
            Payload::Telemetry(p) => PayloadRef::Telemetry(p),
            Payload::SessionEvent(p) => PayloadRef::SessionEvent(p),
            Payload::Ack(p) => PayloadRef::Ack(p),
        };
        WireOut {
            kind: self.kind().as_str(),
            seq: self.seq,
            sent_at: self.sent_at,
            payload,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Message {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = WireIn::deserialize(deserializer)?;
        let kind = MessageKind::parse(&wire.kind)
            .ok_or_else(|| D::Error::custom(format!("unknown message kind `{}`", wire.kind)))?;
        let v = wire.payload;
        fn body<T: serde::de::DeserializeOwned, E: serde::de::Error>(
            v: serde_json::Value,
        ) -> Result<T, E> {
            serde_json::from_value(v).map_err(|e| E::custom(format!("payload: {e}")))
        }
        let payload = match kind {
            MessageKind::Hello => Payload::Hello(body(v)?),
            MessageKind::Heartbeat => {
                body::<Empty, D::Error>(v)?;
                Payload::Heartbeat
            }
            MessageKind::PathSet => Payload::PathSet(body(v)?),
            MessageKind::PathState => Payload::PathState(Box::new(body(v)?)),
            MessageKind::VelocityCmd => {
                Payload::VelocityCmd(body::<Velocity, D::Error>(v)?.command)
            }
            MessageKind::DirectCmd => Payload::DirectCmd(body(v)?),
            MessageKind::Telemetry => Payload::Telemetry(body(v)?),
            MessageKind::SessionEvent => Payload::SessionEvent(body(v)?),
            MessageKind::Ack => Payload::Ack(body(v)?),
        };
        Ok(Message {
            seq: wire.seq,
            sent_at: wire.sent_at,
            payload,
        })
    }
}
