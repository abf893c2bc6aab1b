//! Operator side of a session: scripted bots and the external station bridge.

use crate::controller::{pursuit_steering_from, DriveMode, PathTracker, Pedal};
use crate::geom::Vec2;
use crate::link::transport::{Inbound, LinkServer};
use crate::link::{
    encode, liveness, DirectCmdPayload, HelloPayload, LinkConfig, Liveness, Message, Payload, Role,
    SessionEventKind, TelemetryPayload, VelocityCommand,
};
use crate::path::{build_spline, PathEdit, PathError, PathSpline};
use crate::vehicle::{VehicleParams, VehicleState};

/// Spacing of the waypoints the sequential bot places along the centerline.
pub const WP_SPACING: f64 = 1.0;
/// Interval between the sequential bot's accelerate key presses.
pub const BOT_KEY_INTERVAL: f64 = 0.25;
/// Pure pursuit lookahead of the direct bot. Shorter than the vehicle's own
/// controller so that its corner cutting does not mask link delay.
pub const DIRECT_BOT_LOOKAHEAD: f64 = 0.4;
/// Time the sequential bot waits for an Ack before re-sending its path.
pub const PATH_RETRY: f64 = 1.0;

/// What an operator produced during one tick.
#[derive(Debug, Default)]
pub struct OperatorOutput {
    pub messages: Vec<Message>,
    pub notices: Vec<(SessionEventKind, String)>,
}

pub trait Operator: Send {
    /// A message from the vehicle arrived at `now`.
    fn on_message(&mut self, msg: &Message, now: f64);
    /// Called once per simulation step, after the vehicle has moved.
    fn tick(&mut self, now: f64, out: &mut OperatorOutput);
    /// Scripted operators stop the session once the vehicle rests at the end
    /// of its path; a human may still extend the path.
    fn is_scripted(&self) -> bool {
        true
    }
}

/// Points every `spacing` along a polyline by arc length, always ending at
/// the polyline's last point. A regular sample closer than `spacing / 2` to
/// the end is replaced by the end point.
pub fn resample_polyline(line: &[Vec2], spacing: f64) -> Vec<Vec2> {
    let Some(&first) = line.first() else {
        return Vec::new();
    };
    let total: f64 = line.windows(2).map(|w| w[0].distance(w[1])).sum();
    let mut out = vec![first];
    let mut k = 1;
    let (mut seg, mut seg_start) = (0, 0.0);
    while (k as f64) * spacing < total - spacing / 2.0 {
        let s = k as f64 * spacing;
        while seg_start + line[seg].distance(line[seg + 1]) < s {
            seg_start += line[seg].distance(line[seg + 1]);
            seg += 1;
        }
        let len = line[seg].distance(line[seg + 1]);
        out.push(line[seg].lerp(line[seg + 1], (s - seg_start) / len));
        k += 1;
    }
    if total > 0.0 {
        out.push(*line.last().expect("non-empty"));
    }
    out
}

/// Per-sender sequence numbering plus heartbeat and reconnect bookkeeping
/// shared by the bots.
struct BotLink {
    mode: DriveMode,
    link: LinkConfig,
    seq: u64,
    heartbeats_sent: u64,
    last_heard: f64,
    connected: bool,
    hello_sent: bool,
}

impl BotLink {
    fn new(mode: DriveMode, link: LinkConfig) -> Self {
        Self {
            mode,
            link,
            seq: 0,
            heartbeats_sent: 0,
            last_heard: 0.0,
            connected: true,
            hello_sent: false,
        }
    }

    fn message(&mut self, payload: Payload, now: f64) -> Message {
        self.seq += 1;
        Message {
            seq: self.seq,
            sent_at: now,
            payload,
        }
    }

    fn hello(&mut self, now: f64) -> Message {
        self.message(
            Payload::Hello(HelloPayload {
                role: Role::Operator,
                mode: self.mode,
            }),
            now,
        )
    }

    fn heard(&mut self, now: f64) {
        self.last_heard = now;
    }

    /// Hello on start and after the vehicle comes back, then periodic heartbeats.
    fn housekeeping(&mut self, now: f64, out: &mut OperatorOutput) {
        if !self.hello_sent {
            self.hello_sent = true;
            let m = self.hello(now);
            out.messages.push(m);
        }
        match (self.connected, liveness(self.last_heard, now, &self.link)) {
            (true, Liveness::Disconnected) => self.connected = false,
            (false, Liveness::Connected) => {
                self.connected = true;
                let m = self.hello(now);
                out.messages.push(m);
            }
            _ => {}
        }
        let due = self.heartbeats_sent as f64 * self.link.heartbeat_period;
        if now + 1e-9 >= due {
            self.heartbeats_sent += 1;
            let m = self.message(Payload::Heartbeat, now);
            out.messages.push(m);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SeqPhase {
    Placing { pending: Option<(u64, f64)> },
    Accelerating { last_press: f64 },
}

/// Places the whole lap as one path, waits for the Ack, then presses
/// accelerate until the vehicle reports `v_max` as its target.
pub struct SequentialBot {
    link: BotLink,
    waypoints: Vec<Vec2>,
    v_max: f64,
    phase: SeqPhase,
    target_v: f64,
}

impl SequentialBot {
    pub fn new(centerline: &[Vec2], params: &VehicleParams, link: LinkConfig) -> Self {
        Self {
            link: BotLink::new(DriveMode::Sequential, link),
            waypoints: resample_polyline(centerline, WP_SPACING),
            v_max: params.v_max,
            phase: SeqPhase::Placing { pending: None },
            target_v: 0.0,
        }
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }
}

impl Operator for SequentialBot {
    fn on_message(&mut self, msg: &Message, now: f64) {
        self.link.heard(now);
        match &msg.payload {
            Payload::Ack(ack) => {
                if let SeqPhase::Placing {
                    pending: Some((seq, _)),
                } = self.phase
                {
                    if ack.ack_seq == seq && ack.accepted {
                        self.phase = SeqPhase::Accelerating {
                            last_press: f64::NEG_INFINITY,
                        };
                    }
                }
            }
            Payload::Telemetry(t) => self.target_v = t.target_v,
            _ => {}
        }
    }

    fn tick(&mut self, now: f64, out: &mut OperatorOutput) {
        self.link.housekeeping(now, out);
        match self.phase {
            SeqPhase::Placing { pending } => {
                if pending.is_none_or(|(_, sent)| now - sent >= PATH_RETRY) {
                    let edit = PathEdit::Replace {
                        waypoints: self.waypoints.clone(),
                    };
                    let m = self.link.message(Payload::PathSet(edit), now);
                    self.phase = SeqPhase::Placing {
                        pending: Some((m.seq, now)),
                    };
                    out.messages.push(m);
                }
            }
            SeqPhase::Accelerating { last_press } => {
                if self.target_v < self.v_max - 1e-9 && now - last_press >= BOT_KEY_INTERVAL - 1e-9
                {
                    let m = self
                        .link
                        .message(Payload::VelocityCmd(VelocityCommand::Accelerate), now);
                    out.messages.push(m);
                    self.phase = SeqPhase::Accelerating { last_press: now };
                }
            }
        }
    }
}

/// Steers by pure pursuit on the reference centerline using the latest
/// telemetry, with the accelerator held. Every command is based on state
/// that is one link latency old and arrives one latency late.
pub struct DirectBot {
    link: BotLink,
    params: VehicleParams,
    spline: PathSpline,
    tracker: PathTracker,
    pending: Vec<Payload>,
}

impl DirectBot {
    pub fn new(
        centerline: &[Vec2],
        params: &VehicleParams,
        link: LinkConfig,
    ) -> Result<Self, PathError> {
        Ok(Self {
            link: BotLink::new(DriveMode::Direct, link),
            params: *params,
            spline: build_spline(centerline)?,
            tracker: PathTracker::new(DIRECT_BOT_LOOKAHEAD),
            pending: Vec::new(),
        })
    }

    fn command(&mut self, t: &TelemetryPayload) -> DirectCmdPayload {
        let state = VehicleState {
            x: t.x,
            y: t.y,
            heading: t.heading,
            v: t.v,
            steering: t.steering,
        };
        let s = self.tracker.update_progress(&state, &self.spline);
        let steering = pursuit_steering_from(
            &state,
            &self.spline,
            s,
            self.tracker.lookahead(),
            &self.params,
        );
        let remaining = self.tracker.remaining(&self.spline);
        let stopping = t.v * t.v / (2.0 * self.params.decel);
        DirectCmdPayload {
            steer: steering / self.params.max_steering,
            pedal: if remaining <= stopping {
                Pedal::Brake
            } else {
                Pedal::Accel
            },
        }
    }
}

impl Operator for DirectBot {
    fn on_message(&mut self, msg: &Message, now: f64) {
        self.link.heard(now);
        if let Payload::Telemetry(t) = &msg.payload {
            let cmd = self.command(t);
            self.pending.push(Payload::DirectCmd(cmd));
        }
    }

    fn tick(&mut self, now: f64, out: &mut OperatorOutput) {
        self.link.housekeeping(now, out);
        for p in std::mem::take(&mut self.pending) {
            let m = self.link.message(p, now);
            out.messages.push(m);
        }
    }
}

/// No operator at all.
pub struct IdleOperator;

impl Operator for IdleOperator {
    fn on_message(&mut self, _msg: &Message, _now: f64) {}
    fn tick(&mut self, _now: f64, _out: &mut OperatorOutput) {}
    fn is_scripted(&self) -> bool {
        false
    }
}

/// Bridges a [`LinkServer`]: delivered vehicle messages go out to every
/// connected station, and station messages enter the simulated uplink.
pub struct RemoteOperator {
    server: LinkServer,
}

impl RemoteOperator {
    pub fn new(server: LinkServer) -> Self {
        Self { server }
    }

    pub fn server(&self) -> &LinkServer {
        &self.server
    }
}

impl Operator for RemoteOperator {
    fn on_message(&mut self, msg: &Message, _now: f64) {
        self.server.broadcast(&encode(msg));
    }

    fn tick(&mut self, now: f64, out: &mut OperatorOutput) {
        for item in self.server.poll() {
            match item {
                Inbound::Message(_, mut msg) => {
                    // One clock for the whole session.
                    msg.sent_at = now;
                    out.messages.push(msg);
                }
                Inbound::Rejected(peer, reason) => out
                    .notices
                    .push((SessionEventKind::SchemaError, format!("{peer}: {reason}"))),
                Inbound::Connected(peer) => log::info!("operator station connected from {peer}"),
                Inbound::Closed(peer) => log::info!("operator station {peer} disconnected"),
            }
        }
    }

    fn is_scripted(&self) -> bool {
        false
    }
}
