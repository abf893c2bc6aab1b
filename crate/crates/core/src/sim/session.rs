//! Fixed-step session loop hosting both link endpoints.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::bots::{DirectBot, IdleOperator, Operator, OperatorOutput, SequentialBot};
use super::log::{Direction, LogHeader, LogRecord, SessionLog, LOG_FORMAT};
use super::scenario::{ClockMode, OperatorKind, Scenario, ScenarioError};
use crate::controller::{
    direct_command, simulate_tracking_from, tracking_step, update_setpoint, ControllerError,
    DriveMode, PathTracker, Prediction, SpeedEvent, SpeedSetpoint, TrackingConfig, TrackingMode,
    END_MARGIN, T_MAX,
};
use crate::geom::Vec2;
use crate::link::{
    liveness, on_disconnect, AckPayload, DirectCmdPayload, DisconnectPolicy, HelloPayload,
    LinkChannel, Liveness, Message, PathStatePayload, Payload, Role, SafetyAction,
    SessionEventKind, SessionEventPayload, TelemetryPayload, VelocityCommand,
};
use crate::path::{check_feasibility, EditGuard, PathEdit, WaypointPath};
use crate::vehicle::{self, footprint, ControlInput, VehicleParams, VehicleState};
use crate::world::WorldMap;

pub const TELEMETRY_PERIOD: f64 = 0.05;
/// Distance the vehicle must cover before a finish crossing counts.
pub const MIN_LAP_DISTANCE: f64 = 1.0;
/// Keep every n-th path sample in PathState polylines.
const POLYLINE_DECIMATION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Finished,
    PathEnd,
    CollisionLimit,
    Timeout,
    Stopped,
}

/// Vehicle endpoint: owns the vehicle state, the committed path and the
/// reaction to operator commands and link loss.
pub struct VehicleAgent {
    mode: DriveMode,
    params: VehicleParams,
    policy: DisconnectPolicy,
    freeze_while_moving: bool,
    tracking: TrackingConfig,
    link: crate::link::LinkConfig,

    state: VehicleState,
    path: WaypointPath,
    revision: u64,
    tracker: PathTracker,
    setpoint: SpeedSetpoint,
    direct: DirectCmdPayload,
    prediction: Option<Prediction>,
    predictions_made: u64,

    last_heard: f64,
    connected: bool,
    safety: Option<SafetyAction>,
    moved: bool,

    seq: u64,
    dirty: bool,
    replies: Vec<Payload>,
    events: Vec<(SessionEventKind, Option<String>)>,
    committed: Option<Vec<Vec2>>,
}

impl VehicleAgent {
    pub fn new(scenario: &Scenario, start: VehicleState) -> Self {
        Self {
            mode: scenario.mode,
            params: scenario.vehicle,
            policy: scenario.disconnect_policy,
            freeze_while_moving: scenario.freeze_while_moving,
            tracking: TrackingConfig {
                lookahead: scenario.controller.lookahead,
                dt: scenario.dt,
                horizon: T_MAX,
            },
            link: scenario.link,
            state: start,
            path: WaypointPath::default(),
            revision: 0,
            tracker: PathTracker::new(scenario.controller.lookahead),
            setpoint: SpeedSetpoint::new(scenario.controller.step_dv),
            direct: DirectCmdPayload {
                steer: 0.0,
                pedal: crate::controller::Pedal::None,
            },
            prediction: None,
            predictions_made: 0,
            last_heard: 0.0,
            connected: true,
            safety: None,
            moved: false,
            seq: 0,
            dirty: false,
            replies: Vec::new(),
            events: Vec::new(),
            committed: None,
        }
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    pub fn path(&self) -> &WaypointPath {
        &self.path
    }

    pub fn setpoint(&self) -> SpeedSetpoint {
        self.setpoint
    }

    pub fn prediction(&self) -> Option<&Prediction> {
        self.prediction.as_ref()
    }

    /// Number of predictions computed so far; changes whenever a new one replaces the old.
    pub fn predictions_made(&self) -> u64 {
        self.predictions_made
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn safety(&self) -> Option<SafetyAction> {
        self.safety
    }

    pub fn tracking_mode(&self) -> TrackingMode {
        match (self.mode, self.safety) {
            (_, Some(_)) => TrackingMode::SafetyStopping,
            (DriveMode::Direct, None) => TrackingMode::Direct,
            (DriveMode::Sequential, None) if self.state.v > 0.0 => TrackingMode::SequentialDriving,
            (DriveMode::Sequential, None) => TrackingMode::SequentialIdle,
        }
    }

    fn guard(&self) -> EditGuard {
        let moving = self.state.v > 0.0 || self.setpoint.target_v > 0.0;
        EditGuard {
            freeze_while_moving: self.freeze_while_moving,
            driving: moving.then(|| self.tracker.s_progress()),
        }
    }

    fn event(&mut self, kind: SessionEventKind, detail: Option<String>) {
        self.events.push((kind, detail));
    }

    fn reject(&mut self, reason: &str) {
        self.event(SessionEventKind::CommandRejected, Some(reason.to_string()));
    }

    pub fn receive(&mut self, msg: &Message, now: f64) {
        if !self.connected {
            if let Payload::Hello(_) = msg.payload {
                self.connected = true;
                self.last_heard = now;
                self.safety = None;
                self.direct = DirectCmdPayload {
                    steer: self.state.steering / self.params.max_steering,
                    pedal: crate::controller::Pedal::None,
                };
                self.event(SessionEventKind::Reconnect, None);
                self.greet();
            }
            return;
        }
        self.last_heard = now;
        match &msg.payload {
            Payload::Hello(_) => self.greet(),
            Payload::Heartbeat => {}
            Payload::PathSet(edit) => self.apply_edit(msg.seq, edit),
            Payload::VelocityCmd(cmd) => self.apply_velocity(*cmd),
            Payload::DirectCmd(cmd) => match self.mode {
                DriveMode::Direct => self.direct = *cmd,
                DriveMode::Sequential => self.reject("direct command in sequential mode"),
            },
            Payload::PathState(_)
            | Payload::Telemetry(_)
            | Payload::SessionEvent(_)
            | Payload::Ack(_) => self.reject("vehicle-to-operator message sent to the vehicle"),
        }
    }

    fn greet(&mut self) {
        self.replies.push(Payload::Hello(HelloPayload {
            role: Role::Vehicle,
            mode: self.mode,
        }));
        self.dirty = true;
    }

    fn apply_edit(&mut self, seq: u64, edit: &PathEdit) {
        let result = match self.mode {
            DriveMode::Direct => Err("path edits need sequential mode".to_string()),
            DriveMode::Sequential => self
                .path
                .apply(edit, &self.guard())
                .map_err(|e| e.to_string()),
        };
        let ack = match result {
            Ok(path) => {
                if matches!(edit, PathEdit::Replace { .. } | PathEdit::Clear) {
                    self.tracker = PathTracker::new(self.tracking.lookahead);
                }
                self.committed = Some(path.waypoints().to_vec());
                self.path = path;
                self.revision += 1;
                self.dirty = true;
                AckPayload {
                    ack_seq: seq,
                    accepted: true,
                    reason: None,
                }
            }
            Err(reason) => {
                self.reject(&reason);
                AckPayload {
                    ack_seq: seq,
                    accepted: false,
                    reason: Some(reason),
                }
            }
        };
        self.replies.push(Payload::Ack(ack));
    }

    fn apply_velocity(&mut self, cmd: VelocityCommand) {
        if self.mode == DriveMode::Direct {
            return self.reject("speed commands need sequential mode");
        }
        if self.path.spline().is_none() {
            return self.event(SessionEventKind::NoPath, None);
        }
        let before = self.setpoint;
        self.setpoint = match cmd {
            VelocityCommand::Accelerate => {
                update_setpoint(self.setpoint, SpeedEvent::Accelerate, &self.params)
            }
            VelocityCommand::Decelerate => {
                update_setpoint(self.setpoint, SpeedEvent::Decelerate, &self.params)
            }
            VelocityCommand::Stop => SpeedSetpoint {
                target_v: 0.0,
                ..self.setpoint
            },
        };
        if self.setpoint != before {
            self.dirty = true;
        }
    }

    /// Drops back to autonomous safety behaviour once the operator goes quiet.
    fn check_link(&mut self, now: f64) {
        if self.connected && liveness(self.last_heard, now, &self.link) == Liveness::Disconnected {
            self.connected = false;
            let action = on_disconnect(self.mode, self.policy, &self.state);
            self.setpoint = action.setpoint(self.setpoint);
            self.safety = Some(action);
            self.dirty = true;
            self.event(SessionEventKind::Disconnect, None);
        }
    }

    /// Recomputes the prediction after path or setpoint changes and queues a
    /// PathState for the operator.
    fn refresh(&mut self) -> Result<(), ControllerError> {
        if !self.dirty {
            return Ok(());
        }
        self.dirty = false;
        self.prediction = match self.path.spline() {
            Some(spline) => {
                let sp = if self.setpoint.target_v > 0.0 {
                    self.setpoint
                } else {
                    SpeedSetpoint {
                        target_v: self.params.v_max,
                        ..self.setpoint
                    }
                };
                Some(simulate_tracking_from(
                    self.tracker.clone(),
                    spline,
                    &self.state,
                    &sp,
                    &self.params,
                    &self.tracking,
                )?)
            }
            None => None,
        };
        self.predictions_made += 1;
        let payload = self.path_state();
        self.replies.push(Payload::PathState(Box::new(payload)));
        Ok(())
    }

    pub fn path_state(&self) -> PathStatePayload {
        let frozen = self.guard().is_frozen();
        let Some(spline) = self.path.spline() else {
            return PathStatePayload {
                revision: self.revision,
                waypoints: self.path.waypoints().to_vec(),
                centerline: Vec::new(),
                left: Vec::new(),
                right: Vec::new(),
                segments: Vec::new(),
                predicted: Vec::new(),
                frozen,
            };
        };
        let bounds = spline
            .offset_boundaries(self.params.width)
            .expect("validated vehicle width");
        let centerline: Vec<Vec2> = spline.samples().iter().map(|s| s.position()).collect();
        let predicted: Vec<Vec2> = self
            .prediction
            .as_ref()
            .map(|p| p.poses.iter().map(|s| s.position()).collect())
            .unwrap_or_default();
        PathStatePayload {
            revision: self.revision,
            waypoints: self.path.waypoints().to_vec(),
            centerline: decimate(&centerline),
            left: decimate(&bounds.left),
            right: decimate(&bounds.right),
            segments: check_feasibility(spline, &self.params).segments,
            predicted: decimate(&predicted),
            frozen,
        }
    }

    fn control_input(&mut self) -> Result<Option<ControlInput>, ControllerError> {
        if let Some(input) = self.safety.and_then(|a| a.override_input(&self.params)) {
            return Ok(Some(input));
        }
        match self.mode {
            DriveMode::Direct => Ok(Some(direct_command(
                self.direct.steer,
                self.direct.pedal,
                &self.params,
            ))),
            // Path tracking steps the vehicle itself, see `advance`.
            DriveMode::Sequential if self.path.spline().is_some() => Ok(None),
            DriveMode::Sequential => Ok(Some(ControlInput {
                steering_target: self.state.steering,
                accel_cmd: if self.state.v > 0.0 {
                    -self.params.decel
                } else {
                    0.0
                },
            })),
        }
    }

    /// One control tick and vehicle step.
    fn advance(&mut self) -> Result<(), ControllerError> {
        let dt = self.tracking.dt;
        self.state = match (self.control_input()?, self.path.spline()) {
            (Some(input), _) => vehicle::step(&self.state, &input, &self.params, dt)?,
            (None, Some(spline)) => tracking_step(
                &mut self.tracker,
                &self.state,
                spline,
                &self.setpoint,
                &self.params,
                dt,
            )?,
            (None, None) => unreachable!("tracking without a path"),
        };
        if !self.moved && self.state.v > 0.0 {
            self.moved = true;
            self.event(SessionEventKind::StartMoving, None);
        }
        Ok(())
    }

    /// At rest at the end of the path after having driven.
    fn parked_at_path_end(&self) -> bool {
        match self.path.spline() {
            Some(spline)
                if self.moved && self.state.v == 0.0 && self.mode == DriveMode::Sequential =>
            {
                self.tracker.remaining(spline) <= END_MARGIN
            }
            _ => false,
        }
    }

    fn telemetry(&self, now: f64, clearance: f64, colliding: bool) -> TelemetryPayload {
        let s = &self.state;
        TelemetryPayload {
            t: now,
            x: s.x,
            y: s.y,
            heading: s.heading,
            v: s.v,
            steering: s.steering,
            target_v: self.setpoint.target_v,
            mode: self.tracking_mode(),
            s_progress: self.path.spline().map(|_| self.tracker.s_progress()),
            clearance: clearance.is_finite().then_some(clearance),
            colliding,
        }
    }

    fn next_message(&mut self, payload: Payload, now: f64) -> Message {
        self.seq += 1;
        Message {
            seq: self.seq,
            sent_at: now,
            payload,
        }
    }
}

fn decimate(points: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = points
        .iter()
        .step_by(POLYLINE_DECIMATION)
        .copied()
        .collect();
    if let Some(&last) = points.last() {
        if !(points.len() - 1).is_multiple_of(POLYLINE_DECIMATION) {
            out.push(last);
        }
    }
    out
}

pub struct Session {
    scenario: Scenario,
    map: WorldMap,
    tick: u64,
    telemetry_every: u64,
    uplink: LinkChannel<Message>,
    downlink: LinkChannel<Message>,
    vehicle: VehicleAgent,
    operator: Box<dyn Operator>,
    log: SessionLog,
    odometer: f64,
    colliding: bool,
    clearance: f64,
    collision_episodes: u32,
    last_hit: Option<f64>,
    outcome: Option<Outcome>,
    stop: Option<Arc<AtomicBool>>,
}

/// Stream seeds for the two link directions.
const UPLINK_STREAM: u64 = 0x5550;
const DOWNLINK_STREAM: u64 = 0x444f;

impl Session {
    /// Builds a session with the operator the scenario names. An external
    /// operator without a transport is idle.
    pub fn new(scenario: Scenario, base_dir: Option<&Path>) -> Result<Self, ScenarioError> {
        let map = scenario.prepare(base_dir)?;
        let line = map.reference_centerline.clone().unwrap_or_default();
        let operator: Box<dyn Operator> = match scenario.operator {
            OperatorKind::External => Box::new(IdleOperator),
            OperatorKind::BotSequential => {
                Box::new(SequentialBot::new(&line, &scenario.vehicle, scenario.link))
            }
            OperatorKind::BotDirect => Box::new(
                DirectBot::new(&line, &scenario.vehicle, scenario.link).map_err(|e| {
                    ScenarioError::Invalid {
                        field: "map.reference_centerline".into(),
                        reason: e.to_string(),
                    }
                })?,
            ),
        };
        Ok(Self::with_operator(scenario, map, operator))
    }

    /// Builds a session around a prepared map and a custom operator.
    pub fn with_operator(scenario: Scenario, map: WorldMap, operator: Box<dyn Operator>) -> Self {
        let mut link = scenario.link;
        link.seed = scenario.seed;
        let header = LogHeader {
            format: LOG_FORMAT.into(),
            name: scenario.name.clone(),
            mode: scenario.mode,
            seed: scenario.seed,
            dt: scenario.dt,
            scenario: scenario.snapshot(),
            map: map.clone(),
        };
        let sp = map.start_pose;
        let start = VehicleState::at_rest(sp.x, sp.y, sp.heading);
        let mut session = Self {
            telemetry_every: ((TELEMETRY_PERIOD / scenario.dt).round() as u64).max(1),
            uplink: LinkChannel::with_seed(link, scenario.seed ^ UPLINK_STREAM),
            downlink: LinkChannel::with_seed(link, scenario.seed ^ DOWNLINK_STREAM),
            vehicle: VehicleAgent::new(&scenario, start),
            operator,
            log: SessionLog::new(header),
            tick: 0,
            odometer: 0.0,
            colliding: false,
            clearance: f64::INFINITY,
            collision_episodes: 0,
            last_hit: None,
            outcome: None,
            stop: None,
            scenario,
            map,
        };
        session.log.push(LogRecord::Tick {
            t: 0.0,
            state: start,
            target_v: 0.0,
        });
        session
    }

    pub fn set_stop_flag(&mut self, flag: Arc<AtomicBool>) {
        self.stop = Some(flag);
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.scenario.dt
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn map(&self) -> &WorldMap {
        &self.map
    }

    pub fn vehicle(&self) -> &VehicleAgent {
        &self.vehicle
    }

    pub fn state(&self) -> &VehicleState {
        &self.vehicle.state
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn into_log(self) -> SessionLog {
        self.log
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    fn link_cut(&self, now: f64) -> bool {
        self.scenario.link_cut_at.is_some_and(|cut| now >= cut)
    }

    fn send(&mut self, dir: Direction, message: Message, now: f64) {
        let deliver_at = if self.link_cut(now) {
            None
        } else {
            let ch = match dir {
                Direction::Uplink => &mut self.uplink,
                Direction::Downlink => &mut self.downlink,
            };
            ch.send(message.clone(), now).time()
        };
        self.log.push(LogRecord::Send {
            t: now,
            dir,
            deliver_at,
            message,
        });
    }

    fn flush_vehicle(&mut self, now: f64) {
        for payload in std::mem::take(&mut self.vehicle.replies) {
            let m = self.vehicle.next_message(payload, now);
            self.send(Direction::Downlink, m, now);
        }
        if let Some(waypoints) = self.vehicle.committed.take() {
            self.log.push(LogRecord::Path { t: now, waypoints });
        }
        for (event, detail) in std::mem::take(&mut self.vehicle.events) {
            self.session_event(event, detail, now);
        }
    }

    fn session_event(&mut self, event: SessionEventKind, detail: Option<String>, now: f64) {
        self.log.push(LogRecord::Event {
            t: now,
            event,
            detail: detail.clone(),
        });
        let m = self.vehicle.next_message(
            Payload::SessionEvent(SessionEventPayload { event, detail }),
            now,
        );
        self.send(Direction::Downlink, m, now);
    }

    fn finish(&mut self, outcome: Outcome, event: SessionEventKind, now: f64) -> Option<Outcome> {
        self.session_event(event, None, now);
        self.outcome = Some(outcome);
        self.outcome
    }

    /// Advances one fixed step. Returns the outcome once the session ends.
    pub fn step(&mut self) -> Result<Option<Outcome>, ControllerError> {
        if self.outcome.is_some() {
            return Ok(self.outcome);
        }
        let dt = self.scenario.dt;
        let now = self.time();
        let next = (self.tick + 1) as f64 * dt;

        if self
            .stop
            .as_ref()
            .is_some_and(|f| f.load(Ordering::Relaxed))
        {
            return Ok(self.finish(Outcome::Stopped, SessionEventKind::Stopped, now));
        }

        // Deliveries due now, then the vehicle reacts.
        while let Some((_, msg)) = self.uplink.pop_due(now) {
            self.log.push(LogRecord::Deliver {
                t: now,
                dir: Direction::Uplink,
                seq: msg.seq,
                kind: msg.kind(),
            });
            self.vehicle.receive(&msg, now);
        }
        while let Some((_, msg)) = self.downlink.pop_due(now) {
            self.log.push(LogRecord::Deliver {
                t: now,
                dir: Direction::Downlink,
                seq: msg.seq,
                kind: msg.kind(),
            });
            self.operator.on_message(&msg, now);
        }
        self.vehicle.check_link(now);
        self.vehicle.refresh()?;
        self.flush_vehicle(now);

        let prev = self.vehicle.state;
        self.vehicle.advance()?;
        self.tick += 1;
        let state = self.vehicle.state;
        self.odometer += prev.position().distance(state.position());
        self.log.push(LogRecord::Tick {
            t: next,
            state,
            target_v: self.vehicle.setpoint.target_v,
        });

        let fp = footprint(&state, &self.scenario.vehicle);
        let hits = self.map.collides(&fp);
        self.colliding = !hits.is_empty();
        self.clearance = self.map.clearance(&fp);
        if self.colliding {
            let clear_time = self.last_hit.map(|t| next - t - dt);
            if clear_time.is_none_or(|gap| gap >= super::metrics::EPISODE_GAP) {
                self.collision_episodes += 1;
            }
            self.last_hit = Some(next);
            self.log.push(LogRecord::Collision {
                t: next,
                obstacles: hits,
            });
        }
        self.flush_vehicle(next);

        if self.odometer >= MIN_LAP_DISTANCE
            && self.map.crossed_finish(prev.position(), state.position())
        {
            return Ok(self.finish(Outcome::Finished, SessionEventKind::Finish, next));
        }

        if self.tick.is_multiple_of(self.telemetry_every) {
            let t = self.vehicle.telemetry(next, self.clearance, self.colliding);
            let m = self.vehicle.next_message(Payload::Telemetry(t), next);
            self.send(Direction::Downlink, m, next);
        }
        let hb_every = ((self.scenario.link.heartbeat_period / dt).round() as u64).max(1);
        if self.tick.is_multiple_of(hb_every) {
            let m = self.vehicle.next_message(Payload::Heartbeat, next);
            self.send(Direction::Downlink, m, next);
        }

        let mut out = OperatorOutput::default();
        self.operator.tick(next, &mut out);
        for m in out.messages {
            self.send(Direction::Uplink, m, next);
        }
        for (event, detail) in out.notices {
            self.session_event(event, Some(detail), next);
        }

        if self
            .scenario
            .collision_limit
            .is_some_and(|limit| self.collision_episodes >= limit)
        {
            return Ok(self.finish(
                Outcome::CollisionLimit,
                SessionEventKind::CollisionLimit,
                next,
            ));
        }
        if self.operator.is_scripted() && self.vehicle.parked_at_path_end() {
            return Ok(self.finish(Outcome::PathEnd, SessionEventKind::PathEnd, next));
        }
        if next >= self.scenario.timeout_s - 1e-9 {
            return Ok(self.finish(Outcome::Timeout, SessionEventKind::Timeout, next));
        }
        Ok(None)
    }

    /// Runs to completion, pacing against the wall clock in realtime mode.
    pub fn run_to_end(&mut self) -> Result<Outcome, ControllerError> {
        let started = Instant::now();
        loop {
            if let Some(outcome) = self.step()? {
                return Ok(outcome);
            }
            if self.scenario.clock == ClockMode::Realtime {
                let due = started + Duration::from_secs_f64(self.time());
                if let Some(wait) = due.checked_duration_since(Instant::now()) {
                    std::thread::sleep(wait);
                }
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

/// Runs a scenario with its configured operator and returns the full log.
pub fn run(scenario: &Scenario) -> Result<SessionLog, RunError> {
    let mut session = Session::new(scenario.clone(), None)?;
    session.run_to_end()?;
    Ok(session.into_log())
}
