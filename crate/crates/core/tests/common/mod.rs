#![allow(dead_code)]

use proptest::prelude::*;
use telepath::controller::{DriveMode, Pedal, TrackingMode};
use telepath::geom::Vec2;
use telepath::link::{
    AckPayload, DirectCmdPayload, HelloPayload, Message, PathStatePayload, Payload, Role,
    SessionEventKind, SessionEventPayload, TelemetryPayload, VelocityCommand,
};
use telepath::path::{FeasibilitySegment, PathEdit};

pub fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => -1e3..1e3f64,
        1 => any::<f64>().prop_filter("finite", |x| x.is_finite()),
        1 => Just(0.0),
        1 => Just(-0.0),
    ]
}

fn point() -> impl Strategy<Value = Vec2> {
    (finite(), finite()).prop_map(|(x, y)| Vec2::new(x, y))
}

fn points() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec(point(), 0..6)
}

fn text() -> impl Strategy<Value = Option<String>> {
    prop::option::of(".{0,12}")
}

fn edit() -> impl Strategy<Value = PathEdit> {
    prop_oneof![
        points().prop_map(|waypoints| PathEdit::Replace { waypoints }),
        point().prop_map(|point| PathEdit::Append { point }),
        (any::<usize>(), point()).prop_map(|(index, point)| PathEdit::Move { index, point }),
        Just(PathEdit::DeleteLast),
        Just(PathEdit::Clear),
    ]
}

fn event_kind() -> impl Strategy<Value = SessionEventKind> {
    prop::sample::select(vec![
        SessionEventKind::StartMoving,
        SessionEventKind::Finish,
        SessionEventKind::Disconnect,
        SessionEventKind::Reconnect,
        SessionEventKind::NoPath,
        SessionEventKind::PathEnd,
        SessionEventKind::CommandRejected,
        SessionEventKind::SchemaError,
        SessionEventKind::CollisionLimit,
        SessionEventKind::Timeout,
        SessionEventKind::Stopped,
    ])
}

fn tracking_mode() -> impl Strategy<Value = TrackingMode> {
    prop::sample::select(vec![
        TrackingMode::SequentialIdle,
        TrackingMode::SequentialDriving,
        TrackingMode::Direct,
        TrackingMode::SafetyStopping,
    ])
}

pub fn payload() -> impl Strategy<Value = Payload> {
    let path_state = (
        any::<u64>(),
        (points(), points(), points(), points(), points()),
        prop::collection::vec((finite(), finite(), any::<bool>()), 0..4),
        any::<bool>(),
    )
        .prop_map(
            |(revision, (waypoints, centerline, left, right, predicted), segs, frozen)| {
                Payload::PathState(Box::new(PathStatePayload {
                    revision,
                    waypoints,
                    centerline,
                    left,
                    right,
                    segments: segs
                        .into_iter()
                        .map(|(s_start, s_end, feasible)| FeasibilitySegment {
                            s_start,
                            s_end,
                            feasible,
                        })
                        .collect(),
                    predicted,
                    frozen,
                }))
            },
        );
    let telemetry = (
        (finite(), finite(), finite(), finite(), finite()),
        (finite(), finite(), tracking_mode()),
        (
            prop::option::of(finite()),
            prop::option::of(finite()),
            any::<bool>(),
        ),
    )
        .prop_map(
            |(
                (t, x, y, heading, v),
                (steering, target_v, mode),
                (s_progress, clearance, colliding),
            )| {
                Payload::Telemetry(TelemetryPayload {
                    t,
                    x,
                    y,
                    heading,
                    v,
                    steering,
                    target_v,
                    mode,
                    s_progress,
                    clearance,
                    colliding,
                })
            },
        );
    prop_oneof![
        (any::<bool>(), any::<bool>()).prop_map(|(op, seq)| Payload::Hello(HelloPayload {
            role: if op { Role::Operator } else { Role::Vehicle },
            mode: if seq {
                DriveMode::Sequential
            } else {
                DriveMode::Direct
            },
        })),
        Just(Payload::Heartbeat),
        edit().prop_map(Payload::PathSet),
        path_state,
        prop::sample::select(vec![
            VelocityCommand::Accelerate,
            VelocityCommand::Decelerate,
            VelocityCommand::Stop
        ])
        .prop_map(Payload::VelocityCmd),
        (
            finite(),
            prop::sample::select(vec![Pedal::Accel, Pedal::Brake, Pedal::None])
        )
            .prop_map(|(steer, pedal)| Payload::DirectCmd(DirectCmdPayload { steer, pedal })),
        telemetry,
        (event_kind(), text()).prop_map(|(event, detail)| Payload::SessionEvent(
            SessionEventPayload { event, detail }
        )),
        (any::<u64>(), any::<bool>(), text()).prop_map(|(ack_seq, accepted, reason)| Payload::Ack(
            AckPayload {
                ack_seq,
                accepted,
                reason
            }
        )),
    ]
}

pub fn message() -> impl Strategy<Value = Message> {
    (any::<u64>(), finite(), payload()).prop_map(|(seq, sent_at, payload)| Message {
        seq,
        sent_at,
        payload,
    })
}
