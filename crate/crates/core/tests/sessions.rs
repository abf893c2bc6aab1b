use proptest::prelude::*;
use telepath::controller::DriveMode;
use telepath::link::{
    HelloPayload, LinkConfig, Message, Payload, Role, SessionEventKind, VelocityCommand,
};
use telepath::path::{build_spline, check_feasibility};
use telepath::sim::{
    compute_metrics, export_metrics, fleet_scenario, median, parse_metrics_csv, run, ClockMode,
    Direction, FleetSummary, LogRecord, MapRef, Operator, OperatorOutput, Outcome, Scenario,
    SequentialBot, Session, SessionLog,
};
use telepath::vehicle::{VehicleParams, VehicleState};
use telepath::world::WorldMap;

fn ticks(log: &SessionLog) -> Vec<(f64, VehicleState)> {
    log.ticks().map(|(t, s)| (t, *s)).collect()
}

fn event_time(log: &SessionLog, kind: SessionEventKind) -> Option<f64> {
    log.events().find(|(_, e)| *e == kind).map(|(t, _)| t)
}

fn distance_driven(log: &SessionLog) -> f64 {
    ticks(log)
        .windows(2)
        .map(|w| w[0].1.position().distance(w[1].1.position()))
        .sum()
}

/// Says hello, then presses accelerate once a second without ever placing a path.
struct PedalOnly {
    seq: u64,
    last: f64,
}

impl Operator for PedalOnly {
    fn on_message(&mut self, _msg: &Message, _now: f64) {}

    fn tick(&mut self, now: f64, out: &mut OperatorOutput) {
        let first = self.seq == 0;
        let mut send = |payload| {
            self.seq += 1;
            out.messages.push(Message {
                seq: self.seq,
                sent_at: now,
                payload,
            });
        };
        if first {
            send(Payload::Hello(HelloPayload {
                role: Role::Operator,
                mode: DriveMode::Sequential,
            }));
        }
        if now - self.last >= 1.0 {
            send(Payload::VelocityCmd(VelocityCommand::Accelerate));
        }
        send(Payload::Heartbeat);
        if now - self.last >= 1.0 {
            self.last = now;
        }
    }
}

#[test]
fn accelerate_without_path_never_moves() {
    let scenario = Scenario {
        timeout_s: 5.0,
        ..Scenario::default()
    };
    let map = scenario.prepare(None).unwrap();
    let mut session = Session::with_operator(
        scenario,
        map,
        Box::new(PedalOnly {
            seq: 0,
            last: f64::NEG_INFINITY,
        }),
    );
    assert_eq!(session.run_to_end().unwrap(), Outcome::Timeout);
    let log = session.into_log();
    assert!(ticks(&log).iter().all(|(_, s)| s.v == 0.0));
    assert!(event_time(&log, SessionEventKind::NoPath).is_some());
    assert!(event_time(&log, SessionEventKind::StartMoving).is_none());
    assert!(!compute_metrics(&log).completed);
}

#[test]
fn sequential_bot_laps_without_collisions() {
    let log = run(&Scenario::bot_lap(DriveMode::Sequential, 0)).unwrap();
    let m = compute_metrics(&log);
    assert!(m.completed, "{m:?}");
    assert_eq!(m.collision_count, 0);
    let bound = 30.0 / VehicleParams::default().v_max;
    assert!(m.task_completion_time.unwrap() >= bound, "{m:?}");
    assert!(m.path_entered_length > 30.0);
}

#[test]
fn direct_bot_laps_without_collisions() {
    let log = run(&Scenario::bot_lap(DriveMode::Direct, 0)).unwrap();
    let m = compute_metrics(&log);
    assert!(m.completed, "{m:?}");
    assert_eq!(m.collision_count, 0);
}

#[test]
fn sequential_bot_path_is_feasible() {
    let map = WorldMap::builtin_default();
    let params = VehicleParams::default();
    let bot = SequentialBot::new(
        map.reference_centerline.as_ref().unwrap(),
        &params,
        LinkConfig::default(),
    );
    let spline = build_spline(bot.waypoints()).unwrap();
    let report = check_feasibility(&spline, &params);
    assert!(
        report.segments.iter().all(|s| s.feasible),
        "{:?}",
        report.segments
    );
}

#[test]
fn same_seed_gives_identical_logs() {
    let map = WorldMap::builtin_default();
    for mode in [DriveMode::Sequential, DriveMode::Direct] {
        let s = fleet_scenario(&map, mode, 5);
        let a = run(&s).unwrap().to_ndjson();
        let b = run(&s).unwrap().to_ndjson();
        assert!(a == b, "{mode:?} logs differ");
        let other = run(&fleet_scenario(&map, mode, 6)).unwrap().to_ndjson();
        assert_ne!(a, other);
    }
}

#[test]
fn realtime_and_fast_logs_match() {
    let fast = Scenario {
        timeout_s: 1.0,
        ..Scenario::bot_lap(DriveMode::Sequential, 2)
    };
    let realtime = Scenario {
        clock: ClockMode::Realtime,
        ..fast.clone()
    };
    let started = std::time::Instant::now();
    let rt = run(&realtime).unwrap().to_ndjson();
    assert!(started.elapsed().as_secs_f64() >= 0.9);
    assert_eq!(rt, run(&fast).unwrap().to_ndjson());
}

#[test]
fn link_latency_degrades_direct_tracking() {
    let base = Scenario::bot_lap(DriveMode::Direct, 1);
    let delayed = Scenario {
        link: LinkConfig {
            latency: 0.3,
            ..base.link
        },
        ..base.clone()
    };
    let ideal = compute_metrics(&run(&base).unwrap());
    let late = compute_metrics(&run(&delayed).unwrap());
    assert!(
        late.max_lateral_error > ideal.max_lateral_error,
        "{} vs {}",
        late.max_lateral_error,
        ideal.max_lateral_error
    );
}

#[test]
fn reversed_lap_does_not_finish() {
    let mut map = WorldMap::builtin_default();
    map.reference_centerline.as_mut().unwrap().reverse();
    map.start_pose.heading = std::f64::consts::PI;
    let scenario = Scenario {
        map: MapRef::Inline(Box::new(map)),
        timeout_s: 150.0,
        ..Scenario::bot_lap(DriveMode::Direct, 0)
    };
    let log = run(&scenario).unwrap();
    let m = compute_metrics(&log);
    assert!(!m.completed);
    assert_eq!(m.collision_count, 0);
    assert!(distance_driven(&log) > 29.0, "{}", distance_driven(&log));
}

#[test]
fn executed_path_matches_prediction() {
    let scenario = Scenario::bot_lap(DriveMode::Sequential, 0);
    let mut session = Session::new(scenario, None).unwrap();
    let mut made = session.vehicle().predictions_made();
    let mut current: Option<(Vec<VehicleState>, usize)> = None;
    let mut longest = 0;
    let mut worst: f64 = 0.0;
    while session.step().unwrap().is_none() {
        let v = session.vehicle();
        if v.predictions_made() != made {
            made = v.predictions_made();
            current = match (v.prediction(), v.setpoint().target_v > 0.0) {
                (Some(p), true) => Some((p.poses.clone(), 0)),
                _ => None,
            };
        }
        if let Some((poses, k)) = current.as_mut() {
            *k += 1;
            if let Some(p) = poses.get(*k) {
                let s = session.state();
                worst = worst
                    .max(p.position().distance(s.position()))
                    .max((p.heading - s.heading).abs())
                    .max((p.v - s.v).abs());
                longest = longest.max(*k);
            }
        }
    }
    assert!(longest > 5000, "{longest}");
    assert!(worst <= 1e-9, "{worst}");
}

/// Runs the sequential bot with the link cut at `cut` and returns the log.
fn cut_lap(cut: f64) -> SessionLog {
    let scenario = Scenario {
        link_cut_at: Some(cut),
        timeout_s: cut + 5.0,
        ..Scenario::bot_lap(DriveMode::Sequential, 0)
    };
    run(&scenario).unwrap()
}

#[test]
fn disconnect_mid_curve_stops_on_the_path() {
    let cut = 22.0;
    let log = cut_lap(cut);
    let params = VehicleParams::default();
    let link = LinkConfig::default();
    let waypoints = log
        .records
        .iter()
        .find_map(|r| match r {
            LogRecord::Path { waypoints, .. } => Some(waypoints.clone()),
            _ => None,
        })
        .unwrap();
    let spline = build_spline(&waypoints).unwrap();
    let ticks = ticks(&log);
    let at_cut = ticks.iter().find(|(t, _)| *t >= cut).unwrap().1;
    let s_cut = spline.project(at_cut.position()).s;
    let kappa = spline
        .samples()
        .iter()
        .min_by(|a, b| (a.s - s_cut).abs().total_cmp(&(b.s - s_cut).abs()))
        .unwrap()
        .curvature;
    assert!(kappa.abs() > 0.5, "not in a curve: {kappa}");
    assert!(at_cut.v > 0.3);

    let bound = cut + params.v_max / params.decel + link.disconnect_timeout + 0.1;
    let stopped = ticks
        .iter()
        .find(|(t, s)| *t >= cut && s.v == 0.0)
        .unwrap()
        .0;
    assert!(stopped <= bound, "{stopped} > {bound}");
    for (t, s) in ticks.iter().filter(|(t, _)| *t >= cut) {
        let d = spline.project(s.position()).distance;
        assert!(d <= params.width / 2.0, "off the corridor by {d} at {t}");
        if *t >= stopped {
            assert_eq!(s.v, 0.0);
        }
    }
}

#[test]
fn disconnect_on_straight_brakes_at_full_decel() {
    let log = cut_lap(10.0);
    let params = VehicleParams::default();
    let dt = log.header.dt;
    let t_d = event_time(&log, SessionEventKind::Disconnect).unwrap();
    let ticks = ticks(&log);
    let i = ticks.iter().position(|(t, _)| *t >= t_d).unwrap();
    let v0 = ticks[i].1.v;
    assert!((v0 - params.v_max).abs() < 1e-9, "{v0}");
    let j = i + ticks[i..].iter().position(|(_, s)| s.v == 0.0).unwrap();
    let time = ticks[j].0 - ticks[i].0;
    let dist = ticks[i].1.position().distance(ticks[j].1.position());
    // Oracle: constant deceleration from v0.
    assert!((time - v0 / params.decel).abs() <= dt + 1e-9, "{time}");
    let ideal = v0 * v0 / (2.0 * params.decel);
    assert!((dist - ideal).abs() <= v0 * dt, "{dist} vs {ideal}");
    assert!(ticks[j].1.y.abs() < 0.02, "{}", ticks[j].1.y);
}

/// The sequential bot until `silent_from`, then nothing at all.
struct FallsSilent {
    bot: SequentialBot,
    silent_from: f64,
}

impl Operator for FallsSilent {
    fn on_message(&mut self, msg: &Message, now: f64) {
        self.bot.on_message(msg, now);
    }

    fn tick(&mut self, now: f64, out: &mut OperatorOutput) {
        if now < self.silent_from {
            self.bot.tick(now, out);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn silent_operator_always_stops_the_vehicle(
        silent_from in 3.0..40.0f64,
        latency in 0.0..0.1f64,
        jitter_share in 0.0..1.0f64,
        loss_rate in 0.0..0.2f64,
        seed in any::<u64>(),
    ) {
        let jitter = latency * jitter_share;
        let link = LinkConfig { latency, jitter, loss_rate, ..LinkConfig::default() };
        let scenario = Scenario {
            link,
            seed,
            timeout_s: silent_from + 3.0,
            ..Scenario::bot_lap(DriveMode::Sequential, seed)
        };
        let map = scenario.prepare(None).unwrap();
        let params = scenario.vehicle;
        let line = map.reference_centerline.clone().unwrap();
        let op = FallsSilent { bot: SequentialBot::new(&line, &params, link), silent_from };
        let mut session = Session::with_operator(scenario, map, Box::new(op));
        session.run_to_end().unwrap();
        let log = session.into_log();
        let last_received = log
            .records
            .iter()
            .filter_map(|r| match r {
                LogRecord::Deliver { t, dir: Direction::Uplink, .. } => Some(*t),
                _ => None,
            })
            .fold(0.0, f64::max);
        prop_assert!(last_received < silent_from + latency + jitter + 1e-9);
        let deadline = last_received + link.disconnect_timeout + params.v_max / params.decel + 1.0;
        for (t, s) in ticks(&log).into_iter().filter(|(t, _)| *t >= deadline) {
            prop_assert_eq!(s.v, 0.0, "moving at {}", t);
        }
    }
}

#[test]
fn metrics_recompute_from_written_log() {
    let map = WorldMap::builtin_default();
    let log = run(&fleet_scenario(&map, DriveMode::Direct, 3)).unwrap();
    let parsed = SessionLog::parse(&log.to_ndjson()).unwrap();
    assert_eq!(compute_metrics(&parsed), compute_metrics(&log));
    assert_eq!(parsed.to_ndjson(), log.to_ndjson());
}

#[test]
fn tick_times_are_multiples_of_dt() {
    let scenario = Scenario {
        dt: 0.02,
        timeout_s: 20.0,
        ..Scenario::bot_lap(DriveMode::Sequential, 0)
    };
    let log = SessionLog::parse(&run(&scenario).unwrap().to_ndjson()).unwrap();
    let times: Vec<f64> = log.ticks().map(|(t, _)| t).collect();
    assert_eq!(times.len(), 1001);
    for (k, t) in times.iter().enumerate() {
        assert_eq!(*t, k as f64 * 0.02);
    }
}

#[test]
fn exported_metrics_parse_back() {
    let logs = [
        run(&Scenario::bot_lap(DriveMode::Direct, 0)).unwrap(),
        run(&Scenario {
            timeout_s: 5.0,
            ..Scenario::bot_lap(DriveMode::Sequential, 0)
        })
        .unwrap(),
    ];
    let rows: Vec<_> = logs.iter().map(compute_metrics).collect();
    let parsed = parse_metrics_csv(&export_metrics(&rows)).unwrap();
    assert_eq!(parsed.len(), 2);
    for (m, p) in rows.iter().zip(&parsed) {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * a.abs().max(1e-12);
        assert_eq!(p.mode, m.mode);
        assert_eq!(p.completed, m.completed);
        assert_eq!(p.collisions, m.collision_count);
        assert_eq!(
            p.task_completion_time_s.is_some(),
            m.task_completion_time.is_some()
        );
        if let (Some(a), Some(b)) = (m.task_completion_time, p.task_completion_time_s) {
            assert!(close(a, b));
        }
        assert!(close(m.max_lateral_error, p.max_lateral_error_m));
        assert!(close(m.path_entered_length, p.path_entered_length_m));
    }
}

#[test]
fn direct_fleet_is_faster() {
    let map = WorldMap::builtin_default();
    let rows = telepath::sim::compare_fleets(&map, 7).unwrap();
    assert_eq!(rows.len(), 14);
    let summary = FleetSummary::of(&rows);
    assert_eq!(summary.collisions, 0);
    assert_eq!(summary.incomplete, 0);
    let (seq, direct) = (
        summary.sequential_median.unwrap(),
        summary.direct_median.unwrap(),
    );
    assert!(direct < seq, "{direct} vs {seq}");
    let mut one = [3.0, 1.0, 2.0];
    assert_eq!(median(&mut one), Some(2.0));
}
