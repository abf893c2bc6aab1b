//! Hosts a realtime session behind a TCP listener and drives it from a raw
//! frame client in the same process: place a path, accelerate, watch
//! telemetry.

use std::thread;
use std::time::Duration;

use telepath::controller::DriveMode;
use telepath::geom::Vec2;
use telepath::link::transport::{LinkClient, LinkServer};
use telepath::link::{HelloPayload, Message, Payload, Role, VelocityCommand};
use telepath::path::PathEdit;
use telepath::sim::bots::RemoteOperator;
use telepath::sim::{ClockMode, Scenario, Session};

fn main() {
    let scenario = Scenario {
        clock: ClockMode::Realtime,
        timeout_s: 6.0,
        ..Scenario::default()
    };
    let map = scenario.prepare(None).expect("builtin map");
    let server = LinkServer::bind("127.0.0.1:0").expect("bind");
    let addr = server.local_addr();
    println!("session listening on {addr}");
    let host = thread::spawn(move || {
        let mut session =
            Session::with_operator(scenario, map, Box::new(RemoteOperator::new(server)));
        session.run_to_end().expect("session runs")
    });

    let mut client = LinkClient::connect(addr).expect("connect");
    let mut seq = 0;
    let mut send = |client: &mut LinkClient, payload| {
        seq += 1;
        client
            .send(&Message {
                seq,
                sent_at: 0.0,
                payload,
            })
            .expect("send");
    };
    send(
        &mut client,
        Payload::Hello(HelloPayload {
            role: Role::Operator,
            mode: DriveMode::Sequential,
        }),
    );
    let waypoints = vec![
        Vec2::new(3.0, 0.0),
        Vec2::new(5.0, 0.0),
        Vec2::new(7.0, 0.0),
    ];
    send(
        &mut client,
        Payload::PathSet(PathEdit::Replace { waypoints }),
    );

    for tick in 0..50 {
        send(&mut client, Payload::Heartbeat);
        if (2..9).contains(&tick) {
            send(
                &mut client,
                Payload::VelocityCmd(VelocityCommand::Accelerate),
            );
        }
        while let Some(Ok(msg)) = client.recv_timeout(Duration::from_millis(1)) {
            match msg.payload {
                Payload::Ack(a) => println!("ack for {}: accepted {}", a.ack_seq, a.accepted),
                Payload::Telemetry(t) if tick % 10 == 0 => {
                    println!(
                        "t {:5.2}  x {:5.2}  v {:.2}  target {:.2}",
                        t.t, t.x, t.v, t.target_v
                    )
                }
                Payload::SessionEvent(e) => println!("event {:?}", e.event),
                _ => {}
            }
        }
        thread::sleep(Duration::from_millis(100));
    }
    println!("session ended: {:?}", host.join().unwrap());
}
