//! Sends heartbeats through an impaired link and shows what arrives when,
//! plus the byte frames on the wire.

use telepath::link::{decode, encode, Delivery, LinkChannel, LinkConfig, Message, Payload};

fn main() {
    let config = LinkConfig {
        latency: 0.15,
        jitter: 0.05,
        loss_rate: 0.2,
        seed: 42,
        ..LinkConfig::default()
    };
    let mut link = LinkChannel::new(config);
    for seq in 1..=12u64 {
        let now = seq as f64 * 0.02;
        let msg = Message {
            seq,
            sent_at: now,
            payload: Payload::Heartbeat,
        };
        match link.send(msg, now) {
            Delivery::At(t) => println!("seq {seq:>2} sent {now:.2} s -> due {t:.3} s"),
            Delivery::Dropped => println!("seq {seq:>2} sent {now:.2} s -> lost"),
        }
    }
    print!("delivery order:");
    while let Some((t, msg)) = link.pop_due(f64::INFINITY) {
        print!(" {}@{t:.3}", msg.seq);
    }
    println!();

    let msg = Message {
        seq: 7,
        sent_at: 1.25,
        payload: Payload::Heartbeat,
    };
    let frame = encode(&msg);
    println!(
        "frame ({} bytes): {:02x?} {}",
        frame.len(),
        &frame[..4],
        String::from_utf8_lossy(&frame[4..])
    );
    assert_eq!(decode(&frame).unwrap(), msg);
}
