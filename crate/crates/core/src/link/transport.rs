//! Stream transport for external operator stations.
//!
//! A listener accepts raw TCP connections carrying back-to-back frames, and
//! WebSocket connections (detected by the HTTP upgrade request) where each
//! binary message is one frame. Text WebSocket messages are taken as a bare
//! JSON body. Every connection gets its own thread; the simulation side only
//! polls decoded messages and broadcasts encoded frames.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use tungstenite::{Message as WsMessage, WebSocket};

use super::codec::{decode, decode_body, encode, DecodeError, FrameDecoder};
use super::Message;

const POLL_INTERVAL: Duration = Duration::from_millis(10);
const SNIFF_TIMEOUT: Duration = Duration::from_millis(200);

#[derive(Debug)]
pub enum Inbound {
    Connected(SocketAddr),
    Message(SocketAddr, Message),
    /// A frame arrived but did not decode; the connection stays open.
    Rejected(SocketAddr, String),
    Closed(SocketAddr),
}

type Outboxes = Arc<Mutex<Vec<Sender<Vec<u8>>>>>;

pub struct LinkServer {
    addr: SocketAddr,
    inbound: Receiver<Inbound>,
    outboxes: Outboxes,
}

impl LinkServer {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let (tx, inbound) = mpsc::channel();
        let outboxes: Outboxes = Arc::default();
        let boxes = outboxes.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (out_tx, out_rx) = mpsc::channel();
                boxes.lock().expect("outbox lock").push(out_tx);
                let tx = tx.clone();
                thread::spawn(move || {
                    if let Err(e) = serve(stream, tx, out_rx) {
                        log::debug!("link connection ended: {e}");
                    }
                });
            }
        });
        Ok(Self {
            addr,
            inbound,
            outboxes,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Everything received since the last poll.
    pub fn poll(&self) -> Vec<Inbound> {
        self.inbound.try_iter().collect()
    }

    /// Sends one encoded frame to every open connection.
    pub fn broadcast(&self, frame: &[u8]) {
        self.outboxes
            .lock()
            .expect("outbox lock")
            .retain(|tx| tx.send(frame.to_vec()).is_ok());
    }
}

fn serve(stream: TcpStream, tx: Sender<Inbound>, out: Receiver<Vec<u8>>) -> io::Result<()> {
    let peer = stream.peer_addr()?;
    let result = if sniff_http(&stream)? {
        let ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
        ws.get_ref().set_read_timeout(Some(POLL_INTERVAL))?;
        tx.send(Inbound::Connected(peer)).ok();
        serve_ws(ws, peer, &tx, &out)
    } else {
        stream.set_read_timeout(Some(POLL_INTERVAL))?;
        tx.send(Inbound::Connected(peer)).ok();
        serve_raw(stream, peer, &tx, &out)
    };
    tx.send(Inbound::Closed(peer)).ok();
    result
}

/// True when the client opens with an HTTP request. A client that stays
/// silent for a moment is taken to speak raw frames.
fn sniff_http(stream: &TcpStream) -> io::Result<bool> {
    stream.set_read_timeout(Some(SNIFF_TIMEOUT))?;
    let mut head = [0u8; 4];
    let n = match stream.peek(&mut head) {
        Ok(n) => n,
        Err(e) if timed_out(&e) => 0,
        Err(e) => return Err(e),
    };
    Ok(n > 0 && b"GET "[..n] == head[..n])
}

fn forward(tx: &Sender<Inbound>, peer: SocketAddr, decoded: Result<Message, DecodeError>) {
    let item = match decoded {
        Ok(msg) => Inbound::Message(peer, msg),
        Err(e) => Inbound::Rejected(peer, e.to_string()),
    };
    tx.send(item).ok();
}

fn timed_out(e: &io::Error) -> bool {
    matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut)
}

fn serve_raw(
    mut stream: TcpStream,
    peer: SocketAddr,
    tx: &Sender<Inbound>,
    out: &Receiver<Vec<u8>>,
) -> io::Result<()> {
    let mut decoder = FrameDecoder::new();
    let mut buf = [0u8; 8192];
    loop {
        for frame in out.try_iter() {
            stream.write_all(&frame)?;
        }
        match stream.read(&mut buf) {
            Ok(0) => return Ok(()),
            Ok(n) => {
                decoder.push(&buf[..n]);
                while let Some(body) = decoder.next_body().map_err(io::Error::other)? {
                    forward(tx, peer, decode_body(&body));
                }
            }
            Err(e) if timed_out(&e) => {}
            Err(e) => return Err(e),
        }
    }
}

fn serve_ws(
    mut ws: WebSocket<TcpStream>,
    peer: SocketAddr,
    tx: &Sender<Inbound>,
    out: &Receiver<Vec<u8>>,
) -> io::Result<()> {
    let ws_err = |e: tungstenite::Error| io::Error::other(e.to_string());
    loop {
        for frame in out.try_iter() {
            ws.send(WsMessage::Binary(frame)).map_err(ws_err)?;
        }
        match ws.read() {
            Ok(WsMessage::Binary(frame)) => forward(tx, peer, decode(&frame)),
            Ok(WsMessage::Text(body)) => forward(tx, peer, decode_body(body.as_bytes())),
            Ok(WsMessage::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if timed_out(&e) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(())
            }
            Err(e) => return Err(ws_err(e)),
        }
    }
}

/// Raw TCP client for the framed protocol.
pub struct LinkClient {
    stream: TcpStream,
    inbound: Receiver<Result<Message, DecodeError>>,
}

impl LinkClient {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        let mut reader = stream.try_clone()?;
        let (tx, inbound) = mpsc::channel();
        thread::spawn(move || {
            let mut decoder = FrameDecoder::new();
            let mut buf = [0u8; 8192];
            while let Ok(n) = reader.read(&mut buf) {
                if n == 0 {
                    break;
                }
                decoder.push(&buf[..n]);
                while let Ok(Some(body)) = decoder.next_body() {
                    if tx.send(decode_body(&body)).is_err() {
                        return;
                    }
                }
            }
        });
        Ok(Self { stream, inbound })
    }

    pub fn send(&mut self, msg: &Message) -> io::Result<()> {
        self.stream.write_all(&encode(msg))
    }

    /// Next received message, or `None` once `timeout` passes or the server hangs up.
    pub fn recv_timeout(&self, timeout: Duration) -> Option<Result<Message, DecodeError>> {
        self.inbound.recv_timeout(timeout).ok()
    }
}
