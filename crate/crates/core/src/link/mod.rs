//! Operator-vehicle protocol: messages, framing, the simulated lossy link,
//! liveness and the vehicle's reaction to a lost link.

mod channel;
pub mod codec;
mod message;
mod safety;
pub mod transport;

pub use channel::{
    channel_deliver, liveness, ChannelState, Delivery, LinkChannel, LinkConfig, LinkConfigError,
    Liveness, DEFAULT_DISCONNECT_TIMEOUT, DEFAULT_HEARTBEAT_PERIOD,
};
pub use codec::{decode, encode, DecodeError, FrameDecoder, FrameError, MAX_FRAME_LEN};
pub use message::{
    AckPayload, DirectCmdPayload, HelloPayload, Message, MessageKind, PathStatePayload, Payload,
    Role, SessionEventKind, SessionEventPayload, TelemetryPayload, VelocityCommand,
};
pub use safety::{on_disconnect, DisconnectPolicy, SafetyAction};
