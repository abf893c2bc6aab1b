//! Length-prefixed JSON framing: a 4-byte big-endian body length, then the
//! UTF-8 JSON body `{"kind", "seq", "sent_at", "payload"}`.

use thiserror::Error;

use super::Message;

pub const MAX_FRAME_LEN: usize = 1 << 20;
const PREFIX_LEN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("truncated frame: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("frame body of {0} bytes exceeds the {MAX_FRAME_LEN} byte limit")]
    Oversized(usize),
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    /// Well-framed but not a valid message. The connection survives these.
    #[error("schema error: {0}")]
    Schema(String),
}

pub fn encode(msg: &Message) -> Vec<u8> {
    let body = serde_json::to_vec(msg).expect("messages serialize");
    let mut out = Vec::with_capacity(PREFIX_LEN + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

/// Decodes exactly one frame.
pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
    let len = frame_len(bytes)?.ok_or(FrameError::Truncated {
        needed: PREFIX_LEN,
        available: bytes.len(),
    })?;
    let total = PREFIX_LEN + len;
    if bytes.len() < total {
        return Err(FrameError::Truncated {
            needed: total,
            available: bytes.len(),
        }
        .into());
    }
    if bytes.len() > total {
        return Err(FrameError::TrailingBytes(bytes.len() - total).into());
    }
    decode_body(&bytes[PREFIX_LEN..])
}

pub fn decode_body(body: &[u8]) -> Result<Message, DecodeError> {
    serde_json::from_slice(body).map_err(|e| DecodeError::Schema(e.to_string()))
}

fn frame_len(bytes: &[u8]) -> Result<Option<usize>, FrameError> {
    let Some(prefix) = bytes.get(..PREFIX_LEN) else {
        return Ok(None);
    };
    let len = u32::from_be_bytes(prefix.try_into().expect("4 bytes")) as usize;
    if len > MAX_FRAME_LEN {
        return Err(FrameError::Oversized(len));
    }
    Ok(Some(len))
}

/// Incremental splitter for a byte stream carrying consecutive frames.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next complete frame body, if buffered. An oversized prefix is fatal
    /// for the stream since the frame boundary is lost.
    pub fn next_body(&mut self) -> Result<Option<Vec<u8>>, FrameError> {
        let Some(len) = frame_len(&self.buf)? else {
            return Ok(None);
        };
        if self.buf.len() < PREFIX_LEN + len {
            return Ok(None);
        }
        let body = self.buf[PREFIX_LEN..PREFIX_LEN + len].to_vec();
        self.buf.drain(..PREFIX_LEN + len);
        Ok(Some(body))
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}
