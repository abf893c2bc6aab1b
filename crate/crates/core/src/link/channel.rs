//! Simulated one-way link: loss, latency with uniform jitter, FIFO delivery.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_HEARTBEAT_PERIOD: f64 = 0.1;
pub const DEFAULT_DISCONNECT_TIMEOUT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid link config `{field}`: {reason}")]
pub struct LinkConfigError {
    pub field: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// One-way mean latency (s).
    pub latency: f64,
    /// Half-width of the uniform jitter around `latency` (s).
    pub jitter: f64,
    pub loss_rate: f64,
    pub heartbeat_period: f64,
    pub disconnect_timeout: f64,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            latency: 0.0,
            jitter: 0.0,
            loss_rate: 0.0,
            heartbeat_period: DEFAULT_HEARTBEAT_PERIOD,
            disconnect_timeout: DEFAULT_DISCONNECT_TIMEOUT,
            seed: 0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), LinkConfigError> {
        let fail = |field, reason: &str| {
            Err(LinkConfigError {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.latency.is_finite() && self.latency >= 0.0) {
            return fail("latency", "must be finite and >= 0");
        }
        if !(self.jitter >= 0.0 && self.jitter <= self.latency) {
            return fail("jitter", "must lie in [0, latency]");
        }
        if !(0.0..1.0).contains(&self.loss_rate) {
            return fail("loss_rate", "must lie in [0, 1)");
        }
        if !(self.heartbeat_period.is_finite() && self.heartbeat_period > 0.0) {
            return fail("heartbeat_period", "must be finite and > 0");
        }
        if !(self.disconnect_timeout.is_finite() && self.heartbeat_period < self.disconnect_timeout)
        {
            return fail("disconnect_timeout", "must exceed heartbeat_period");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    At(f64),
    Dropped,
}

impl Delivery {
    pub fn time(&self) -> Option<f64> {
        match self {
            Delivery::At(t) => Some(*t),
            Delivery::Dropped => None,
        }
    }
}

/// Random stream and FIFO bookkeeping of one sender.
#[derive(Debug, Clone)]
pub struct ChannelState {
    rng: ChaCha8Rng,
    last_delivery: f64,
}

impl ChannelState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_delivery: f64::NEG_INFINITY,
        }
    }
}

/// Decides the fate of one message sent at `now`. Every call consumes the
/// same amount of randomness, so the schedule depends only on the seed and
/// the number of messages sent before.
pub fn channel_deliver(config: &LinkConfig, state: &mut ChannelState, now: f64) -> Delivery {
    let loss_draw: f64 = state.rng.gen();
    let jitter_draw: f64 = state.rng.gen();
    if loss_draw < config.loss_rate {
        return Delivery::Dropped;
    }
    let at = now + config.latency + config.jitter * (2.0 * jitter_draw - 1.0);
    let at = at.max(now).max(state.last_delivery);
    state.last_delivery = at;
    Delivery::At(at)
}

/// One direction of the link: items wait until their delivery time.
#[derive(Debug, Clone)]
pub struct LinkChannel<T> {
    config: LinkConfig,
    state: ChannelState,
    queue: VecDeque<(f64, T)>,
}

impl<T> LinkChannel<T> {
    pub fn new(config: LinkConfig) -> Self {
        Self::with_seed(config, config.seed)
    }

    pub fn with_seed(config: LinkConfig, seed: u64) -> Self {
        Self {
            config,
            state: ChannelState::new(seed),
            queue: VecDeque::new(),
        }
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn send(&mut self, item: T, now: f64) -> Delivery {
        let d = channel_deliver(&self.config, &mut self.state, now);
        if let Delivery::At(t) = d {
            // FIFO clamping keeps the queue sorted by delivery time.
            self.queue.push_back((t, item));
        }
        d
    }

    /// Pops the oldest item due at or before `now`.
    pub fn pop_due(&mut self, now: f64) -> Option<(f64, T)> {
        if self.queue.front()?.0 <= now {
            self.queue.pop_front()
        } else {
            None
        }
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Liveness {
    Connected,
    Disconnected,
}

pub fn liveness(last_heard: f64, now: f64, config: &LinkConfig) -> Liveness {
    if now - last_heard > config.disconnect_timeout {
        Liveness::Disconnected
    } else {
        Liveness::Connected
    }
}
