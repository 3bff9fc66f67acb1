//! A seeded discrete-event network standing in for short-range peer-to-peer
//! radio. Deliveries happen in nondecreasing simulated time; ties resolve
//! deliveries before window closes, then by send order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{MessageKind, ProtoMessage, ProtocolError};

/// Per-link latency in simulated milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatencyModel {
    Fixed(u64),
    /// Uniform over `[min_ms, max_ms]`, drawn from the network seed.
    Uniform { min_ms: u64, max_ms: u64 },
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if let Self::Uniform { min_ms, max_ms } = self {
            if min_ms > max_ms {
                return Err(ProtocolError::BadLatency {
                    min: *min_ms,
                    max: *max_ms,
                });
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> u64 {
        match *self {
            Self::Fixed(ms) => ms,
            Self::Uniform { min_ms, max_ms } => rng.random_range(min_ms..=max_ms),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConfig {
    pub latency: LatencyModel,
    /// Probability each message is lost; 1 drops everything.
    pub drop_probability: f64,
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.latency.validate()?;
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(ProtocolError::BadDropProbability(self.drop_probability));
        }
        Ok(())
    }

    /// Lossless fixed-latency network.
    pub fn fixed(latency_ms: u64) -> Self {
        Self {
            latency: LatencyModel::Fixed(latency_ms),
            drop_probability: 0.0,
        }
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            latency: LatencyModel::Uniform {
                min_ms: 5,
                max_ms: 50,
            },
            drop_probability: 0.0,
        }
    }
}

/// Who receives an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Photographer,
    Agent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Deliver {
        to: Endpoint,
        message: ProtoMessage,
        sent_at: u64,
    },
    WindowClose {
        session: String,
    },
}

/// Queue entries order by (time, class, sequence): deliveries at a given
/// time precede the window close at that same time, so a request arriving
/// exactly at the close is still collected.
#[derive(Debug, Clone, PartialEq)]
struct Queued {
    time: u64,
    class: u8,
    seq: u64,
    event: Event,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.class, self.seq).cmp(&(other.time, other.class, other.seq))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sent/delivered/dropped tallies per message kind. At any instant,
/// `sent = delivered + dropped + pending`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MessageCounters {
    sent: [u64; 3],
    delivered: [u64; 3],
    dropped: [u64; 3],
}

impl MessageCounters {
    fn slot(kind: MessageKind) -> usize {
        match kind {
            MessageKind::Notice => 0,
            MessageKind::Request => 1,
            MessageKind::Close => 2,
        }
    }

    pub fn sent(&self, kind: MessageKind) -> u64 {
        self.sent[Self::slot(kind)]
    }

    pub fn delivered(&self, kind: MessageKind) -> u64 {
        self.delivered[Self::slot(kind)]
    }

    pub fn dropped(&self, kind: MessageKind) -> u64 {
        self.dropped[Self::slot(kind)]
    }

    pub fn pending(&self, kind: MessageKind) -> u64 {
        self.sent(kind) - self.delivered(kind) - self.dropped(kind)
    }
}

/// What became of a send.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOutcome {
    /// Scheduled for delivery at the given time.
    Scheduled { arrives_at: u64 },
    Dropped,
}

pub struct SimNet {
    config: NetConfig,
    rng: ChaCha12Rng,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    now: u64,
    counters: MessageCounters,
}

impl SimNet {
    pub fn new(config: NetConfig, seed: u64) -> Result<Self, ProtocolError> {
        config.validate()?;
        Ok(Self {
            config,
            rng: ChaCha12Rng::seed_from_u64(seed),
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0,
            counters: MessageCounters::default(),
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn counters(&self) -> MessageCounters {
        self.counters
    }

    /// Sends `message` to `to`: the message is either dropped on the spot
    /// or scheduled one latency sample ahead. The drop draw precedes the
    /// latency draw, so the random stream is position-independent.
    pub fn send(&mut self, to: Endpoint, message: ProtoMessage) -> SendOutcome {
        let kind = MessageCounters::slot(message.kind());
        self.counters.sent[kind] += 1;
        let drop_draw: f64 = self.rng.random();
        if drop_draw < self.config.drop_probability {
            self.counters.dropped[kind] += 1;
            return SendOutcome::Dropped;
        }
        let arrives_at = self.now + self.config.latency.sample(&mut self.rng);
        self.push(arrives_at, 0, Event::Deliver {
            to,
            message,
            sent_at: self.now,
        });
        SendOutcome::Scheduled { arrives_at }
    }

    /// Schedules the collection-window close. Closes at time `t` fire after
    /// every delivery at `t`.
    pub fn schedule_window_close(&mut self, session: String, at: u64) {
        self.push(at, 1, Event::WindowClose { session });
    }

    fn push(&mut self, time: u64, class: u8, event: Event) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(Queued {
            time,
            class,
            seq,
            event,
        }));
    }

    /// Pops the next event and advances the clock to it. Deliveries update
    /// the counters here, when they actually arrive.
    pub fn pop(&mut self) -> Option<(u64, Event)> {
        let Reverse(entry) = self.queue.pop()?;
        debug_assert!(entry.time >= self.now, "time went backwards");
        self.now = entry.time;
        if let Event::Deliver { message, .. } = &entry.event {
            self.counters.delivered[MessageCounters::slot(message.kind())] += 1;
        }
        Some((entry.time, entry.event))
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}
