//! Queue management decisions.
//!
//! Every scheme implements [`QueueDiscipline`] and is registered by name in
//! an [`AqmRegistry`]; the simulator only ever talks to the trait object.
//! All decision logic runs at packet arrival, with CoDel the one scheme that
//! also acts on the dequeue path.

mod codel;
mod gsp;
mod pie;
mod registry;
mod sizing;
mod taildrop;

pub use codel::{Codel, CodelParams};
pub use gsp::{
    gsp_decide, gsp_threshold_exceeded, gsp_update_clock, Gsp, GspConfig, GspState, Hysteresis,
    DEFAULT_ALPHA, DEFAULT_MAX_TIME_PER_TAU, DEFAULT_PRESET_INTERVAL, DEFAULT_TAU_PER_PRESET,
};
pub use pie::{Pie, PieParams};
pub use registry::{AqmFactory, AqmParams, AqmRegistry};
pub use sizing::{delay_budget, min_buffer, BufferSizing};
pub use taildrop::{taildrop_decide, TailDrop};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AqmError {
    #[error("beta must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("round-trip time must be positive, got {0}")]
    InvalidRtt(f64),
    #[error("capacity must be positive, got {0}")]
    InvalidCapacity(f64),
    #[error("threshold must be positive")]
    InvalidThreshold,
    #[error("{0} requires a drop threshold")]
    MissingThreshold(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("unknown queue discipline '{0}'")]
    UnknownDiscipline(String),
}

/// Drop threshold, expressed either as a backlog size or as a queuing delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    /// Backlog in bytes.
    ByteLength(u64),
    /// Queuing delay in seconds.
    Delay(f64),
}

impl ThresholdSpec {
    pub fn bytes(value: u64) -> Result<Self, AqmError> {
        if value == 0 {
            return Err(AqmError::InvalidThreshold);
        }
        Ok(ThresholdSpec::ByteLength(value))
    }

    pub fn delay(secs: f64) -> Result<Self, AqmError> {
        if !(secs > 0.0) || !secs.is_finite() {
            return Err(AqmError::InvalidThreshold);
        }
        Ok(ThresholdSpec::Delay(secs))
    }

    pub fn validate(&self) -> Result<(), AqmError> {
        match *self {
            ThresholdSpec::ByteLength(b) => Self::bytes(b).map(drop),
            ThresholdSpec::Delay(d) => Self::delay(d).map(drop),
        }
    }
}

/// Read-only view of the bottleneck queue at the moment of a decision.
///
/// The backlog counts packets waiting for transmission; a packet already on
/// the wire is not part of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueSnapshot {
    pub backlog_bytes: u64,
    pub backlog_packets: usize,
    /// Enqueue time of the head-of-line packet, in seconds.
    pub head_arrival_time: Option<f64>,
    pub buffer_limit: u64,
}

impl QueueSnapshot {
    pub fn empty(buffer_limit: u64) -> Self {
        QueueSnapshot {
            backlog_bytes: 0,
            backlog_packets: 0,
            head_arrival_time: None,
            buffer_limit,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.backlog_packets == 0
    }

    pub fn would_overflow(&self, packet_size: u64) -> bool {
        self.backlog_bytes + packet_size > self.buffer_limit
    }
}

/// Outcome of an arrival-time decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    /// Early drop by the AQM's own congestion rule.
    DropThreshold,
    /// The packet does not fit in the buffer.
    DropOverflow,
}

/// Outcome of a dequeue-time decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DequeueVerdict {
    Forward,
    Drop,
}

/// Classification of a dropped packet, as reported in `drops.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    Threshold,
    Overflow,
    CodelMark,
    PieMark,
}

impl DropReason {
    pub const ALL: [DropReason; 4] = [
        DropReason::Threshold,
        DropReason::Overflow,
        DropReason::CodelMark,
        DropReason::PieMark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Threshold => "threshold",
            DropReason::Overflow => "overflow",
            DropReason::CodelMark => "codel",
            DropReason::PieMark => "pie",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        DropReason::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Internal control state exposed for tracing (adaptive interval, PIE
/// probability, ...). Fields a scheme does not have stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AqmProbe {
    pub interval: Option<f64>,
    pub cumul_time: Option<f64>,
    pub drop_probability: Option<f64>,
}

/// A queue management scheme attached to the bottleneck queue.
pub trait QueueDiscipline: Send {
    /// Registry name of the scheme.
    fn name(&self) -> &'static str;

    /// Decides the fate of a packet arriving at `now` (seconds).
    fn on_enqueue(&mut self, snapshot: &QueueSnapshot, packet_size: u64, now: f64) -> Verdict;

    /// Called when the head packet is about to be transmitted. `sojourn` is
    /// how long it waited; `snapshot` describes the queue after its removal.
    fn on_dequeue(&mut self, _sojourn: f64, _snapshot: &QueueSnapshot, _now: f64) -> DequeueVerdict {
        DequeueVerdict::Forward
    }

    /// Whether [`QueueDiscipline::on_dequeue`] can ever drop.
    fn acts_on_dequeue(&self) -> bool {
        false
    }

    /// Reason recorded for [`Verdict::DropThreshold`] and dequeue drops.
    fn early_drop_reason(&self) -> DropReason;

    fn probe(&self) -> AqmProbe {
        AqmProbe::default()
    }
}

/// Simulation clocks tick in nanoseconds; differences of `f64` seconds are
/// rounded back onto that grid before being compared.
pub fn round_to_clock(secs: f64) -> f64 {
    (secs * 1e9).round() / 1e9
}

/// Age of the head-of-line packet, or zero for an empty queue.
pub fn estimate_queue_delay(snapshot: &QueueSnapshot, now: f64) -> f64 {
    match snapshot.head_arrival_time {
        Some(head) if snapshot.backlog_packets > 0 => round_to_clock(now - head).max(0.0),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(backlog: u64, head: Option<f64>) -> QueueSnapshot {
        QueueSnapshot {
            backlog_bytes: backlog,
            backlog_packets: (backlog / 1500) as usize,
            head_arrival_time: head,
            buffer_limit: 1_000_000,
        }
    }

    #[test]
    fn queue_delay_of_empty_queue_is_zero() {
        assert_eq!(estimate_queue_delay(&QueueSnapshot::empty(10), 5.0), 0.0);
    }

    #[test]
    fn queue_delay_is_head_age() {
        let d = estimate_queue_delay(&snap(3000, Some(10.000)), 10.012);
        assert!((d - 0.012).abs() < 1e-12);
        assert_eq!(estimate_queue_delay(&snap(3000, Some(7.5)), 7.5), 0.0);
    }

    #[test]
    fn threshold_constructors_reject_non_positive() {
        assert_eq!(ThresholdSpec::bytes(0), Err(AqmError::InvalidThreshold));
        assert_eq!(ThresholdSpec::delay(0.0), Err(AqmError::InvalidThreshold));
        assert_eq!(ThresholdSpec::delay(f64::NAN), Err(AqmError::InvalidThreshold));
        assert!(ThresholdSpec::delay(0.01).is_ok());
    }

    #[test]
    fn drop_reason_names_round_trip() {
        for r in DropReason::ALL {
            assert_eq!(DropReason::parse(r.as_str()), Some(r));
        }
    }
}
