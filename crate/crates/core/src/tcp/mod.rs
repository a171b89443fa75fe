//! Packet-level TCP endpoints.
//!
//! Sequence numbers count whole segments. Senders always have data to send.
//! Every ACK triggered by an out-of-order segment carries one SACK block, the
//! contiguous run holding that segment. Since ACKs are never lost, the sender
//! learns every held segment and keeps an exact scoreboard; a hole counts as
//! lost once three held segments lie above it.

mod flavor;
mod ranges;
mod receiver;
mod sender;

pub use flavor::{cubic_k, cubic_window, FlavorKind, TcpFlavor};
pub use ranges::RangeSet;
pub use receiver::{RxAction, TcpReceiver, DEFAULT_DELACK_TIMEOUT};
pub use sender::{AckResponse, Decrease, Phase, SenderConfig, TcpSender};

use crate::time::SimTime;
use thiserror::Error;

pub const DEFAULT_MSS: u64 = 1500;
pub const DEFAULT_INITIAL_WINDOW: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcpError {
    #[error("flow {flow}: ACK {ack} acknowledges data never sent (highest sent {high})")]
    AckBeyondSent { flow: u32, ack: u64, high: u64 },
    #[error("flow {flow}: ACK belongs to flow {other}")]
    WrongFlow { flow: u32, other: u32 },
    #[error("beta must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("cubic scale must be positive, got {0}")]
    InvalidCubicScale(f64),
    #[error("flow {flow}: accounting audit failed: {detail}")]
    Audit { flow: u32, detail: String },
}

/// A data segment on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub flow_id: u32,
    pub seq: u64,
    pub size: u64,
    pub sent_at: SimTime,
    pub retransmission: bool,
}

/// Acknowledgment as seen by the sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckInfo {
    pub flow_id: u32,
    /// Next segment the receiver expects.
    pub cumulative_ack_seq: u64,
    /// Bytes newly covered by the cumulative ACK, from the receiver's view.
    pub newly_acked_bytes: u64,
    pub is_duplicate: bool,
    /// Segments held by the receiver above the cumulative ACK.
    pub sacked_segments: u64,
    /// Held run `[start, end)` containing the segment that triggered this ACK.
    pub sack_block: Option<(u64, u64)>,
    /// Send time of the segment that triggered this ACK.
    pub echo: SimTime,
}
