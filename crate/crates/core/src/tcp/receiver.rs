use super::{AckInfo, RangeSet, Segment};
use crate::time::SimTime;

pub const DEFAULT_DELACK_TIMEOUT: SimTime = SimTime::from_millis(40);

/// What the receiver wants done after a segment arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RxAction {
    pub ack: Option<AckInfo>,
    /// Delayed-ACK timer to arm.
    pub timer: Option<SimTime>,
}

/// Receiver with delayed ACKs: every second in-order segment is acknowledged
/// at once, a lone segment after `delack_timeout`. Out-of-order and
/// gap-filling segments are acknowledged immediately.
#[derive(Debug, Clone)]
pub struct TcpReceiver {
    pub flow_id: u32,
    mss: u64,
    next_expected: u64,
    last_acked: u64,
    out_of_order: RangeSet,
    delack_pending: u32,
    pending_echo: SimTime,
    delack_deadline: Option<SimTime>,
    delack_timeout: SimTime,
}

impl TcpReceiver {
    pub fn new(flow_id: u32, mss: u64, delack_timeout: SimTime) -> Self {
        TcpReceiver {
            flow_id,
            mss,
            next_expected: 0,
            last_acked: 0,
            out_of_order: RangeSet::new(),
            delack_pending: 0,
            pending_echo: SimTime::ZERO,
            delack_deadline: None,
            delack_timeout,
        }
    }

    pub fn next_expected_seq(&self) -> u64 {
        self.next_expected
    }

    pub fn delack_pending(&self) -> u32 {
        self.delack_pending
    }

    pub fn delack_deadline(&self) -> Option<SimTime> {
        self.delack_deadline
    }

    pub fn held_out_of_order(&self) -> u64 {
        self.out_of_order.len()
    }

    fn make_ack(&mut self, echo: SimTime, trigger: Option<u64>) -> AckInfo {
        let newly = self.next_expected - self.last_acked;
        self.last_acked = self.next_expected;
        self.delack_pending = 0;
        self.delack_deadline = None;
        AckInfo {
            flow_id: self.flow_id,
            cumulative_ack_seq: self.next_expected,
            newly_acked_bytes: newly * self.mss,
            is_duplicate: newly == 0,
            sacked_segments: self.out_of_order.len(),
            sack_block: trigger.and_then(|seq| self.out_of_order.range_of(seq)),
            echo,
        }
    }

    pub fn on_data(&mut self, segment: &Segment, now: SimTime) -> RxAction {
        let seq = segment.seq;
        if seq == self.next_expected {
            let had_gap = !self.out_of_order.is_empty();
            self.next_expected += 1;
            if let Some((start, end)) = self.out_of_order.first() {
                if start == self.next_expected {
                    self.next_expected = end;
                    self.out_of_order.remove_below(end);
                }
            }
            if had_gap {
                return RxAction {
                    ack: Some(self.make_ack(segment.sent_at, None)),
                    timer: None,
                };
            }
            if self.delack_pending > 0 {
                let echo = self.pending_echo;
                return RxAction {
                    ack: Some(self.make_ack(echo, None)),
                    timer: None,
                };
            }
            self.delack_pending = 1;
            self.pending_echo = segment.sent_at;
            let deadline = now + self.delack_timeout;
            self.delack_deadline = Some(deadline);
            return RxAction {
                ack: None,
                timer: Some(deadline),
            };
        }
        let trigger = (seq > self.next_expected).then(|| {
            self.out_of_order.insert(seq);
            seq
        });
        // Out of order or already received: acknowledge at once.
        RxAction {
            ack: Some(self.make_ack(segment.sent_at, trigger)),
            timer: None,
        }
    }

    /// Delayed-ACK timer expiry. Stale timers produce nothing.
    pub fn on_delack_timer(&mut self, now: SimTime) -> Option<AckInfo> {
        match self.delack_deadline {
            Some(deadline) if deadline <= now && self.delack_pending > 0 => {
                let echo = self.pending_echo;
                Some(self.make_ack(echo, None))
            }
            _ => None,
        }
    }
}
