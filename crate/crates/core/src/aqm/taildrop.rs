use super::{DropReason, QueueDiscipline, QueueSnapshot, Verdict};

/// Drops an arrival only if it does not fit in the buffer.
pub fn taildrop_decide(snapshot: &QueueSnapshot, packet_size: u64) -> Verdict {
    if snapshot.would_overflow(packet_size) {
        Verdict::DropOverflow
    } else {
        Verdict::Accept
    }
}

#[derive(Debug, Default, Clone)]
pub struct TailDrop;

impl QueueDiscipline for TailDrop {
    fn name(&self) -> &'static str {
        "taildrop"
    }

    fn on_enqueue(&mut self, snapshot: &QueueSnapshot, packet_size: u64, _now: f64) -> Verdict {
        taildrop_decide(snapshot, packet_size)
    }

    fn early_drop_reason(&self) -> DropReason {
        DropReason::Overflow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(backlog: u64) -> QueueSnapshot {
        QueueSnapshot {
            backlog_bytes: backlog,
            backlog_packets: backlog.div_ceil(1500) as usize,
            head_arrival_time: (backlog > 0).then_some(0.0),
            buffer_limit: 1_000_000,
        }
    }

    #[test]
    fn overflow_and_exact_fit() {
        assert_eq!(taildrop_decide(&snap(999_000), 1500), Verdict::DropOverflow);
        assert_eq!(taildrop_decide(&snap(0), 1500), Verdict::Accept);
        assert_eq!(taildrop_decide(&snap(998_500), 1500), Verdict::Accept);
    }
}
