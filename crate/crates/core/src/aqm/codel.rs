//! Simplified CoDel baseline.
//!
//! Follows the published dequeue state machine: a packet becomes droppable
//! once the sojourn time has stayed above `target` for a full `interval`;
//! while dropping, the next drop is scheduled `interval / sqrt(count)` after
//! the previous one. Drops happen on the dequeue path only.

use super::{round_to_clock, AqmError, AqmProbe, DequeueVerdict, DropReason, QueueDiscipline, QueueSnapshot, Verdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodelParams {
    /// Acceptable standing queue delay, seconds.
    pub target: f64,
    /// Sliding window over which the standing delay is judged, seconds.
    pub interval: f64,
    pub mtu: u64,
}

impl Default for CodelParams {
    fn default() -> Self {
        CodelParams {
            target: 0.005,
            interval: 0.100,
            mtu: 1500,
        }
    }
}

impl CodelParams {
    pub fn validate(&self) -> Result<(), AqmError> {
        if !(self.target > 0.0) || !(self.interval > 0.0) {
            return Err(AqmError::InvalidParameter {
                name: "codel",
                reason: "target and interval must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Codel {
    params: CodelParams,
    buffer_limit: u64,
    first_above_time: Option<f64>,
    drop_next: f64,
    count: u32,
    last_count: u32,
    dropping: bool,
}

impl Codel {
    pub fn new(params: CodelParams, buffer_limit: u64) -> Result<Self, AqmError> {
        params.validate()?;
        Ok(Codel {
            params,
            buffer_limit,
            first_above_time: None,
            drop_next: 0.0,
            count: 0,
            last_count: 0,
            dropping: false,
        })
    }

    pub fn is_dropping(&self) -> bool {
        self.dropping
    }

    fn control_law(&self, t: f64, count: u32) -> f64 {
        t + self.params.interval / (count.max(1) as f64).sqrt()
    }

    fn ok_to_drop(&mut self, sojourn: f64, remaining_bytes: u64, now: f64) -> bool {
        if round_to_clock(sojourn) < self.params.target || remaining_bytes <= self.params.mtu {
            self.first_above_time = None;
            return false;
        }
        match self.first_above_time {
            None => {
                self.first_above_time = Some(now + self.params.interval);
                false
            }
            Some(t) => round_to_clock(now - t) >= 0.0,
        }
    }
}

impl QueueDiscipline for Codel {
    fn name(&self) -> &'static str {
        "codel"
    }

    fn on_enqueue(&mut self, snapshot: &QueueSnapshot, packet_size: u64, _now: f64) -> Verdict {
        debug_assert_eq!(snapshot.buffer_limit, self.buffer_limit);
        if snapshot.would_overflow(packet_size) {
            Verdict::DropOverflow
        } else {
            Verdict::Accept
        }
    }

    fn on_dequeue(&mut self, sojourn: f64, snapshot: &QueueSnapshot, now: f64) -> DequeueVerdict {
        let ok = self.ok_to_drop(sojourn, snapshot.backlog_bytes, now);
        if self.dropping {
            if !ok {
                self.dropping = false;
                return DequeueVerdict::Forward;
            }
            if round_to_clock(now - self.drop_next) >= 0.0 {
                self.count += 1;
                self.drop_next = self.control_law(self.drop_next, self.count);
                return DequeueVerdict::Drop;
            }
            return DequeueVerdict::Forward;
        }
        if ok {
            self.dropping = true;
            let delta = self.count.saturating_sub(self.last_count);
            self.count = if delta > 1 && now - self.drop_next < 16.0 * self.params.interval {
                delta
            } else {
                1
            };
            self.drop_next = self.control_law(now, self.count);
            self.last_count = self.count;
            return DequeueVerdict::Drop;
        }
        DequeueVerdict::Forward
    }

    fn acts_on_dequeue(&self) -> bool {
        true
    }

    fn early_drop_reason(&self) -> DropReason {
        DropReason::CodelMark
    }

    fn probe(&self) -> AqmProbe {
        AqmProbe::default()
    }
}
