//! Global synchronization protection.
//!
//! GSP is a tail-drop queue with a drop threshold below the buffer limit.
//! The first arrival that finds the queue above the threshold is dropped
//! and opens a no-drop interval; threshold violations inside the interval
//! are ignored, so a congestion episode costs one flow one packet instead of
//! costing every flow a packet at once.
//!
//! The adaptive variant integrates the time the queue spends above the
//! threshold (weighted by `alpha`) minus the time spent below it into
//! `cumul_time`, and shortens the interval to
//! `preset_interval / (1 + cumul_time / tau)`. After a buffer overflow the
//! below-threshold time stops counting until the queue has drained to empty
//! and then risen above the threshold again.
//!
//! Everything happens at arrival. Nothing already stored in the queue is
//! ever dropped.

use super::{
    estimate_queue_delay, AqmError, AqmProbe, DropReason, QueueDiscipline, QueueSnapshot,
    ThresholdSpec, Verdict,
};

/// Default upper bound for the adaptive interval, in seconds.
pub const DEFAULT_PRESET_INTERVAL: f64 = 0.2;
/// Default ratio `tau / preset_interval`.
pub const DEFAULT_TAU_PER_PRESET: f64 = 5.0;
pub const DEFAULT_ALPHA: f64 = 2.0;
/// Default ratio `max_time / tau`, giving an interval floor of
/// `preset_interval / 201`.
pub const DEFAULT_MAX_TIME_PER_TAU: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GspConfig {
    pub threshold: ThresholdSpec,
    /// Initial and maximum no-drop interval, seconds.
    pub preset_interval: f64,
    /// Time constant of the interval adaptation, seconds.
    pub tau: f64,
    /// Weight of above-threshold time relative to below-threshold time.
    pub alpha: f64,
    /// Clamp for `cumul_time`, seconds.
    pub max_time: f64,
    pub buffer_limit: u64,
    pub adaptive: bool,
}

impl GspConfig {
    /// Configuration with the default adaptation parameters.
    pub fn new(threshold: ThresholdSpec, buffer_limit: u64, adaptive: bool) -> Self {
        let tau = DEFAULT_TAU_PER_PRESET * DEFAULT_PRESET_INTERVAL;
        GspConfig {
            threshold,
            preset_interval: DEFAULT_PRESET_INTERVAL,
            tau,
            alpha: DEFAULT_ALPHA,
            max_time: DEFAULT_MAX_TIME_PER_TAU * tau,
            buffer_limit,
            adaptive,
        }
    }

    pub fn validate(&self) -> Result<(), AqmError> {
        fn bad(name: &'static str, reason: impl Into<String>) -> AqmError {
            AqmError::InvalidParameter {
                name,
                reason: reason.into(),
            }
        }
        self.threshold.validate()?;
        if !(self.preset_interval > 0.0) || !self.preset_interval.is_finite() {
            return Err(bad("preset_interval", "must be positive"));
        }
        if !(self.tau >= self.preset_interval) || !self.tau.is_finite() {
            return Err(bad("tau", "must be at least preset_interval"));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(bad("alpha", "must be at least 1"));
        }
        if !(self.max_time > 0.0) || !self.max_time.is_finite() {
            return Err(bad("max_time", "must be positive"));
        }
        if let ThresholdSpec::ByteLength(t) = self.threshold {
            if self.buffer_limit <= t {
                return Err(bad("buffer_limit", "must exceed the byte threshold"));
            }
        }
        Ok(())
    }

    /// Interval for a given accumulated time.
    pub fn interval_for(&self, cumul_time: f64) -> f64 {
        self.preset_interval / (1.0 + cumul_time / self.tau)
    }

    /// Smallest interval the adaptation can reach.
    pub fn interval_floor(&self) -> f64 {
        self.interval_for(self.max_time)
    }
}

/// Overflow hysteresis of the adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hysteresis {
    Normal,
    /// A buffer overflow happened; below-threshold time is not counted.
    OverflowSeen,
    /// The queue has emptied since the overflow; still waiting for it to
    /// exceed the threshold.
    DrainedAwaitingAbove,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GspState {
    /// End of the current no-drop interval, absolute seconds.
    pub expiry: f64,
    pub interval: f64,
    pub cumul_time: f64,
    pub last_update: f64,
    pub was_above_at_last_update: bool,
    pub hysteresis: Hysteresis,
}

impl GspState {
    pub fn new(config: &GspConfig) -> Self {
        GspState {
            expiry: 0.0,
            interval: config.preset_interval,
            cumul_time: 0.0,
            last_update: 0.0,
            was_above_at_last_update: false,
            hysteresis: Hysteresis::Normal,
        }
    }
}

/// `queue > threshold`, in bytes or in head-of-line delay.
pub fn gsp_threshold_exceeded(snapshot: &QueueSnapshot, threshold: &ThresholdSpec, now: f64) -> bool {
    if snapshot.is_empty() {
        return false;
    }
    match *threshold {
        ThresholdSpec::ByteLength(bytes) => snapshot.backlog_bytes > bytes,
        ThresholdSpec::Delay(secs) => estimate_queue_delay(snapshot, now) > secs,
    }
}

/// Interval adaptation step, run at every arrival before [`gsp_decide`].
///
/// The time since the previous arrival counts as above or below threshold
/// according to what that arrival observed.
pub fn gsp_update_clock(
    state: &GspState,
    config: &GspConfig,
    snapshot: &QueueSnapshot,
    now: f64,
) -> GspState {
    let mut next = *state;
    let above = gsp_threshold_exceeded(snapshot, &config.threshold, now);

    if config.adaptive {
        let elapsed = (now - state.last_update).max(0.0);
        if state.was_above_at_last_update {
            next.cumul_time += config.alpha * elapsed;
        } else if state.hysteresis == Hysteresis::Normal {
            next.cumul_time -= elapsed;
        }
        next.cumul_time = next.cumul_time.clamp(0.0, config.max_time);
        next.interval = config.interval_for(next.cumul_time);
    } else {
        next.cumul_time = 0.0;
        next.interval = config.preset_interval;
    }

    next.last_update = now.max(state.last_update);
    next.was_above_at_last_update = above;
    next.hysteresis = match state.hysteresis {
        Hysteresis::OverflowSeen if snapshot.is_empty() => Hysteresis::DrainedAwaitingAbove,
        Hysteresis::DrainedAwaitingAbove if above => Hysteresis::Normal,
        h => h,
    };
    next
}

/// Arrival decision: overflow backstop first, then the threshold rule.
pub fn gsp_decide(
    state: &GspState,
    config: &GspConfig,
    snapshot: &QueueSnapshot,
    packet_size: u64,
    now: f64,
) -> (Verdict, GspState) {
    let mut next = *state;
    if snapshot.would_overflow(packet_size) {
        next.hysteresis = Hysteresis::OverflowSeen;
        return (Verdict::DropOverflow, next);
    }
    if gsp_threshold_exceeded(snapshot, &config.threshold, now) && now > state.expiry {
        next.expiry = now + state.interval;
        return (Verdict::DropThreshold, next);
    }
    (Verdict::Accept, next)
}

/// GSP as a pluggable queue discipline.
#[derive(Debug, Clone)]
pub struct Gsp {
    config: GspConfig,
    state: GspState,
}

impl Gsp {
    pub fn new(config: GspConfig) -> Result<Self, AqmError> {
        config.validate()?;
        Ok(Gsp {
            state: GspState::new(&config),
            config,
        })
    }

    pub fn config(&self) -> &GspConfig {
        &self.config
    }

    pub fn state(&self) -> &GspState {
        &self.state
    }
}

impl QueueDiscipline for Gsp {
    fn name(&self) -> &'static str {
        if self.config.adaptive {
            "gsp_adaptive"
        } else {
            "gsp_basic"
        }
    }

    fn on_enqueue(&mut self, snapshot: &QueueSnapshot, packet_size: u64, now: f64) -> Verdict {
        let clocked = gsp_update_clock(&self.state, &self.config, snapshot, now);
        let (verdict, next) = gsp_decide(&clocked, &self.config, snapshot, packet_size, now);
        self.state = next;
        verdict
    }

    fn early_drop_reason(&self) -> DropReason {
        DropReason::Threshold
    }

    fn probe(&self) -> AqmProbe {
        AqmProbe {
            interval: Some(self.state.interval),
            cumul_time: Some(self.state.cumul_time),
            drop_probability: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MSS: u64 = 1500;

    fn config(adaptive: bool) -> GspConfig {
        GspConfig::new(ThresholdSpec::ByteLength(15_000), 1_000_000, adaptive)
    }

    fn queue(packets: u64, head: Option<f64>) -> QueueSnapshot {
        QueueSnapshot {
            backlog_bytes: packets * MSS,
            backlog_packets: packets as usize,
            head_arrival_time: if packets > 0 { head.or(Some(0.0)) } else { None },
            buffer_limit: 1_000_000,
        }
    }

    #[test]
    fn defaults_follow_rules_of_thumb() {
        let c = config(true);
        assert_eq!(c.preset_interval, 0.2);
        assert_eq!(c.tau, 1.0);
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.max_time, 200.0);
        assert!((c.interval_floor() - 0.2 / 201.0).abs() < 1e-15);
        c.validate().unwrap();
    }

    #[test]
    fn validation_rejects_inconsistent_configs() {
        let mut c = config(true);
        c.tau = 0.1;
        assert!(c.validate().is_err());
        let mut c = config(true);
        c.alpha = 0.5;
        assert!(c.validate().is_err());
        let mut c = config(true);
        c.buffer_limit = 15_000;
        assert!(c.validate().is_err());
        let mut c = config(true);
        c.max_time = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn threshold_test_in_bytes_and_delay() {
        let spec = ThresholdSpec::ByteLength(15_000);
        assert!(gsp_threshold_exceeded(&queue(11, None), &spec, 0.0));
        assert!(!gsp_threshold_exceeded(&queue(10, None), &spec, 0.0));
        assert!(!gsp_threshold_exceeded(&queue(0, None), &spec, 0.0));
        let delay = ThresholdSpec::Delay(0.010);
        assert!(gsp_threshold_exceeded(&queue(2, Some(1.0)), &delay, 1.012));
        assert!(!gsp_threshold_exceeded(&queue(2, Some(1.0)), &delay, 1.010));
        assert!(!gsp_threshold_exceeded(&queue(0, None), &delay, 9.0));
    }

    #[test]
    fn above_time_is_weighted_by_alpha() {
        let c = config(true);
        let mut s = GspState::new(&c);
        s.was_above_at_last_update = true;
        s.last_update = 1.0;
        let next = gsp_update_clock(&s, &c, &queue(20, None), 1.010);
        assert!((next.cumul_time - 0.020).abs() < 1e-12);
    }

    #[test]
    fn interval_halves_at_cumul_time_tau() {
        let c = config(true);
        let mut s = GspState::new(&c);
        s.cumul_time = c.tau;
        s.last_update = 3.0;
        // zero elapsed time leaves cumul_time alone
        let next = gsp_update_clock(&s, &c, &queue(0, None), 3.0);
        assert_eq!(next.cumul_time, c.tau);
        assert!((next.interval - c.preset_interval / 2.0).abs() < 1e-15);
    }

    #[test]
    fn below_time_clamps_at_zero() {
        let c = config(true);
        let s = GspState::new(&c);
        let next = gsp_update_clock(&s, &c, &queue(0, None), 5.0);
        assert_eq!(next.cumul_time, 0.0);
        assert_eq!(next.interval, c.preset_interval);
    }

    #[test]
    fn above_time_clamps_at_max_time() {
        let c = config(true);
        let mut s = GspState::new(&c);
        s.was_above_at_last_update = true;
        let next = gsp_update_clock(&s, &c, &queue(20, None), 1000.0);
        assert_eq!(next.cumul_time, c.max_time);
        assert!((next.interval - c.interval_floor()).abs() < 1e-15);
    }

    #[test]
    fn hysteresis_suspends_below_time() {
        let c = config(true);
        let mut s = GspState::new(&c);
        s.cumul_time = 3.0;
        s.hysteresis = Hysteresis::OverflowSeen;
        let next = gsp_update_clock(&s, &c, &queue(5, None), 1.0);
        assert_eq!(next.cumul_time, 3.0);
        assert_eq!(next.hysteresis, Hysteresis::OverflowSeen);
    }

    #[test]
    fn hysteresis_cycle_overflow_empty_above() {
        let c = config(true);
        let mut s = GspState::new(&c);
        s.cumul_time = 3.0;

        let full = QueueSnapshot {
            backlog_bytes: 999_000,
            backlog_packets: 666,
            head_arrival_time: Some(0.0),
            buffer_limit: 1_000_000,
        };
        let (v, s1) = gsp_decide(&s, &c, &full, MSS, 0.5);
        assert_eq!(v, Verdict::DropOverflow);
        assert_eq!(s1.hysteresis, Hysteresis::OverflowSeen);

        // below threshold but not empty: still suspended
        let s2 = gsp_update_clock(&s1, &c, &queue(3, None), 1.0);
        assert_eq!(s2.hysteresis, Hysteresis::OverflowSeen);
        let s3 = gsp_update_clock(&s2, &c, &queue(0, None), 2.0);
        assert_eq!(s3.hysteresis, Hysteresis::DrainedAwaitingAbove);
        assert_eq!(s3.cumul_time, s.cumul_time);
        let s4 = gsp_update_clock(&s3, &c, &queue(2, None), 3.0);
        assert_eq!(s4.hysteresis, Hysteresis::DrainedAwaitingAbove);
        assert_eq!(s4.cumul_time, s.cumul_time);
        let s5 = gsp_update_clock(&s4, &c, &queue(20, None), 4.0);
        assert_eq!(s5.hysteresis, Hysteresis::Normal);
        // below time resumes counting from here
        let s6 = gsp_update_clock(&s5, &c, &queue(2, None), 4.5);
        assert!((s6.cumul_time - (3.0 + 2.0 * 0.5)).abs() < 1e-12);
        let s7 = gsp_update_clock(&s6, &c, &queue(2, None), 5.0);
        assert!((s7.cumul_time - 3.5).abs() < 1e-12);
    }

    #[test]
    fn non_adaptive_keeps_preset_interval() {
        let c = config(false);
        let mut s = GspState::new(&c);
        s.was_above_at_last_update = true;
        let next = gsp_update_clock(&s, &c, &queue(20, None), 10.0);
        assert_eq!(next.cumul_time, 0.0);
        assert_eq!(next.interval, c.preset_interval);
    }

    #[test]
    fn drop_opens_no_drop_interval() {
        let c = config(false);
        let mut s = GspState::new(&c);
        s.expiry = 3.0;
        let (v, next) = gsp_decide(&s, &c, &queue(20, None), MSS, 5.0);
        assert_eq!(v, Verdict::DropThreshold);
        assert!((next.expiry - 5.2).abs() < 1e-12);
    }

    #[test]
    fn no_drop_inside_interval() {
        let c = config(false);
        let mut s = GspState::new(&c);
        s.expiry = 6.0;
        let (v, next) = gsp_decide(&s, &c, &queue(20, None), MSS, 5.0);
        assert_eq!(v, Verdict::Accept);
        assert_eq!(next, s);
        // strict comparison at the boundary
        let (v, _) = gsp_decide(&s, &c, &queue(20, None), MSS, 6.0);
        assert_eq!(v, Verdict::Accept);
    }

    #[test]
    fn below_threshold_always_accepts() {
        let c = config(false);
        let s = GspState::new(&c);
        let (v, next) = gsp_decide(&s, &c, &queue(10, None), MSS, 100.0);
        assert_eq!(v, Verdict::Accept);
        assert_eq!(next, s);
    }

    #[test]
    fn overflow_ignores_expiry() {
        let c = config(false);
        let mut s = GspState::new(&c);
        s.expiry = 1e9;
        let snap = QueueSnapshot {
            backlog_bytes: 999_000,
            backlog_packets: 666,
            head_arrival_time: Some(0.0),
            buffer_limit: 1_000_000,
        };
        let (v, next) = gsp_decide(&s, &c, &snap, MSS, 1.0);
        assert_eq!(v, Verdict::DropOverflow);
        assert_eq!(next.expiry, 1e9);
    }

    #[test]
    fn discipline_names_follow_mode() {
        assert_eq!(Gsp::new(config(false)).unwrap().name(), "gsp_basic");
        assert_eq!(Gsp::new(config(true)).unwrap().name(), "gsp_adaptive");
    }
}
