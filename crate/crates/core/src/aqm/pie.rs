//! Simplified PIE baseline.
//!
//! A drop probability is recomputed every `update_period` from the current
//! queuing delay and its trend, and arrivals are dropped at random with that
//! probability. The delay estimate is the head-of-line packet age.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    estimate_queue_delay, AqmError, AqmProbe, DropReason, QueueDiscipline, QueueSnapshot, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieParams {
    /// Target queuing delay, seconds.
    pub target: f64,
    /// Probability update period, seconds.
    pub update_period: f64,
    /// Gain on the delay error, 1/s.
    pub alpha: f64,
    /// Gain on the delay trend, 1/s.
    pub beta: f64,
    /// Burst tolerance after an idle period, seconds.
    pub max_burst: f64,
    pub mtu: u64,
}

impl Default for PieParams {
    fn default() -> Self {
        PieParams {
            target: 0.015,
            update_period: 0.015,
            alpha: 0.125,
            beta: 1.25,
            max_burst: 0.150,
            mtu: 1500,
        }
    }
}

impl PieParams {
    pub fn validate(&self) -> Result<(), AqmError> {
        if !(self.target > 0.0) || !(self.update_period > 0.0) {
            return Err(AqmError::InvalidParameter {
                name: "pie",
                reason: "target and update period must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Pie {
    params: PieParams,
    drop_prob: f64,
    qdelay_old: f64,
    burst_allowance: f64,
    next_update: f64,
    rng: ChaCha8Rng,
}

impl Pie {
    pub fn new(params: PieParams, seed: u64) -> Result<Self, AqmError> {
        params.validate()?;
        Ok(Pie {
            params,
            drop_prob: 0.0,
            qdelay_old: 0.0,
            burst_allowance: params.max_burst,
            next_update: params.update_period,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn drop_probability(&self) -> f64 {
        self.drop_prob
    }

    /// One periodic update with the given delay estimate.
    pub fn update(&mut self, qdelay: f64) {
        let p = &self.params;
        let mut delta = p.alpha * (qdelay - p.target) + p.beta * (qdelay - self.qdelay_old);
        // Scale the step down while the probability is small so that light
        // congestion is not over-controlled.
        let scale = match self.drop_prob {
            x if x < 1e-6 => 1.0 / 2048.0,
            x if x < 1e-5 => 1.0 / 512.0,
            x if x < 1e-4 => 1.0 / 128.0,
            x if x < 1e-3 => 1.0 / 32.0,
            x if x < 1e-2 => 1.0 / 8.0,
            x if x < 1e-1 => 1.0 / 2.0,
            _ => 1.0,
        };
        delta *= scale;
        self.drop_prob += delta;
        if qdelay == 0.0 && self.qdelay_old == 0.0 {
            self.drop_prob *= 0.98;
        }
        self.drop_prob = self.drop_prob.clamp(0.0, 1.0);
        self.burst_allowance = (self.burst_allowance - p.update_period).max(0.0);
        if self.drop_prob == 0.0 && qdelay < p.target / 2.0 && self.qdelay_old < p.target / 2.0 {
            self.burst_allowance = p.max_burst;
        }
        self.qdelay_old = qdelay;
    }

    fn catch_up(&mut self, snapshot: &QueueSnapshot, now: f64) {
        if now < self.next_update {
            return;
        }
        let qdelay = estimate_queue_delay(snapshot, now);
        while now >= self.next_update {
            self.update(qdelay);
            self.next_update += self.params.update_period;
        }
    }
}

impl QueueDiscipline for Pie {
    fn name(&self) -> &'static str {
        "pie"
    }

    fn on_enqueue(&mut self, snapshot: &QueueSnapshot, packet_size: u64, now: f64) -> Verdict {
        self.catch_up(snapshot, now);
        if snapshot.would_overflow(packet_size) {
            return Verdict::DropOverflow;
        }
        let p = &self.params;
        if self.burst_allowance > 0.0
            || (self.qdelay_old < p.target / 2.0 && self.drop_prob < 0.2)
            || snapshot.backlog_bytes < 2 * p.mtu
        {
            return Verdict::Accept;
        }
        if self.rng.gen::<f64>() < self.drop_prob {
            Verdict::DropThreshold
        } else {
            Verdict::Accept
        }
    }

    fn early_drop_reason(&self) -> DropReason {
        DropReason::PieMark
    }

    fn probe(&self) -> AqmProbe {
        AqmProbe {
            drop_probability: Some(self.drop_prob),
            ..AqmProbe::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_leaves_probability_unchanged() {
        let mut pie = Pie::new(PieParams::default(), 1).unwrap();
        pie.drop_prob = 0.05;
        pie.qdelay_old = 0.015;
        pie.update(0.015);
        assert_eq!(pie.drop_probability(), 0.05);
    }

    #[test]
    fn excess_delay_raises_probability() {
        let mut pie = Pie::new(PieParams::default(), 1).unwrap();
        pie.drop_prob = 0.05;
        pie.qdelay_old = 0.030;
        pie.update(0.030);
        // 0.125 * 0.015 scaled by 1/2
        assert!((pie.drop_probability() - (0.05 + 0.125 * 0.015 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn idle_queue_decays_probability() {
        let mut pie = Pie::new(PieParams::default(), 1).unwrap();
        pie.drop_prob = 0.5;
        pie.update(0.0);
        pie.update(0.0);
        assert!(pie.drop_probability() < 0.5);
    }

    #[test]
    fn probability_stays_in_unit_interval() {
        let mut pie = Pie::new(PieParams::default(), 1).unwrap();
        for _ in 0..10_000 {
            pie.update(10.0);
        }
        assert_eq!(pie.drop_probability(), 1.0);
        for _ in 0..10_000 {
            pie.update(0.0);
        }
        assert!(pie.drop_probability() >= 0.0);
    }

    #[test]
    fn same_seed_same_decisions() {
        let snap = QueueSnapshot {
            backlog_bytes: 300_000,
            backlog_packets: 200,
            head_arrival_time: Some(0.0),
            buffer_limit: 1_000_000,
        };
        let run = || {
            let mut pie = Pie::new(PieParams::default(), 42).unwrap();
            (1..2000)
                .map(|i| pie.on_enqueue(&snap, 1500, i as f64 * 0.001))
                .collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.contains(&Verdict::DropThreshold));
    }
}
