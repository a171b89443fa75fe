use super::{DelaySample, DropRecord, QlenSample};
use crate::aqm::DropReason;
use crate::netsim::CapacitySchedule;

/// Nearest-rank quantile of already sorted samples: the `ceil(q * n)`-th
/// smallest, with `q = 0` giving the minimum.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn quantile(samples: &[f64], q: f64) -> Option<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// Empirical step CDF as `(value, P[X <= value])`, one point per distinct
/// value.
pub fn cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let p = if i + 1 == n { 1.0 } else { (i + 1) as f64 / n as f64 };
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = p,
            _ => out.push((x, p)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilPoint {
    pub window_start: f64,
    pub utilization: f64,
}

/// Delivered bytes per window divided by what the link could have carried
/// in that window. The last window may be shorter than `window`.
pub fn utilization(window_bytes: &[f64], capacity: &CapacitySchedule, window: f64, duration: f64) -> Vec<UtilPoint> {
    window_bytes
        .iter()
        .enumerate()
        .filter_map(|(i, &bytes)| {
            let start = i as f64 * window;
            let end = (start + window).min(duration);
            let possible = capacity.bytes_between(start, end);
            (possible > 0.0).then(|| UtilPoint {
                window_start: start,
                utilization: bytes / possible,
            })
        })
        .collect()
}

/// Fraction of `[from, to]` during which the backlog was zero, reading the
/// trace as a step function. Before the first sample the queue is empty.
pub fn empty_fraction(trace: &[QlenSample], from: f64, to: f64) -> Option<f64> {
    if !(to > from) {
        return None;
    }
    let mut empty = 0.0;
    let mut t = from;
    let mut backlog = 0;
    for s in trace {
        if s.time > from {
            let seg_end = s.time.min(to);
            if backlog == 0 {
                empty += seg_end - t;
            }
            t = seg_end;
        }
        if s.time >= to {
            break;
        }
        backlog = s.backlog_bytes;
    }
    if t < to && backlog == 0 {
        empty += to - t;
    }
    Some(empty / (to - from))
}

/// One-line summary of a run, restricted to times at or after `warmup`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub samples: usize,
    pub delay_mean: Option<f64>,
    pub delay_median: Option<f64>,
    pub delay_p5: Option<f64>,
    pub delay_p95: Option<f64>,
    pub utilization_mean: Option<f64>,
    pub drops: [(DropReason, u64); 4],
    pub empty_fraction: Option<f64>,
}

impl SummaryStats {
    pub const HEADER: [&'static str; 12] = [
        "samples",
        "delay_mean_s",
        "delay_median_s",
        "delay_p5_s",
        "delay_p95_s",
        "util_mean",
        "drops_threshold",
        "drops_overflow",
        "drops_codel",
        "drops_pie",
        "empty_fraction",
        "drops_total",
    ];

    pub fn compute(
        delays: &[DelaySample],
        drops: &[DropRecord],
        util: &[UtilPoint],
        qlen: &[QlenSample],
        duration: f64,
        warmup: f64,
    ) -> Self {
        let mut d: Vec<f64> = delays.iter().filter(|s| s.time >= warmup).map(|s| s.delay).collect();
        d.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let u: Vec<f64> = util
            .iter()
            .filter(|p| p.window_start >= warmup)
            .map(|p| p.utilization)
            .collect();
        let mut counts = DropReason::ALL.map(|r| (r, 0u64));
        for rec in drops.iter().filter(|r| r.time >= warmup) {
            if let Some(slot) = counts.iter_mut().find(|(r, _)| *r == rec.reason) {
                slot.1 += 1;
            }
        }
        SummaryStats {
            samples: d.len(),
            delay_mean: mean(&d),
            delay_median: quantile_sorted(&d, 0.5),
            delay_p5: quantile_sorted(&d, 0.05),
            delay_p95: quantile_sorted(&d, 0.95),
            utilization_mean: mean(&u),
            drops: counts,
            empty_fraction: empty_fraction(qlen, warmup, duration),
        }
    }

    pub fn drop_count(&self, reason: DropReason) -> u64 {
        self.drops.iter().find(|(r, _)| *r == reason).map_or(0, |(_, c)| *c)
    }

    pub fn total_drops(&self) -> u64 {
        self.drops.iter().map(|(_, c)| c).sum()
    }

    /// Values in [`SummaryStats::HEADER`] order; absent statistics are empty.
    pub fn row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut row = vec![
            self.samples.to_string(),
            opt(self.delay_mean),
            opt(self.delay_median),
            opt(self.delay_p5),
            opt(self.delay_p95),
            opt(self.utilization_mean),
        ];
        row.extend(self.drops.iter().map(|(_, c)| c.to_string()));
        row.push(opt(self.empty_fraction));
        row.push(self.total_drops().to_string());
        row
    }
}
