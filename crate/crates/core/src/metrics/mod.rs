//! Per-run observables and the statistics computed from them.

mod stats;

pub use stats::{cdf, empty_fraction, quantile, quantile_sorted, utilization, SummaryStats, UtilPoint};

use crate::aqm::DropReason;
use crate::netsim::CapacitySchedule;
use crate::tcp::Decrease;

/// Queuing delay of one forwarded packet, stamped at the start of its
/// transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySample {
    pub time: f64,
    pub flow_id: u32,
    pub delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropRecord {
    pub time: f64,
    pub flow_id: u32,
    pub reason: DropReason,
}

/// Backlog observed at `time`. The trace holds periodic samples plus every
/// transition into and out of the empty state, so reading it as a step
/// function gives the exact empty time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QlenSample {
    pub time: f64,
    pub backlog_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub time: f64,
    pub interval: Option<f64>,
    pub cumul_time: Option<f64>,
    pub drop_probability: Option<f64>,
}

/// Everything a run recorded.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub duration: f64,
    pub util_window: f64,
    pub capacity: CapacitySchedule,
    pub delays: Vec<DelaySample>,
    pub drops: Vec<DropRecord>,
    /// Bytes put on the wire in each utilization window.
    pub window_bytes: Vec<f64>,
    pub qlen: Vec<QlenSample>,
    pub probes: Vec<ProbeSample>,
    pub decreases: Vec<Decrease>,
    pub timeouts: u64,
    pub packets_accepted: u64,
    pub bytes_accepted: u64,
    pub bytes_departed: u64,
}

impl RunRecord {
    pub fn utilization(&self) -> Vec<UtilPoint> {
        utilization(&self.window_bytes, &self.capacity, self.util_window, self.duration)
    }

    pub fn drop_times(&self, reason: DropReason) -> impl Iterator<Item = f64> + '_ {
        self.drops.iter().filter(move |d| d.reason == reason).map(|d| d.time)
    }
}
