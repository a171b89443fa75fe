//! Scenario definitions: the `key = value` file format, validation and the
//! canonical corpus.

mod corpus;
mod parse;
mod units;

pub use corpus::{builtin, builtin_names};
pub use parse::{parse_scenario, parse_scenario_with, RawScenario};
pub use units::{format_bytes, format_rate, format_secs, parse_bytes, parse_rate, parse_secs};

use std::fmt;

use crate::aqm::{AqmParams, CodelParams, PieParams, ThresholdSpec};
use crate::tcp::{FlavorKind, TcpError, TcpFlavor, DEFAULT_INITIAL_WINDOW, DEFAULT_MSS};

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityChange {
    /// Seconds from the start of the run.
    pub at: f64,
    /// Bytes per second.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Bytes per second.
    pub capacity: f64,
    pub capacity_changes: Vec<CapacityChange>,
    /// Extra one-way delay after the bottleneck, seconds.
    pub delay: f64,
    /// Buffer limit in bytes.
    pub buffer: u64,
}

/// `count` identical TCP flows.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGroup {
    pub count: u32,
    pub flavor: FlavorKind,
    pub rtt0: f64,
    /// Earliest start time, seconds.
    pub start: f64,
    /// Each flow starts uniformly at random within `[start, start + start_window)`.
    pub start_window: f64,
    pub initial_cwnd: u32,
    pub initial_ssthresh: Option<u32>,
    pub beta: Option<f64>,
    pub cubic_scale: Option<f64>,
}

impl FlowGroup {
    pub fn new(count: u32, flavor: FlavorKind, rtt0: f64) -> Self {
        FlowGroup {
            count,
            flavor,
            rtt0,
            start: 0.0,
            start_window: 1.0,
            initial_cwnd: DEFAULT_INITIAL_WINDOW,
            initial_ssthresh: None,
            beta: None,
            cubic_scale: None,
        }
    }

    pub fn tcp_flavor(&self) -> Result<TcpFlavor, TcpError> {
        let mut f = match self.flavor {
            FlavorKind::Reno => TcpFlavor::reno(),
            FlavorKind::Cubic => TcpFlavor::cubic(),
        };
        if let Some(beta) = self.beta {
            f = f.with_beta(beta)?;
        }
        if let Some(scale) = self.cubic_scale {
            f = f.with_cubic_scale(scale)?;
        }
        Ok(f)
    }
}

/// Constant-bit-rate UDP source.
#[derive(Debug, Clone, PartialEq)]
pub struct UdpConfig {
    /// Bytes per second.
    pub rate: f64,
    pub packet_size: u64,
    pub start: f64,
    pub stop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AqmConfig {
    /// Registry name.
    pub kind: String,
    pub threshold: Option<ThresholdSpec>,
    pub preset_interval: f64,
    /// Defaults to five preset intervals.
    pub tau: Option<f64>,
    pub alpha: f64,
    /// Defaults to 200 tau.
    pub max_time: Option<f64>,
    pub codel: CodelParams,
    pub pie: PieParams,
}

impl AqmConfig {
    pub fn new(kind: &str) -> Self {
        let defaults = AqmParams::new(0);
        AqmConfig {
            kind: kind.to_string(),
            threshold: None,
            preset_interval: defaults.preset_interval,
            tau: None,
            alpha: defaults.alpha,
            max_time: None,
            codel: CodelParams::default(),
            pie: PieParams::default(),
        }
    }

    pub fn params(&self, buffer_limit: u64, seed: u64) -> AqmParams {
        let base = AqmParams::new(buffer_limit);
        let tau = self
            .tau
            .unwrap_or(self.preset_interval * crate::aqm::DEFAULT_TAU_PER_PRESET);
        AqmParams {
            threshold: self.threshold,
            preset_interval: self.preset_interval,
            tau,
            alpha: self.alpha,
            max_time: self
                .max_time
                .unwrap_or(tau * crate::aqm::DEFAULT_MAX_TIME_PER_TAU),
            codel: self.codel,
            pie: self.pie,
            seed,
            ..base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpSettings {
    pub mss: u64,
    /// Delayed-ACK timeout, seconds.
    pub delack: f64,
}

impl Default for TcpSettings {
    fn default() -> Self {
        TcpSettings {
            mss: DEFAULT_MSS,
            delack: 0.040,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub util_window: f64,
    /// Samples before this time are left out of summaries.
    pub warmup: f64,
    /// Period of queue-length and AQM-state sampling.
    pub sample_interval: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            util_window: 0.100,
            warmup: 0.0,
            sample_interval: 0.010,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputKind {
    Delay,
    Drops,
    Util,
    Qlen,
    Summary,
    Aqm,
    Cdf,
}

impl OutputKind {
    pub const ALL: [OutputKind; 7] = [
        OutputKind::Delay,
        OutputKind::Drops,
        OutputKind::Util,
        OutputKind::Qlen,
        OutputKind::Summary,
        OutputKind::Aqm,
        OutputKind::Cdf,
    ];

    pub const DEFAULT: [OutputKind; 5] = [
        OutputKind::Delay,
        OutputKind::Drops,
        OutputKind::Util,
        OutputKind::Qlen,
        OutputKind::Summary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::Delay => "delay",
            OutputKind::Drops => "drops",
            OutputKind::Util => "util",
            OutputKind::Qlen => "qlen",
            OutputKind::Summary => "summary",
            OutputKind::Aqm => "aqm",
            OutputKind::Cdf => "cdf",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.as_str())
    }

    pub fn parse(s: &str) -> Option<Self> {
        OutputKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub duration: f64,
    pub seed: u64,
    pub link: LinkConfig,
    pub flows: Vec<FlowGroup>,
    pub udp: Vec<UdpConfig>,
    pub aqm: AqmConfig,
    pub tcp: TcpSettings,
    pub metrics: MetricsConfig,
    pub outputs: Vec<OutputKind>,
}

impl ScenarioConfig {
    pub fn total_flows(&self) -> u32 {
        self.flows.iter().map(|g| g.count).sum()
    }

    /// Seed handed to randomized queue disciplines, kept apart from the
    /// stream used for start-time jitter.
    pub fn aqm_seed(&self) -> u64 {
        self.seed ^ 0x9e37_79b9_7f4a_7c15
    }

    pub fn aqm_params(&self) -> AqmParams {
        self.aqm.params(self.link.buffer, self.aqm_seed())
    }

    /// Canonical text form; `parse_scenario(&cfg.emit())` gives back `cfg`.
    pub fn emit(&self) -> String {
        parse::emit(self)
    }
}

/// A problem with one scenario key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Every problem found while reading a scenario.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ScenarioError {
    pub issues: Vec<ScenarioIssue>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl ScenarioError {
    pub fn single(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        ScenarioError {
            issues: vec![ScenarioIssue {
                line,
                key: key.to_string(),
                message: message.into(),
            }],
        }
    }

    pub fn mentions(&self, key: &str) -> bool {
        self.issues.iter().any(|i| i.key == key)
    }
}
