use std::collections::BTreeMap;

use super::units::{
    format_bytes, format_rate, format_secs, is_bytes, is_time, parse_bytes, parse_rate, parse_secs,
};
use super::{
    AqmConfig, CapacityChange, FlowGroup, LinkConfig, MetricsConfig, OutputKind, ScenarioConfig,
    ScenarioError, ScenarioIssue, TcpSettings, UdpConfig,
};
use crate::aqm::{AqmRegistry, ThresholdSpec};
use crate::tcp::{FlavorKind, TcpFlavor};

/// Key-value pairs as written, before interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawScenario {
    entries: Vec<RawEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RawEntry {
    line: Option<usize>,
    key: String,
    value: String,
}

impl RawScenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries: Vec<RawEntry> = Vec::new();
        let mut issues = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                issues.push(ScenarioIssue {
                    line: Some(line_no),
                    key: content.to_string(),
                    message: "expected 'key = value'".into(),
                });
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                issues.push(ScenarioIssue {
                    line: Some(line_no),
                    key: key.clone(),
                    message: format!(
                        "duplicate key, first set on line {}",
                        prev.line.unwrap_or(0)
                    ),
                });
                continue;
            }
            entries.push(RawEntry {
                line: Some(line_no),
                key,
                value,
            });
        }
        if issues.is_empty() {
            Ok(RawScenario { entries })
        } else {
            Err(ScenarioError { issues })
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value.as_str())
    }

    /// Sets or replaces one key. Replaced values keep their line number.
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value.to_string(),
            None => self.entries.push(RawEntry {
                line: None,
                key: key.to_string(),
                value: value.to_string(),
            }),
        }
    }

    pub fn build(&self, registry: &AqmRegistry) -> Result<ScenarioConfig, ScenarioError> {
        Builder::new(registry).build(self)
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    parse_scenario_with(text, &AqmRegistry::with_builtins())
}

pub fn parse_scenario_with(text: &str, registry: &AqmRegistry) -> Result<ScenarioConfig, ScenarioError> {
    RawScenario::parse(text)?.build(registry)
}

/// Splits `flows[3].rtt0` into `("flows", 3, "rtt0")`.
fn indexed_key(key: &str) -> Option<(&str, usize, &str)> {
    let (head, rest) = key.split_once('[')?;
    let (idx, field) = rest.split_once("].")?;
    Some((head, idx.parse().ok()?, field))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_flavor(s: &str) -> Result<FlavorKind, String> {
    TcpFlavor::by_name(s)
        .map(|f| f.kind)
        .ok_or_else(|| format!("unknown TCP flavor '{s}' (expected reno or cubic)"))
}

fn parse_threshold(s: &str) -> Result<ThresholdSpec, String> {
    let spec = if is_time(s) {
        ThresholdSpec::Delay(parse_secs(s)?)
    } else if is_bytes(s) {
        ThresholdSpec::ByteLength(parse_bytes(s)?)
    } else {
        return Err(format!("'{s}' needs a time unit (ms, s) or a size unit (B, kB, MB)"));
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_changes(s: &str) -> Result<Vec<CapacityChange>, String> {
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (at, rate) = item
                .split_once('@')
                .ok_or_else(|| format!("'{}' should look like 30s@10Mbit", item.trim()))?;
            Ok(CapacityChange {
                at: parse_secs(at)?,
                rate: parse_rate(rate)?,
            })
        })
        .collect()
}

fn parse_outputs(s: &str) -> Result<Vec<OutputKind>, String> {
    if s == "none" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let kind = OutputKind::parse(item).ok_or_else(|| format!("unknown output '{item}'"))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

struct Builder<'a> {
    registry: &'a AqmRegistry,
    issues: Vec<ScenarioIssue>,
}

const REQUIRED: [&str; 4] = ["duration", "link.capacity", "link.buffer", "aqm.kind"];

impl<'a> Builder<'a> {
    fn new(registry: &'a AqmRegistry) -> Self {
        Builder {
            registry,
            issues: Vec::new(),
        }
    }

    fn issue(&mut self, line: Option<usize>, key: &str, message: impl Into<String>) {
        self.issues.push(ScenarioIssue {
            line,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn build(mut self, raw: &RawScenario) -> Result<ScenarioConfig, ScenarioError> {
        let mut cfg = ScenarioConfig {
            name: "scenario".into(),
            duration: 0.0,
            seed: 1,
            link: LinkConfig {
                capacity: 0.0,
                capacity_changes: Vec::new(),
                delay: 0.0,
                buffer: 0,
            },
            flows: Vec::new(),
            udp: Vec::new(),
            aqm: AqmConfig::new("taildrop"),
            tcp: TcpSettings::default(),
            metrics: MetricsConfig::default(),
            outputs: OutputKind::DEFAULT.to_vec(),
        };
        let mut flows: BTreeMap<usize, (FlowGroup, bool)> = BTreeMap::new();
        let mut udp: BTreeMap<usize, (UdpConfig, bool)> = BTreeMap::new();
        let mut lines: BTreeMap<String, Option<usize>> = BTreeMap::new();

        for key in REQUIRED {
            if raw.get(key).is_none() {
                self.issue(None, key, "required key is missing");
            }
        }

        for e in &raw.entries {
            lines.insert(e.key.clone(), e.line);
            let v = e.value.as_str();
            let result: Result<(), String> = (|| {
                match e.key.as_str() {
                    "name" => cfg.name = v.to_string(),
                    "duration" => cfg.duration = parse_secs(v)?,
                    "seed" => cfg.seed = v.parse().map_err(|_| format!("'{v}' is not a seed"))?,
                    "link.capacity" => cfg.link.capacity = parse_rate(v)?,
                    "link.capacity_changes" => cfg.link.capacity_changes = parse_changes(v)?,
                    "link.delay" => cfg.link.delay = parse_secs(v)?,
                    "link.buffer" => cfg.link.buffer = parse_bytes(v)?,
                    "aqm.kind" => cfg.aqm.kind = v.to_string(),
                    "aqm.threshold" => cfg.aqm.threshold = Some(parse_threshold(v)?),
                    "aqm.preset_interval" => cfg.aqm.preset_interval = parse_secs(v)?,
                    "aqm.tau" => cfg.aqm.tau = Some(parse_secs(v)?),
                    "aqm.alpha" => cfg.aqm.alpha = parse_f64(v)?,
                    "aqm.max_time" => cfg.aqm.max_time = Some(parse_secs(v)?),
                    "aqm.codel.target" => cfg.aqm.codel.target = parse_secs(v)?,
                    "aqm.codel.interval" => cfg.aqm.codel.interval = parse_secs(v)?,
                    "aqm.pie.target" => cfg.aqm.pie.target = parse_secs(v)?,
                    "aqm.pie.update_period" => cfg.aqm.pie.update_period = parse_secs(v)?,
                    "tcp.mss" => cfg.tcp.mss = parse_bytes(v)?,
                    "tcp.delack" => cfg.tcp.delack = parse_secs(v)?,
                    "metrics.util_window" => cfg.metrics.util_window = parse_secs(v)?,
                    "metrics.warmup" => cfg.metrics.warmup = parse_secs(v)?,
                    "metrics.sample_interval" => cfg.metrics.sample_interval = parse_secs(v)?,
                    "outputs" => cfg.outputs = parse_outputs(v)?,
                    key => match indexed_key(key) {
                        Some(("flows", idx, field)) => {
                            let (g, has_rtt) = flows
                                .entry(idx)
                                .or_insert_with(|| (FlowGroup::new(1, FlavorKind::Cubic, 0.0), false));
                            match field {
                                "count" => g.count = parse_u32(v)?,
                                "flavor" => g.flavor = parse_flavor(v)?,
                                "rtt0" => {
                                    g.rtt0 = parse_secs(v)?;
                                    *has_rtt = true;
                                }
                                "start" => g.start = parse_secs(v)?,
                                "start_window" => g.start_window = parse_secs(v)?,
                                "initial_cwnd" => g.initial_cwnd = parse_u32(v)?,
                                "initial_ssthresh" => g.initial_ssthresh = Some(parse_u32(v)?),
                                "beta" => g.beta = Some(parse_f64(v)?),
                                "cubic_scale" => g.cubic_scale = Some(parse_f64(v)?),
                                _ => return Err("unknown key".into()),
                            }
                        }
                        Some(("udp", idx, field)) => {
                            let (u, has_rate) = udp.entry(idx).or_insert_with(|| {
                                (
                                    UdpConfig {
                                        rate: 0.0,
                                        packet_size: 1500,
                                        start: 0.0,
                                        stop: None,
                                    },
                                    false,
                                )
                            });
                            match field {
                                "rate" => {
                                    u.rate = parse_rate(v)?;
                                    *has_rate = true;
                                }
                                "packet_size" => u.packet_size = parse_bytes(v)?,
                                "start" => u.start = parse_secs(v)?,
                                "stop" => u.stop = Some(parse_secs(v)?),
                                _ => return Err("unknown key".into()),
                            }
                        }
                        _ => return Err("unknown key".into()),
                    },
                }
                Ok(())
            })();
            if let Err(msg) = result {
                self.issue(e.line, &e.key, msg);
            }
        }

        for (expected, (&idx, (group, has_rtt))) in flows.iter().enumerate() {
            let key = format!("flows[{idx}]");
            if idx != expected {
                self.issue(None, &key, format!("flow groups must be numbered from 0 without gaps (missing flows[{expected}])"));
                break;
            }
            if !has_rtt {
                self.issue(None, &format!("{key}.rtt0"), "required key is missing");
            }
            cfg.flows.push(group.clone());
        }
        for (expected, (&idx, (source, has_rate))) in udp.iter().enumerate() {
            let key = format!("udp[{idx}]");
            if idx != expected {
                self.issue(None, &key, format!("udp sources must be numbered from 0 without gaps (missing udp[{expected}])"));
                break;
            }
            if !has_rate {
                self.issue(None, &format!("{key}.rate"), "required key is missing");
            }
            cfg.udp.push(source.clone());
        }

        if self.issues.is_empty() {
            self.validate(&cfg, &lines);
        }
        if self.issues.is_empty() {
            Ok(cfg)
        } else {
            Err(ScenarioError { issues: self.issues })
        }
    }

    fn validate(&mut self, cfg: &ScenarioConfig, lines: &BTreeMap<String, Option<usize>>) {
        let line = |k: &str| lines.get(k).copied().flatten();
        let mut check = |ok: bool, key: &str, msg: &str| {
            if !ok {
                self.issues.push(ScenarioIssue {
                    line: line(key),
                    key: key.to_string(),
                    message: msg.to_string(),
                });
            }
        };
        check(cfg.duration >= 0.0, "duration", "must not be negative");
        check(cfg.link.capacity > 0.0, "link.capacity", "must be positive");
        check(cfg.link.delay >= 0.0, "link.delay", "must not be negative");
        check(cfg.tcp.mss > 0, "tcp.mss", "must be positive");
        check(
            cfg.link.buffer >= cfg.tcp.mss.max(1),
            "link.buffer",
            "must hold at least one full-size packet",
        );
        check(cfg.tcp.delack >= 0.0, "tcp.delack", "must not be negative");
        check(cfg.metrics.util_window > 0.0, "metrics.util_window", "must be positive");
        check(cfg.metrics.warmup >= 0.0, "metrics.warmup", "must not be negative");
        check(cfg.metrics.sample_interval > 0.0, "metrics.sample_interval", "must be positive");
        let mut prev = 0.0;
        for c in &cfg.link.capacity_changes {
            check(c.at > prev, "link.capacity_changes", "change times must be positive and strictly increasing");
            check(c.rate > 0.0, "link.capacity_changes", "rates must be positive");
            prev = c.at;
        }
        for (i, g) in cfg.flows.iter().enumerate() {
            check(g.count >= 1, &format!("flows[{i}].count"), "must be at least 1");
            check(g.rtt0 > 0.0, &format!("flows[{i}].rtt0"), "must be positive");
            check(g.start >= 0.0, &format!("flows[{i}].start"), "must not be negative");
            check(g.start_window >= 0.0, &format!("flows[{i}].start_window"), "must not be negative");
            check(g.initial_cwnd >= 1, &format!("flows[{i}].initial_cwnd"), "must be at least 1");
            if let Err(e) = g.tcp_flavor() {
                let field = if g.beta.is_some_and(|b| !(b > 0.0 && b <= 1.0)) { "beta" } else { "cubic_scale" };
                check(false, &format!("flows[{i}].{field}"), &e.to_string());
            }
        }
        for (i, u) in cfg.udp.iter().enumerate() {
            check(u.rate > 0.0, &format!("udp[{i}].rate"), "must be positive");
            check(u.packet_size > 0, &format!("udp[{i}].packet_size"), "must be positive");
            check(u.start >= 0.0, &format!("udp[{i}].start"), "must not be negative");
            check(
                u.stop.is_none_or(|s| s > u.start),
                &format!("udp[{i}].stop"),
                "must come after start",
            );
        }
        if !self.issues.is_empty() {
            return;
        }
        let kind = cfg.aqm.kind.as_str();
        if !self.registry.contains(kind) {
            let known: Vec<&str> = self.registry.names().collect();
            self.issue(line("aqm.kind"), "aqm.kind", format!("unknown scheme '{kind}' (known: {})", known.join(", ")));
            return;
        }
        if let Err(e) = self.registry.build(kind, &cfg.aqm_params()) {
            let key = if matches!(e, crate::aqm::AqmError::MissingThreshold(_) | crate::aqm::AqmError::InvalidThreshold) {
                "aqm.threshold"
            } else {
                "aqm"
            };
            self.issue(line(key).or(line("aqm.kind")), key, e.to_string());
        }
    }
}

pub(super) fn emit(cfg: &ScenarioConfig) -> String {
    let mut out = Vec::new();
    let mut kv = |k: &str, v: String| out.push(format!("{k} = {v}"));
    kv("name", cfg.name.clone());
    kv("duration", format_secs(cfg.duration));
    kv("seed", cfg.seed.to_string());
    kv("link.capacity", format_rate(cfg.link.capacity));
    if !cfg.link.capacity_changes.is_empty() {
        let items: Vec<String> = cfg
            .link
            .capacity_changes
            .iter()
            .map(|c| format!("{}@{}", format_secs(c.at), format_rate(c.rate)))
            .collect();
        kv("link.capacity_changes", items.join(", "));
    }
    kv("link.delay", format_secs(cfg.link.delay));
    kv("link.buffer", format_bytes(cfg.link.buffer));
    for (i, g) in cfg.flows.iter().enumerate() {
        let p = format!("flows[{i}]");
        kv(&format!("{p}.count"), g.count.to_string());
        kv(&format!("{p}.flavor"), g.flavor.as_str().to_string());
        kv(&format!("{p}.rtt0"), format_secs(g.rtt0));
        kv(&format!("{p}.start"), format_secs(g.start));
        kv(&format!("{p}.start_window"), format_secs(g.start_window));
        kv(&format!("{p}.initial_cwnd"), g.initial_cwnd.to_string());
        if let Some(s) = g.initial_ssthresh {
            kv(&format!("{p}.initial_ssthresh"), s.to_string());
        }
        if let Some(b) = g.beta {
            kv(&format!("{p}.beta"), b.to_string());
        }
        if let Some(c) = g.cubic_scale {
            kv(&format!("{p}.cubic_scale"), c.to_string());
        }
    }
    for (i, u) in cfg.udp.iter().enumerate() {
        let p = format!("udp[{i}]");
        kv(&format!("{p}.rate"), format_rate(u.rate));
        kv(&format!("{p}.packet_size"), format_bytes(u.packet_size));
        kv(&format!("{p}.start"), format_secs(u.start));
        if let Some(s) = u.stop {
            kv(&format!("{p}.stop"), format_secs(s));
        }
    }
    kv("aqm.kind", cfg.aqm.kind.clone());
    match cfg.aqm.threshold {
        Some(ThresholdSpec::Delay(d)) => kv("aqm.threshold", format_secs(d)),
        Some(ThresholdSpec::ByteLength(b)) => kv("aqm.threshold", format_bytes(b)),
        None => {}
    }
    kv("aqm.preset_interval", format_secs(cfg.aqm.preset_interval));
    if let Some(t) = cfg.aqm.tau {
        kv("aqm.tau", format_secs(t));
    }
    kv("aqm.alpha", cfg.aqm.alpha.to_string());
    if let Some(m) = cfg.aqm.max_time {
        kv("aqm.max_time", format_secs(m));
    }
    kv("aqm.codel.target", format_secs(cfg.aqm.codel.target));
    kv("aqm.codel.interval", format_secs(cfg.aqm.codel.interval));
    kv("aqm.pie.target", format_secs(cfg.aqm.pie.target));
    kv("aqm.pie.update_period", format_secs(cfg.aqm.pie.update_period));
    kv("tcp.mss", format_bytes(cfg.tcp.mss));
    kv("tcp.delack", format_secs(cfg.tcp.delack));
    kv("metrics.util_window", format_secs(cfg.metrics.util_window));
    kv("metrics.warmup", format_secs(cfg.metrics.warmup));
    kv("metrics.sample_interval", format_secs(cfg.metrics.sample_interval));
    let outputs: Vec<&str> = cfg.outputs.iter().map(|o| o.as_str()).collect();
    kv("outputs", if outputs.is_empty() { "none".to_string() } else { outputs.join(", ") });
    let mut text = out.join("\n");
    text.push('\n');
    text
}
