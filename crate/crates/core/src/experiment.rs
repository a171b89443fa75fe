//! Running scenarios and writing their reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};

use crate::aqm::{AqmRegistry, DropReason};
use crate::metrics::{cdf, DelaySample, DropRecord, QlenSample, RunRecord, SummaryStats, UtilPoint};
use crate::netsim::Simulation;
use crate::scenario::{parse_scenario, OutputKind, RawScenario, ScenarioConfig};

/// File holding the echoed configuration in every output directory.
pub const CONFIG_ECHO: &str = "scenario.scn";

pub struct RunReport {
    pub config: ScenarioConfig,
    pub summary: SummaryStats,
    pub outputs: Vec<PathBuf>,
    pub wall_clock: Duration,
    pub record: RunRecord,
}

pub fn summarize(cfg: &ScenarioConfig, record: &RunRecord) -> SummaryStats {
    SummaryStats::compute(
        &record.delays,
        &record.drops,
        &record.utilization(),
        &record.qlen,
        record.duration,
        cfg.metrics.warmup,
    )
}

/// Simulates `cfg`; with `out` set, writes the requested CSVs there.
pub fn run_scenario(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<RunReport> {
    run_scenario_with(cfg, out, &AqmRegistry::with_builtins())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, out: Option<&Path>, registry: &AqmRegistry) -> Result<RunReport> {
    let started = Instant::now();
    let sim = Simulation::new(cfg, registry).with_context(|| format!("setting up '{}'", cfg.name))?;
    let (record, _) = sim.run().with_context(|| format!("simulating '{}'", cfg.name))?;
    let summary = summarize(cfg, &record);
    let outputs = match out {
        Some(dir) => write_outputs(cfg, &record, &summary, dir)?,
        None => Vec::new(),
    };
    Ok(RunReport {
        config: cfg.clone(),
        summary,
        outputs,
        wall_clock: started.elapsed(),
        record,
    })
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_header() -> Vec<&'static str> {
    let mut h = vec!["name", "seed", "duration_s"];
    h.extend(SummaryStats::HEADER);
    h
}

pub fn summary_row(cfg: &ScenarioConfig, s: &SummaryStats) -> Vec<String> {
    let mut row = vec![cfg.name.clone(), cfg.seed.to_string(), cfg.duration.to_string()];
    row.extend(s.row());
    row
}

fn render(kind: OutputKind, cfg: &ScenarioConfig, record: &RunRecord, summary: &SummaryStats) -> Result<Vec<u8>> {
    match kind {
        OutputKind::Delay => csv_bytes(
            &["time_s", "flow_id", "delay_s"],
            record
                .delays
                .iter()
                .map(|d| [d.time.to_string(), d.flow_id.to_string(), d.delay.to_string()]),
        ),
        OutputKind::Drops => csv_bytes(
            &["time_s", "flow_id", "reason"],
            record
                .drops
                .iter()
                .map(|d| [d.time.to_string(), d.flow_id.to_string(), d.reason.as_str().to_string()]),
        ),
        OutputKind::Util => csv_bytes(
            &["window_start_s", "utilization"],
            record
                .utilization()
                .iter()
                .map(|u| [u.window_start.to_string(), u.utilization.to_string()]),
        ),
        OutputKind::Qlen => csv_bytes(
            &["time_s", "backlog_bytes"],
            record
                .qlen
                .iter()
                .map(|q| [q.time.to_string(), q.backlog_bytes.to_string()]),
        ),
        OutputKind::Summary => csv_bytes(&summary_header(), [summary_row(cfg, summary)]),
        OutputKind::Aqm => csv_bytes(
            &["time_s", "interval_s", "cumul_time_s", "drop_probability"],
            record
                .probes
                .iter()
                .map(|p| [p.time.to_string(), opt(p.interval), opt(p.cumul_time), opt(p.drop_probability)]),
        ),
        OutputKind::Cdf => {
            let delays: Vec<f64> = record
                .delays
                .iter()
                .filter(|d| d.time >= cfg.metrics.warmup)
                .map(|d| d.delay)
                .collect();
            csv_bytes(
                &["delay_s", "probability"],
                cdf(&delays).iter().map(|(x, p)| [x.to_string(), p.to_string()]),
            )
        }
    }
}

pub fn write_outputs(cfg: &ScenarioConfig, record: &RunRecord, summary: &SummaryStats, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let echo = dir.join(CONFIG_ECHO);
    write_atomic(&echo, cfg.emit().as_bytes())?;
    for &kind in &cfg.outputs {
        let path = dir.join(kind.file_name());
        write_atomic(&path, &render(kind, cfg, record, summary)?)?;
        written.push(path);
    }
    Ok(written)
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.records()
        .map(|rec| rec.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| anyhow::anyhow!("{}: bad value '{raw}' in column {}", path.display(), i + 1))
}

/// Recomputes the summary of a finished run from the CSVs in `dir`.
/// `warmup` overrides the value recorded in the echoed configuration.
pub fn report(dir: &Path, warmup: Option<f64>) -> Result<SummaryStats> {
    let echo = dir.join(CONFIG_ECHO);
    let text = fs::read_to_string(&echo).with_context(|| format!("reading {}", echo.display()))?;
    let cfg = parse_scenario(&text).map_err(|e| anyhow::anyhow!("{}: {e}", echo.display()))?;
    let warmup = warmup.unwrap_or(cfg.metrics.warmup);
    let path = |k: OutputKind| dir.join(k.file_name());

    let mut delays = Vec::new();
    let p = path(OutputKind::Delay);
    if p.exists() {
        for r in read_rows(&p)? {
            delays.push(DelaySample {
                time: field(&r, 0, &p)?,
                flow_id: field(&r, 1, &p)?,
                delay: field(&r, 2, &p)?,
            });
        }
    }
    let mut drops = Vec::new();
    let p = path(OutputKind::Drops);
    if p.exists() {
        for r in read_rows(&p)? {
            let reason: String = field(&r, 2, &p)?;
            drops.push(DropRecord {
                time: field(&r, 0, &p)?,
                flow_id: field(&r, 1, &p)?,
                reason: DropReason::parse(&reason)
                    .ok_or_else(|| anyhow::anyhow!("{}: unknown drop reason '{reason}'", p.display()))?,
            });
        }
    }
    let mut util = Vec::new();
    let p = path(OutputKind::Util);
    if p.exists() {
        for r in read_rows(&p)? {
            util.push(UtilPoint {
                window_start: field(&r, 0, &p)?,
                utilization: field(&r, 1, &p)?,
            });
        }
    }
    let mut qlen = Vec::new();
    let p = path(OutputKind::Qlen);
    if p.exists() {
        for r in read_rows(&p)? {
            qlen.push(QlenSample {
                time: field(&r, 0, &p)?,
                backlog_bytes: field(&r, 1, &p)?,
            });
        }
    }
    Ok(SummaryStats::compute(&delays, &drops, &util, &qlen, cfg.duration, warmup))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPolicy {
    /// Every run uses the scenario's seed.
    Same,
    /// Run `i` uses the scenario's seed plus `i`.
    Index,
}

/// Keys that do not name a single scalar.
const NOT_SWEEPABLE: [&str; 3] = ["outputs", "name", "link.capacity_changes"];

/// Runs `base` once per value of `axis`. Runs execute in parallel; with
/// `out` set each lands in its own subdirectory and a combined `sweep.csv`
/// is written.
pub fn sweep(
    base: &RawScenario,
    axis: &str,
    values: &[String],
    policy: SeedPolicy,
    out: Option<&Path>,
) -> Result<Vec<RunReport>> {
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    if NOT_SWEEPABLE.contains(&axis) {
        bail!("'{axis}' cannot be swept");
    }
    let registry = AqmRegistry::with_builtins();
    let mut configs = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let mut raw = base.clone();
        raw.set(axis, v);
        if policy == SeedPolicy::Index {
            let seed: u64 = raw
                .get("seed")
                .map_or(Ok(1), str::parse)
                .map_err(|_| anyhow::anyhow!("seed is not an integer"))?;
            raw.set("seed", &(seed + i as u64).to_string());
        }
        let cfg = raw
            .build(&registry)
            .map_err(|e| anyhow::anyhow!("{axis} = {v}:\n{e}"))?;
        configs.push(cfg);
    }
    let dirs: Vec<Option<PathBuf>> = values
        .iter()
        .map(|v| out.map(|d| d.join(format!("{}={}", axis, sanitize(v)))))
        .collect();

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut results: Vec<Option<Result<RunReport>>> = (0..configs.len()).map(|_| None).collect();
    for chunk_start in (0..configs.len()).step_by(threads) {
        let chunk_end = (chunk_start + threads).min(configs.len());
        std::thread::scope(|s| {
            let handles: Vec<_> = (chunk_start..chunk_end)
                .map(|i| {
                    let cfg = &configs[i];
                    let dir = dirs[i].as_deref();
                    s.spawn(move || run_scenario(cfg, dir))
                })
                .collect();
            for (i, h) in (chunk_start..chunk_end).zip(handles) {
                results[i] = Some(h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("run panicked"))));
            }
        });
    }
    let reports: Vec<RunReport> = results
        .into_iter()
        .zip(values)
        .map(|(r, v)| r.expect("every run joined").with_context(|| format!("{axis} = {v}")))
        .collect::<Result<_>>()?;

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut header = vec!["axis", "value"];
        header.extend(summary_header());
        let rows = reports.iter().zip(values).map(|(r, v)| {
            let mut row = vec![axis.to_string(), v.clone()];
            row.extend(summary_row(&r.config, &r.summary));
            row
        });
        write_atomic(&dir.join("sweep.csv"), &csv_bytes(&header, rows)?)?;
    }
    Ok(reports)
}

fn sanitize(v: &str) -> String {
    v.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// Reads a scenario from a file path or the name of a bundled scenario.
pub fn load_scenario_text(spec: &str) -> Result<String> {
    let path = Path::new(spec);
    if path.exists() {
        return fs::read_to_string(path).with_context(|| format!("reading {spec}"));
    }
    match crate::scenario::builtin(spec) {
        Some(text) => Ok(text.to_string()),
        None => bail!("no scenario file or bundled scenario named '{spec}'"),
    }
}
