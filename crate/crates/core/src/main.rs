use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand, ValueEnum};

use gsp::aqm::{AqmRegistry, BufferSizing};
use gsp::experiment::{self, SeedPolicy};
use gsp::metrics::SummaryStats;
use gsp::scenario::{builtin_names, parse_rate, parse_secs, parse_scenario, RawScenario};

#[derive(Parser)]
#[command(name = "gsp", version, about = "GSP queue management experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedArg {
    Same,
    Index,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a file or a bundled scenario name).
    Run {
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a scenario once per value of one key.
    Sweep {
        scenario: String,
        #[arg(long)]
        axis: String,
        /// Comma-separated values, written as in a scenario file.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long, value_enum, default_value = "same")]
        seed_policy: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the summary of a finished run from its CSV files.
    Report {
        dir: PathBuf,
        /// Ignore samples before this time (e.g. 10s).
        #[arg(long)]
        warmup: Option<String>,
    },
    /// Minimum buffer and delay budget for a link.
    Sizing {
        /// Link rate, e.g. 100Mbit.
        #[arg(long)]
        capacity: String,
        /// Propagation round-trip time, e.g. 100ms.
        #[arg(long)]
        rtt: String,
        #[arg(long)]
        beta: f64,
    },
    /// List queue disciplines and bundled scenarios.
    List,
}

fn print_summary(name: &str, s: &SummaryStats) {
    let ms = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.3} ms", x * 1e3));
    println!("{name}");
    println!("  delay mean {}  median {}  p5 {}  p95 {}", ms(s.delay_mean), ms(s.delay_median), ms(s.delay_p5), ms(s.delay_p95));
    match s.utilization_mean {
        Some(u) => println!("  utilization {:.2}%", u * 100.0),
        None => println!("  utilization -"),
    }
    let drops: Vec<String> = s.drops.iter().map(|(r, c)| format!("{} {c}", r.as_str())).collect();
    println!("  drops {}", drops.join(", "));
    if let Some(e) = s.empty_fraction {
        println!("  queue empty {:.1}% of the time", e * 100.0);
    }
}

fn load_raw(spec: &str) -> Result<RawScenario> {
    let text = experiment::load_scenario_text(spec)?;
    RawScenario::parse(&text).map_err(|e| anyhow!("{spec}:\n{e}"))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, out, seed } => {
            let mut raw = load_raw(&scenario)?;
            if let Some(seed) = seed {
                raw.set("seed", &seed.to_string());
            }
            let cfg = raw
                .build(&AqmRegistry::with_builtins())
                .map_err(|e| anyhow!("{scenario}:\n{e}"))?;
            let report = experiment::run_scenario(&cfg, out.as_deref())?;
            print_summary(&cfg.name, &report.summary);
            for p in &report.outputs {
                println!("  wrote {}", p.display());
            }
            println!("  {:.2} s wall clock", report.wall_clock.as_secs_f64());
        }
        Command::Sweep { scenario, axis, values, seed_policy, out } => {
            let raw = load_raw(&scenario)?;
            let policy = match seed_policy {
                SeedArg::Same => SeedPolicy::Same,
                SeedArg::Index => SeedPolicy::Index,
            };
            let values: Vec<String> = values.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            let reports = experiment::sweep(&raw, &axis, &values, policy, out.as_deref())?;
            for (v, r) in values.iter().zip(&reports) {
                print_summary(&format!("{axis} = {v}"), &r.summary);
            }
            if let Some(dir) = out {
                println!("wrote {}", dir.join("sweep.csv").display());
            }
        }
        Command::Report { dir, warmup } => {
            let warmup = warmup.as_deref().map(parse_secs).transpose().map_err(|e| anyhow!("--warmup: {e}"))?;
            let s = experiment::report(&dir, warmup)?;
            print_summary(&dir.display().to_string(), &s);
        }
        Command::Sizing { capacity, rtt, beta } => {
            let c = parse_rate(&capacity).map_err(|e| anyhow!("--capacity: {e}"))?;
            let r = parse_secs(&rtt).map_err(|e| anyhow!("--rtt: {e}"))?;
            let s = BufferSizing::compute(c, r, beta)?;
            println!("delay budget  {:.6} ms", s.delay_budget * 1e3);
            println!("min buffer    {} B", s.min_buffer);
        }
        Command::List => {
            println!("queue disciplines:");
            for (name, summary) in AqmRegistry::with_builtins().describe() {
                println!("  {name:<14} {summary}");
            }
            println!("bundled scenarios:");
            for name in builtin_names() {
                let cfg = parse_scenario(experiment::load_scenario_text(name)?.as_str()).map_err(|e| anyhow!("{e}"))?;
                println!("  {name:<18} {} flows, {} s, {}", cfg.total_flows(), cfg.duration, cfg.aqm.kind);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
