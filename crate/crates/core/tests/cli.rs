use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "name = small
duration = 2s
seed = 5
link.capacity = 20Mbit
link.buffer = 50kB
aqm.kind = gsp_adaptive
aqm.threshold = 5ms
flows[0].count = 3
flows[0].rtt0 = 40ms
";

fn gsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsp")).args(args).output().unwrap()
}

fn text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr)
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

fn write_small(dir: &Path) -> String {
    let file = dir.join("small.scn");
    fs::write(&file, SMALL).unwrap();
    file.to_string_lossy().into_owned()
}

#[test]
fn run_writes_csvs_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let out_dir = dir.path().join("out");
    let out = gsp(&["run", &scn, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    let headers = [
        ("delay.csv", "time_s,flow_id,delay_s"),
        ("drops.csv", "time_s,flow_id,reason"),
        ("util.csv", "window_start_s,utilization"),
        ("qlen.csv", "time_s,backlog_bytes"),
    ];
    for (file, header) in headers {
        assert_eq!(first_line(&out_dir.join(file)), header, "{file}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("small,5,"));
    let echo = fs::read_to_string(out_dir.join("scenario.scn")).unwrap();
    assert!(echo.contains("aqm.kind = gsp_adaptive"));
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(gsp(&["run", &scn, "--out", a.to_str().unwrap(), "--seed", "77"]).status.success());
    assert!(gsp(&["run", &scn, "--out", b.to_str().unwrap()]).status.success());
    assert!(fs::read_to_string(a.join("scenario.scn")).unwrap().contains("seed = 77"));
    assert_ne!(fs::read(a.join("delay.csv")).unwrap(), fs::read(b.join("delay.csv")).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(gsp(&["run", &scn, "--out", a.to_str().unwrap()]).status.success());
    assert!(gsp(&["run", &scn, "--out", b.to_str().unwrap()]).status.success());
    for file in ["delay.csv", "drops.csv", "util.csv", "qlen.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn report_matches_the_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let out_dir = dir.path().join("out");
    let run = gsp(&["run", &scn, "--out", out_dir.to_str().unwrap()]);
    let report = gsp(&["report", out_dir.to_str().unwrap()]);
    assert!(report.status.success(), "{}", text(&report));
    let stats = |s: &str| s.lines().filter(|l| l.starts_with("  ") && !l.contains("wrote") && !l.contains("wall clock")).map(str::to_string).collect::<Vec<_>>();
    let from_run = stats(&text(&run));
    assert!(!from_run.is_empty());
    assert_eq!(stats(&text(&report)), from_run);
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = gsp(&["sweep", &scn, "--axis", "flows[0].rtt0", "--values", "10ms,20ms,50ms", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    for v in ["10ms", "20ms", "50ms"] {
        assert!(out_dir.join(format!("flows[0].rtt0={v}")).join("summary.csv").exists(), "{v}");
    }
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("axis,value,"));
}

#[test]
fn single_value_sweep_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let run_dir = dir.path().join("run");
    let sweep_dir = dir.path().join("sweep");
    assert!(gsp(&["run", &scn, "--out", run_dir.to_str().unwrap()]).status.success());
    let out = gsp(&["sweep", &scn, "--axis", "aqm.threshold", "--values", "5ms", "--out", sweep_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    let one = sweep_dir.join("aqm.threshold=5ms");
    for file in ["delay.csv", "drops.csv", "summary.csv"] {
        assert_eq!(fs::read(run_dir.join(file)).unwrap(), fs::read(one.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn sweep_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_small(dir.path());
    let out_dir = dir.path().join("x");
    let o = out_dir.to_str().unwrap();
    let empty = gsp(&["sweep", &scn, "--axis", "flows[0].rtt0", "--values", "", "--out", o]);
    assert!(!empty.status.success());
    let outputs = gsp(&["sweep", &scn, "--axis", "outputs", "--values", "delay", "--out", o]);
    assert!(!outputs.status.success());
    assert!(text(&outputs).contains("cannot be swept"));
    let invalid = gsp(&["sweep", &scn, "--axis", "flows[0].beta", "--values", "1.3", "--out", o]);
    assert!(!invalid.status.success());
    assert!(text(&invalid).contains("flows[0].beta"));
}

#[test]
fn invalid_scenario_reports_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.scn");
    fs::write(&file, SMALL.replace("link.buffer = 50kB", "link.buffer = lots")).unwrap();
    let out = gsp(&["run", file.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let msg = text(&out);
    assert!(msg.contains("line 5") && msg.contains("link.buffer"), "{msg}");
}

#[test]
fn sizing_prints_both_results() {
    let out = gsp(&["sizing", "--capacity", "1Gbit", "--rtt", "100ms", "--beta", "0.5"]);
    assert!(out.status.success());
    let msg = text(&out);
    assert!(msg.contains("12500000 B"), "{msg}");
    assert!(msg.contains("100.000000 ms"), "{msg}");
    let bad = gsp(&["sizing", "--capacity", "1Gbit", "--rtt", "100ms", "--beta", "1.3"]);
    assert!(!bad.status.success());
}

#[test]
fn list_names_schemes_and_scenarios() {
    let out = gsp(&["list"]);
    assert!(out.status.success());
    let msg = text(&out);
    for name in ["taildrop", "gsp_basic", "gsp_adaptive", "codel", "pie", "fig7_taildrop", "fig14_udp"] {
        assert!(msg.contains(name), "{name}");
    }
}
