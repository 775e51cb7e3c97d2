//! End-to-end checks of the binary: exit codes, file formats, determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_infotheo")
}

const SMALL_CONFIG: &str = r#"
seed = 7
distributions = [
    { family = "gaussian", mean = 0.0, var = 1.0 },
    { family = "uniform", lo = 0.0, hi = 1.0 },
]
lambda_grid = [0.0, 0.5, 1.0]
t_grid = [0.1, 1.0]
checks = ["complementary", "epi", "epi_concave"]
"#;

fn run_report(config: &str, dir: &Path, out_name: &str, extra: &[&str]) -> (std::process::Output, String) {
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config).unwrap();
    let out_path = dir.join(out_name);
    let mode = if out_name.ends_with(".csv") { "sweep" } else { "report" };
    let output = Command::new(bin())
        .arg(mode)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out_path)
        .args(extra)
        .output()
        .expect("binary runs");
    let contents = std::fs::read_to_string(&out_path).unwrap_or_default();
    (output, contents)
}

#[test]
fn report_exits_zero_and_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let (output, json) = run_report(SMALL_CONFIG, dir.path(), "out.json", &[]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = infotheo::report::Report::from_json(&json).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.summary.failed, 0);
    assert!(report.meta.elapsed_ms.is_none());
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, first) = run_report(SMALL_CONFIG, dir.path(), "a.json", &[]);
    let (_, second) = run_report(SMALL_CONFIG, dir.path(), "b.json", &[]);
    assert!(!first.is_empty());
    assert_eq!(first, second);
    // thread count must not change the bytes either
    let (_, third) = run_report(SMALL_CONFIG, dir.path(), "c.json", &["--threads", "1"]);
    assert_eq!(first, third);
}

#[test]
fn timing_flag_records_elapsed() {
    let dir = tempfile::tempdir().unwrap();
    let (_, json) = run_report(SMALL_CONFIG, dir.path(), "out.json", &["--timing"]);
    let report = infotheo::report::Report::from_json(&json).unwrap();
    assert!(report.meta.elapsed_ms.is_some());
}

#[test]
fn sweep_emits_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let (output, csv) = run_report(SMALL_CONFIG, dir.path(), "out.csv", &[]);
    assert!(output.status.success());
    assert_eq!(csv.lines().next().unwrap(), "check,family_x,family_y,lambda,t,value,tol,status");
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 8, "{line}");
    }
}

#[test]
fn malformed_config_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "distributions = []\n";
    let (output, _) = run_report(bad, dir.path(), "out.json", &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("distributions"), "stderr: {stderr}");
}

#[test]
fn empty_t_grid_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"
distributions = [{ family = "gaussian", mean = 0.0, var = 1.0 }]
t_grid = []
"#;
    let (output, _) = run_report(bad, dir.path(), "out.json", &[]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("t_grid"));
}
