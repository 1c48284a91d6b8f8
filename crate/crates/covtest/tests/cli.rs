use std::path::Path;
use std::process::{Command, Output};

fn covtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covtest"))
        .args(args)
        .env_remove("COVTEST_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

const HEADER: &str = "scenario,n,p,param,psi,power,half_width,B,seed,threshold";

#[test]
fn power_writes_csv_with_fixed_header_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let output = covtest(&[
        "power",
        "--scenario",
        "custom",
        "--p",
        "20",
        "--M",
        "2,5",
        "--n",
        "10",
        "--phi",
        "0.2",
        "--B",
        "120",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    assert_eq!(lines.count(), 2);

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
            .unwrap();
    assert!(sidecar["config"].is_object());
    assert!(sidecar["versions"].is_object());
    assert_eq!(sidecar["seed"], serde_json::json!(3));
}

#[test]
fn power_streams_csv_to_stdout_without_out() {
    let output = covtest(&[
        "power", "--scenario", "custom", "--p", "16", "--M", "3", "--n", "8", "--phi", "0.3",
        "--B", "100", "--seed", "5",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.starts_with(HEADER));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn calibrate_prints_threshold_json() {
    let output = covtest(&[
        "calibrate", "--alpha", "1", "--L", "1", "--phi", "0.1", "--n", "20", "--p", "100", "--B",
        "1000", "--level", "0.05",
    ]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(value["level"], serde_json::json!(0.05));
    assert_eq!(value["B"], serde_json::json!(1000));
    assert!(value["threshold"].as_f64().unwrap() > 0.0);
    assert!(value["seed"].is_object());
}

#[test]
fn overly_correlated_comparison_exits_three() {
    let output = covtest(&["power", "--scenario", "fig2", "--rho", "0.6", "--B", "100"]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("positive definite"), "stderr: {stderr}");
    assert!(stderr.contains("0.6"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = covtest(&["power", "--bogus"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bad_level_is_a_config_error() {
    let output = covtest(&[
        "power", "--scenario", "custom", "--p", "16", "--M", "3", "--phi", "0.3", "--B", "100",
        "--level", "0.7",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let output = Command::new(env!("CARGO_BIN_EXE_covtest"))
        .args(["calibrate", "--phi", "0.1", "--B", "100"])
        .env("COVTEST_THREADS", "many")
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("COVTEST_THREADS"));
}

#[test]
fn diagnose_emits_moment_rows() {
    let output = covtest(&["diagnose", "--n", "10", "--p", "20", "--B", "400", "--seed", "6"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.starts_with(HEADER));
    assert!(text.contains("diag-w4"));
    assert!(text.contains("diag-ks"));
}

#[test]
fn rate_rows_carry_the_separation_rate() {
    let output = covtest(&[
        "rate", "--n", "50", "--p", "200", "--B", "150", "--M", "2", "--seed", "4",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "rate");
    let param: f64 = fields[3].parse().unwrap();
    let psi: f64 = fields[4].parse().unwrap();
    assert_eq!(param, 2.0);
    assert!(psi > 0.0 && psi < 1.0);
}

#[test]
fn missing_output_directory_is_an_io_error() {
    let missing = Path::new("/nonexistent-covtest-dir/run.csv");
    let output = covtest(&[
        "power", "--scenario", "custom", "--p", "16", "--M", "3", "--n", "8", "--phi", "0.3",
        "--B", "100", "--out", missing.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}
