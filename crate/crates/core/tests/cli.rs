// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mosum-sdll"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_detect_path_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    let result = dir.path().join("result.json");
    let path = dir.path().join("path.json");
    let fields = dir.path().join("fields.csv");

    let out = run(&["simulate", "--model", "mix", "--seed", "7", "--rep", "0", "--out", arg(&series)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().next(), Some("x"));
    assert_eq!(text.lines().count(), 1001);

    let out = run(&[
        "detect", "--input", arg(&series), "--method", "mosum-sdll", "--lambda", "0.9",
        "--out", arg(&result), "--dump-fields", arg(&fields),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    for key in ["n_hat", "changepoints", "sigma_hat", "threshold", "path"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    let n_hat = json["n_hat"].as_u64().unwrap();
    assert_eq!(json["changepoints"].as_array().unwrap().len() as u64, n_hat);
    let dump = std::fs::read_to_string(&fields).unwrap();
    assert_eq!(dump.lines().next(), Some("k,G_l,G_r,m_tilde,m_masked"));

    let out = run(&["path", "--input", arg(&series), "--out", arg(&path)]);
    assert!(out.status.success());
    let entries: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let first = &entries.as_array().unwrap()[0];
    for key in ["k", "importance", "g_l", "g_r", "iter"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn baseline_writes_threshold_cache() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let cache = dir.path().join("cache.csv");
    let body: String = (0..200).map(|t| format!("{}\n", if t < 100 { 0.0 } else { 3.0 } + (t % 7) as f64 * 0.01)).collect();
    std::fs::write(&series, body).unwrap();
    let out = run(&[
        "detect", "--input", arg(&series), "--method", "mosum-baseline", "--alpha", "0.1",
        "--min-bandwidth", "2", "--threshold-cache", arg(&cache),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["changepoints"].as_array().unwrap().iter().any(|c| c == 100));
    let text = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(text.lines().next(), Some("T,G,alpha,reps,seed,critical_value"));
}

#[test]
fn bench_writes_rows_for_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = run(&[
        "bench", "--models", "mix,eet", "--methods", "mosum-sdll,mosum-baseline", "--reps", "2",
        "--seed", "7", "--out", arg(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "model,method,metric,value");
    assert_eq!(rows.len() - 1, 2 * 2 * 5);
    assert!(text.contains("# preset {\"name\":\"eet\""));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let out = run(&["detect", "--input", "/definitely/not/here.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = run(&["bench", "--models", "et", "--methods", "", "--out", "/tmp/x.csv"]);
    assert!(!out.status.success());

    let out = run(&["simulate", "--model", "nope"]);
    assert!(!out.status.success());
}
