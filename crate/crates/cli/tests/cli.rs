//! End-to-end tests of the binary: determinism across runs and thread
//! counts, cache round trips, exit codes, and output formats.

use std::process::{Command, Output};

fn ffmanin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffmanin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = ffmanin(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn deterministic_across_runs_and_threads() {
    let a = stdout(&["--p", "7", "ulmer", "--n", "6"]);
    let b = stdout(&["--p", "7", "ulmer", "--n", "6"]);
    assert_eq!(a, b, "identical runs must be byte-identical");
    let one = stdout(&["--p", "7", "--threads", "1", "lfun", "--curve", "1;0;0;0;-T^6", "--mode", "full"]);
    let four = stdout(&["--p", "7", "--threads", "4", "lfun", "--curve", "1;0;0;0;-T^6", "--mode", "full"]);
    assert_eq!(one, four, "thread count must not affect output");
}

#[test]
fn analyze_examples() {
    let out = stdout(&["--p", "7", "analyze", "--curve", "1;0;0;0;-T^6"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["exact"], serde_json::json!(0));
    assert_eq!(v["report"]["upper"], serde_json::json!("0"));
    let out = stdout(&["--p", "13", "analyze", "--curve", "1;0;0;0;-T^12", "--skip-slow"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["exact"], serde_json::json!(1));
    assert_eq!(v["report"]["l_q_method"], serde_json::json!("jacobi"));
    assert_eq!(v["seed"], serde_json::json!(1));
}

#[test]
fn exit_codes() {
    // 2: parse error
    let out = ffmanin(&["--p", "7", "analyze", "--curve", "T^+bad"]);
    assert_eq!(out.status.code(), Some(2));
    // 3: singular curve
    let out = ffmanin(&["--p", "7", "analyze", "--curve", "0;0;0;0;0"]);
    assert_eq!(out.status.code(), Some(3));
    // 4: unsupported characteristic
    let out = ffmanin(&["--p", "3", "analyze", "--curve", "1;0;0;0;-T^6"]);
    assert_eq!(out.status.code(), Some(4));
    let out = ffmanin(&["--p", "9", "ulmer", "--n", "2"]);
    assert_eq!(out.status.code(), Some(4));
    // 0: fine
    let out = ffmanin(&["--p", "7", "jacobi", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn degree_bound_spot_check() {
    let out = stdout(&["degree-bound", "--q", "2", "--deg-m", "5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["thm108_bound"], serde_json::json!("4096000"));
}

#[test]
fn lemma42_runs() {
    let out = stdout(&["--p", "7", "lemma42", "--poly", "1-5*T+7*T^2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["formula"], serde_json::json!("-1"));
    assert!(v["report"]["attained_at"].as_str().is_some());
}

#[test]
fn cache_round_trip_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("counts.cache");
    let cache_s = cache.to_str().unwrap();
    let cold = stdout(&["--p", "5", "--cache", cache_s, "lfun", "--curve", "1;0;0;0;-T^2", "--mode", "full"]);
    assert!(cache.exists(), "cache file written");
    let warm = stdout(&["--p", "5", "--cache", cache_s, "lfun", "--curve", "1;0;0;0;-T^2", "--mode", "full"]);
    assert_eq!(cold, warm, "cold and warm cache runs must agree");
    let inspect = stdout(&["--p", "5", "--cache", cache_s, "cache", "inspect"]);
    let v: serde_json::Value = serde_json::from_str(&inspect).unwrap();
    assert!(v["report"]["entries"].as_u64().unwrap() > 0);
    let _ = stdout(&["--p", "5", "--cache", cache_s, "cache", "clear"]);
    assert!(!cache.exists(), "cache file cleared");
}

#[test]
fn formats() {
    let json = stdout(&["--p", "7", "jacobi", "--n", "6", "--format", "json"]);
    assert!(serde_json::from_str::<serde_json::Value>(&json).is_ok());
    let text = stdout(&["--p", "7", "jacobi", "--n", "6", "--format", "text"]);
    assert!(text.contains("l_q"));
    let csv = stdout(&["--p", "7", "--format", "csv", "ulmer", "--n-max", "4", "--p-list", "7"]);
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.split(',').any(|h| h == "deg_delta"));
    assert!(lines.count() >= 3);
}

#[test]
fn tate_table() {
    let out = stdout(&["--p", "7", "tate", "--curve", "1;0;0;0;-T^2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["deg_delta"], serde_json::json!(12));
    assert_eq!(v["report"]["deg_conductor"], serde_json::json!(5));
    let places = v["report"]["places"].as_array().unwrap();
    assert!(places.iter().any(|p| p["place"] == "inf"));
}

#[test]
fn twist_scan_runs() {
    let out = stdout(&["--p", "5", "--max-chars", "2", "--deep", "twist-scan", "--curve", "1;0;0;0;-T"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["report"]["scanned"].as_u64().unwrap() >= 1);
    let witnesses = v["report"]["witnesses"].as_array().unwrap();
    assert!(witnesses.len() >= 2); // trivial + at least one scanned character
}
