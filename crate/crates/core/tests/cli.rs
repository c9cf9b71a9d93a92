use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn madcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_json(m: usize, n: usize, gamma: &str, r: u64) -> String {
    let row = vec!["\"1/4\""; n].join(", ");
    let rows = vec![format!("[{row}]"); m].join(", ");
    let gamma = vec![format!("\"{gamma}\""); m].join(", ");
    format!(
        r#"{{"m": {m}, "n": {n}, "edge": "1/2", "cube_origin": [{rows}], "gamma": [{gamma}],
            "c": "1/100", "R": {r}, "mode": "empirical"}}"#
    )
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn construct(dir: &Path, depth: &str) -> String {
    let cfg = write(dir, "cfg.json", &config_json(1, 2, "1/3", 4));
    let cert = dir.join("cert.json").to_str().unwrap().to_string();
    let o = madcert(&["construct", "--config", &cfg, "--depth", depth, "--mode", "dfs", "--out", &cert]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    cert
}

#[test]
fn construct_then_verify_accepts() {
    let dir = TempDir::new().unwrap();
    let cert = construct(dir.path(), "6");
    let o = madcert(&["verify", "--cert", &cert]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("accept"));
}

#[test]
fn tampered_witness_reports_the_danger_point() {
    let dir = TempDir::new().unwrap();
    let cert = construct(dir.path(), "6");
    let text = fs::read_to_string(&cert).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    // x1 + x2 = 2/3 lies on the core of P = (p, q) = (-1, (1, 1)) with gamma = 1/3
    v["witness"] = serde_json::json!([["1/3", "1/3"]]);
    let bad = write(dir.path(), "bad.json", &serde_json::to_string(&v).unwrap());
    let o = madcert(&["verify", "--cert", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("reject"), "{err}");
}

#[test]
fn small_dimension_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cfg.json", &config_json(1, 1, "0/1", 4));
    let out = dir.path().join("c.json");
    let o = madcert(&["construct", "--config", &cfg, "--depth", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m+n ≥ 3 required"));
}

#[test]
fn malformed_rationals_are_rejected() {
    let dir = TempDir::new().unwrap();
    for bad in ["3/0", "0.01", "2/200"] {
        let body = config_json(1, 2, "0/1", 4).replace("\"1/100\"", &format!("\"{bad}\""));
        let cfg = write(dir.path(), "cfg.json", &body);
        let o = madcert(&["params", "--config", &cfg, "--horizon", "3"]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = madcert(&["scan", "--matrix", "x.json", "--budget", "3", "--precision", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flags_and_subcommands_are_usage_errors() {
    assert_eq!(madcert(&["verify", "--cert", "a", "--bogus"]).status.code(), Some(2));
    assert_eq!(madcert(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(madcert(&[]).status.code(), Some(2));
}

#[test]
fn certificates_are_canonical_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let cert = construct(dir.path(), "5");
    let first = fs::read_to_string(&cert).unwrap();
    let parsed = madcert::construction::Certificate::from_json(&first).unwrap();
    assert_eq!(parsed.to_json(), first);

    let cfg = dir.path().join("cfg.json");
    let other = dir.path().join("one-thread.json");
    let o = madcert(&[
        "--threads", "1", "construct", "--config", cfg.to_str().unwrap(), "--depth", "5", "--out",
        other.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(other).unwrap(), first);
}

#[test]
fn scan_sums_oracle_and_params_run() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.json", r#"{"matrix": [["1/2"]]}"#);
    let o = madcert(&["scan", "--matrix", &m, "--budget", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("min lower bound 0/1") && text.contains("q = (-2)"), "{text}");

    let l = write(dir.path(), "l.json", r#"{"matrix": [["13/31", "7/29"]]}"#);
    let o = madcert(&["sums", "--matrix", &l, "--q-list", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 3);

    let o = madcert(&["oracle", "--suite", "separation", "--trials", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = madcert(&["oracle", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(dir.path(), "cfg.json", &config_json(1, 2, "0/1", 4));
    let o = madcert(&["params", "--config", &cfg, "--horizon", "3"]);
    // R = 4 < e^3, so condition ii fails
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ii"));
}
