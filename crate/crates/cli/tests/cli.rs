use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmt-sharp")).args(args).env("RMT_SHARP_THREADS", "2").output().expect("spawn")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const PT: &str = r#"{"experiment": "phase_transition", "models": ["directed"], "n": [40], "grid": {"offsets": [-2, 4]}, "trials": 20, "seed": 9}"#;

#[test]
fn no_subcommand_is_a_usage_error() {
    let out = bin(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(bin(&["sample", "--bogus"]).status.code(), Some(2));
}

#[test]
fn sample_writes_the_edge_list() {
    let out = bin(&["sample", "--model", "undirected", "--n", "100", "--p", "0.05", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<usize> = text.lines().next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&header[..2], &[100, 100]);
    assert_eq!(text.lines().count(), header[2] + 1);
    // same seed, same bytes
    let again = bin(&["sample", "--model", "undirected", "--n", "100", "--p", "0.05", "--seed", "7"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    assert_eq!(bin(&["sample", "--model", "undirected", "--n", "10", "--p", "1.5"]).status.code(), Some(2));
}

#[test]
fn matrix_commands_read_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("id.txt");
    fs::write(&m, "3 3 3\n1 1\n2 2\n3 3\n").unwrap();
    let out = bin(&["spectrum", m.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["s_min"], 1.0);
    assert_eq!(v["singular_exact"], "Invertible");
    let out = bin(&["distance", m.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["projection"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(bin(&["audit", m.to_str().unwrap(), "--p", "0.5"]).status.success());

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2 2\n1 1\n1 1\n").unwrap();
    let out = bin(&["spectrum", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = bin(&["spectrum", dir.path().join("missing.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
}

#[test]
fn run_applies_overrides_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = bin(&["run", "--config", &cfg, "--set", "trials=7", "--output-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("override trials=7"));
    }
    for name in ["phase_transition_records.csv", "phase_transition_aggregates.json", "phase_transition_run.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.join("phase_transition_records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 7);
    let agg: serde_json::Value = serde_json::from_slice(&fs::read(a.join("phase_transition_aggregates.json")).unwrap()).unwrap();
    assert_eq!(agg["schema_version"], 1);

    // aggregating the CSV again reproduces the report
    let out = bin(&["aggregate", a.join("phase_transition_records.csv").to_str().unwrap()]);
    let again: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(again, agg);
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PT);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let status = Command::new(env!("CARGO_BIN_EXE_rmt-sharp"))
            .args(["run", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap()])
            .env("RMT_SHARP_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out_dir.join("phase_transition_records.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PT);
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    assert_eq!(bin(&["run", "--config", &cfg, "--set", "trials", "--output-dir", o]).status.code(), Some(2));
    assert_eq!(bin(&["run", "--config", &cfg, "--set", "nosuch.key=1", "--output-dir", o]).status.code(), Some(2));
    assert_eq!(bin(&["run", "--config", "/no/such/config.json"]).status.code(), Some(2));
    assert_eq!(bin(&["run"]).status.code(), Some(2));
    let broken = write_config(dir.path(), r#"{"experiment": "phase_transition""#);
    assert_eq!(bin(&["run", "--config", &broken]).status.code(), Some(2));
}

#[test]
fn strict_mode_fails_on_enforced_checks() {
    let dir = tempfile::tempdir().unwrap();
    // at n = 10, p = 0.83 repeated all-ones rows make singular matrices common,
    // so the 0.99 invertibility threshold fails
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "phase_transition", "models": ["undirected"], "n": [10], "grid": {"offsets": [6]}, "trials": 200, "seed": 1}"#,
    );
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    let out = bin(&["run", "--config", &cfg, "--output-dir", o]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL P(invertible | no zero line)"));
    assert_eq!(bin(&["run", "--config", &cfg, "--output-dir", o, "--strict"]).status.code(), Some(1));
}
