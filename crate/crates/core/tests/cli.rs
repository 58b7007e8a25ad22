use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_subharm")).args(args).output().expect("binary runs")
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const SMALL_RB: &str = "
seed = 7
[transmon]
dim = 2
[rb]
lengths = [1, 2, 4, 8]
n_seq = 3
dissipation = true
";

#[test]
fn zero_amplitude_rabi_scan_is_all_ground() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[drive]\namplitude_v = 0.0\n[rabi]\nfreq_points = 3\nduration_points = 5\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["rabi", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("rabi_result.json"));
    let rows = r["scan"]["p_excited"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().flat_map(|r| r.as_array().unwrap()).all(|v| v.as_f64() == Some(0.0)));
    let csv = fs::read_to_string(out.join("rabi_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 15);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn rb_is_reproducible_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SMALL_RB).unwrap();
    let before = fs::read(&cfg).unwrap();
    let mut results = Vec::new();
    for (k, workers) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("out{k}"));
        let o = run(&["rb", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        results.push((fs::read(out.join("rb_result.json")).unwrap(), fs::read(out.join("rb_raw.csv")).unwrap()));
    }
    assert_eq!(results[0], results[1]);
    assert_eq!(results[1], results[2]);
    assert_eq!(fs::read(&cfg).unwrap(), before);

    // the resolved configuration reproduces the run
    let out0 = dir.path().join("out0");
    let m = json(&out0.join("manifest.json"));
    assert_eq!(m["seed"], 7);
    assert!(m["timestamp_unix"].as_u64().is_some());
    let again = dir.path().join("again");
    let o = run(&["rb", "--config", out0.join("resolved_config.toml").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(again.join("rb_result.json")).unwrap(), results[0].0);

    // a different seed draws different sequences
    let other = dir.path().join("other");
    assert!(run(&["rb", "--config", cfg.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "8"]).status.success());
    assert_ne!(fs::read(other.join("rb_raw.csv")).unwrap(), results[0].1);
}

#[test]
fn unknown_key_gives_schema_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[transmon]\nfreq_hz = 4e9\n").unwrap();
    let o = run(&["budget", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "config_error");
    assert!(err["error"]["message"].as_str().unwrap().contains("freq_hz"));
}

#[test]
fn failing_command_reports_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[budget]\nimpedance_csv = \"/nonexistent/table.csv\"\n").unwrap();
    let out = dir.path().join("o");
    let o = run(&["budget", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&out.join("error.json"))["error"]["kind"], "io_error");
}

#[test]
fn budget_contains_the_filtered_line_advantage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["budget", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r = json(&out.join("budget_result.json"));
    let row = r["rows"].as_array().unwrap().iter().find(|r| r["label"] == "config-3").unwrap();
    assert!((row["advantage_db_vs_first"].as_f64().unwrap() - 20.0).abs() < 3.0);
    let heat = fs::read_to_string(out.join("budget_heat.csv")).unwrap();
    assert!(heat.starts_with("rabi_hz,config-1_heat_w,config-2_heat_w,config-3_heat_w"));

    // the emitted impedance table can be read back
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, format!("[budget]\nimpedance_csv = {:?}\n", out.join("budget_impedance.csv"))).unwrap();
    let o2 = dir.path().join("o2");
    assert!(run(&["budget", "--config", cfg.to_str().unwrap(), "--out", o2.to_str().unwrap()]).status.success());
    assert_eq!(json(&o2.join("budget_result.json"))["rows"], r["rows"]);
}
