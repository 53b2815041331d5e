use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn ssrdc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssrdc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_writes_a_report() {
    let dir = TempDir::new().unwrap();
    let o = ssrdc(&["analyze"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("analyze.json"));
    assert_eq!(r["command"]["name"], "analyze");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["calibration_parameters"]["km"].is_f64());
    assert!(dir.path().join("config.json").exists());
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert_eq!(ssrdc(&["tune"], d.path()).status.code(), Some(0));
        assert_eq!(ssrdc(&["sensitivity", "--points", "5"], d.path()).status.code(), Some(0));
    }
    for f in ["tune.json", "sensitivity.json", "sensitivity.csv", "config.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulation_reruns_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"scenario": {"t_end": 0.3, "events": [{"t": 0.1, "kind": {"power_step": {"mw": 2.0}}}]}}"#).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = ssrdc(&["simulate", "--config", cfg.to_str().unwrap()], d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["timeseries.csv", "simulate.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unstabilizable_case_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"operating_point": {"n": 9}, "ssrdc": {"k_max": 0.1}}"#).unwrap();
    let o = ssrdc(&["tune", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&dir.path().join("tune.json"))["result"]["stabilizable"], false);
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ssrdc(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(ssrdc(&["analyze", "--band", "95:55"], dir.path()).status.code(), Some(1));
    assert_eq!(ssrdc(&["analyze", "--config", "/nonexistent/c.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn bad_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"plant": {"kp": "fast"}}"#).unwrap();
    let o = ssrdc(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("plant.kp"));

    fs::write(&cfg, r#"{"operating_point": {"n": 0}}"#).unwrap();
    let o = ssrdc(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ssrdc(&["--help"], dir.path()).status.code(), Some(0));
}
