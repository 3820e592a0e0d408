use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const HEADER: &str = "total_vehicles,method,seed_count,latency_ms_mean,latency_ms_std,qos_rate_mean,subchannels_mean,spectral_eff_mean,coverage_failures";

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platoon-sim")).args(args).output().unwrap()
}

fn simulate(out: &Path, extra: &[&str]) -> Output {
    let config = config();
    let mut args = vec!["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    sim(&args)
}

#[test]
fn same_arguments_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = simulate(out, &["--totals", "20,40", "--seeds", "3"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn default_grid_has_a_row_per_total_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = simulate(&out, &["--seeds", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    assert_eq!(lines.count(), 27);
}

#[test]
fn no_relay_always_uses_one_subchannel_per_platoon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = simulate(&out, &["--methods", "no-relay", "--totals", "15..55:10", "--seeds", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cols: Vec<_> = row.split(',').collect();
        assert_eq!(cols[1], "no_relay");
        assert_eq!(cols[6].parse::<f64>().unwrap(), 5.0);
    }
}

#[test]
fn dumps_reload_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let dumps = dir.path().join("dumps");
    let o = simulate(
        &out,
        &["--totals", "25", "--seeds", "2", "--mc-draws", "20", "--dump-dir", dumps.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_dir(&dumps).unwrap().count(), 2 + 2 * 3);
    assert!(dir.path().join("r_reliability.csv").exists());

    let v = sim(&["validate", "--dump-dir", dumps.to_str().unwrap()]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));

    // A relay index past the platoon must be rejected.
    let target = dumps.join("allocation_t25_s0_rspg.json");
    let mut alloc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    alloc["relays"][0] = serde_json::json!(99);
    fs::write(&target, alloc.to_string()).unwrap();
    assert!(!sim(&["validate", "--dump-dir", dumps.to_str().unwrap()]).status.success());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[model]\nno_such_key = 1\n").unwrap();
    let out = dir.path().join("r.csv");
    let o = sim(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));

    let none = dir.path().join("none.toml");
    let missing = sim(&["simulate", "--config", none.to_str().unwrap()]);
    assert!(!missing.status.success());

    let empty = sim(&["validate", "--dump-dir", dir.path().to_str().unwrap()]);
    assert!(!empty.status.success());
}
