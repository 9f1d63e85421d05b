//! End-to-end runs of the `twoflux` binary on small scenarios.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn square_wave_line() -> Value {
    json!({
        "name": "square",
        "flux": { "name": "constant_gap", "gap": 1.0 },
        "initial": { "name": "square_wave", "height": 1.0, "left": 0.0, "right": 1.0 },
        "topology": { "kind": "line" },
        "nu": 6,
        "horizon": 1.5,
        "n_samples": 15
    })
}

fn periodic_square() -> Value {
    json!({
        "flux": { "name": "constant_gap", "gap": 1.0 },
        "initial": { "name": "square_wave", "left": 0.25, "right": 0.75 },
        "topology": { "kind": "periodic", "period": 1.0 },
        "nu": 6,
        "horizon": 0.05,
        "viscous": { "n_cells": 64, "rungs": [[0.4, 0.05]] }
    })
}

fn properties_scenario(trials: usize) -> Value {
    json!({
        "flux": { "name": "burgers_shifted" },
        "initial": { "name": "square_wave", "left": 0.0, "right": 1.0 },
        "topology": { "kind": "periodic", "period": 1.0 },
        "horizon": 0.5,
        "properties": { "trials": trials, "seed": 3, "nu": 5, "max_jumps": 8, "samples": 8 }
    })
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn config(&self, name: &str, v: &Value) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn twoflux(&self, cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_twoflux"))
            .arg(cmd)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(out)
            .args(extra)
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Rows of a CSV written by the harness, keyed by header; also checks the
/// hash comment on the first line.
fn read_csv(path: &Path) -> (String, Vec<std::collections::HashMap<String, String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash = lines
        .next()
        .unwrap()
        .strip_prefix("# config_hash: ")
        .expect("hash header")
        .to_string();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect();
    (hash, rows)
}

fn f(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn run_square_wave_plateau_decays_linearly() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.json", &square_wave_line());
    let out = sb.out("run");
    let o = sb.twoflux("run", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (hash, rows) = read_csv(&out.join("series.csv"));
    assert_eq!(hash.len(), 64);
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let t = f(r, "time");
        if t < 1.0 {
            assert!((f(r, "top_plateau_value") - (1.0 - t)).abs() < 1e-10);
        } else {
            assert_eq!(f(r, "linf"), 0.0);
        }
        assert!((f(r, "integral") - (1.0 - t).max(0.0)).abs() < 1e-10);
    }
    for name in ["profiles.csv", "events.csv"] {
        assert_eq!(read_csv(&out.join(name)).0, hash);
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config_hash"], Value::String(hash));
    assert!(report["diagnostics"]["verdicts"].as_array().unwrap().iter().all(|v| v["passed"] == true));
}

#[test]
fn zero_horizon_echoes_the_quantized_data() {
    let sb = Sandbox::new();
    let mut v = square_wave_line();
    v["horizon"] = json!(0.0);
    v["n_samples"] = json!(0);
    v["initial"]["height"] = json!(0.7);
    let cfg = sb.config("z.json", &v);
    let out = sb.out("zero");
    assert_eq!(code(&sb.twoflux("run", &cfg, &out, &[])), 0);
    let (_, rows) = read_csv(&out.join("profiles.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(f(&rows[0], "time"), 0.0);
    assert_eq!((f(&rows[0], "x_left"), f(&rows[0], "x_right")), (0.0, 1.0));
    // 0.7 truncated to the grid of step 2^-6
    assert_eq!(f(&rows[0], "value"), (0.7f64 * 64.0).trunc() / 64.0);
}

#[test]
fn malformed_or_invalid_configs_exit_with_two() {
    let sb = Sandbox::new();
    let broken = sb.dir.path().join("broken.json");
    std::fs::write(&broken, "{\"flux\":").unwrap();
    let out = sb.out("x");
    let o = sb.twoflux("run", &broken, &out, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));

    let cfg = sb.config("s.json", &square_wave_line());
    assert_eq!(code(&sb.twoflux("run", &cfg, &out, &["--set", "horizon=-1"])), 2);
    assert_eq!(code(&sb.twoflux("run", &cfg, &out, &["--set", "unknown_key=1"])), 2);
    assert_eq!(code(&sb.twoflux("run", &cfg, &out, &["--set", "noequals"])), 2);
    assert_eq!(code(&sb.twoflux("compare", &cfg, &out, &[])), 2, "compare needs a viscous section");
    assert_eq!(code(&sb.twoflux("properties", &cfg, &out, &[])), 2, "properties needs its section");
    assert!(!out.exists());
}

#[test]
fn overrides_change_the_hash() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.json", &square_wave_line());
    let (a, b) = (sb.out("a"), sb.out("b"));
    sb.twoflux("run", &cfg, &a, &[]);
    sb.twoflux("run", &cfg, &b, &["--set", "horizon=0.5"]);
    let ha = read_csv(&a.join("series.csv")).0;
    let hb = read_csv(&b.join("series.csv")).0;
    assert_ne!(ha, hb);
    let (_, rows) = read_csv(&b.join("series.csv"));
    assert_eq!(f(rows.last().unwrap(), "time"), 0.5);
}

#[test]
fn compare_with_one_rung_has_no_verdict() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.json", &periodic_square());
    let out = sb.out("cmp");
    let o = sb.twoflux("compare", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("compare.csv"));
    assert_eq!(rows.len(), 1);
    let d = f(&rows[0], "distance");
    assert!(d > 0.0 && d < 0.5);
    assert!(f(&rows[0], "mean_drift") < 1e-12);
    let j: Value = serde_json::from_str(&std::fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    assert!(j["verdict"].is_null());
}

#[test]
fn compare_wraps_line_data() {
    let sb = Sandbox::new();
    let mut v = square_wave_line();
    v["horizon"] = json!(0.25);
    v["viscous"] = json!({ "n_cells": 64, "rungs": [[0.4, 0.05], [0.2, 0.025]] });
    let cfg = sb.config("l.json", &v);
    let out = sb.out("cmp");
    let o = sb.twoflux("compare", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_csv(&out.join("compare.csv")).1.len(), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict:"));
}

#[test]
fn properties_with_zero_trials_warn_and_succeed() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.json", &properties_scenario(0));
    let out = sb.out("props");
    let o = sb.twoflux("properties", &cfg, &out, &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(read_csv(&out.join("properties.csv")).1.len(), 0);
}

#[test]
fn properties_pass_on_a_correct_tracker() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.json", &properties_scenario(6));
    let out = sb.out("props");
    let o = sb.twoflux("properties", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let (_, rows) = read_csv(&out.join("properties.csv"));
    assert!(rows.iter().all(|r| r["passed"] == "true"));
    for check in ["l1_contraction", "comparison", "averaging", "plateau_width", "front_count"] {
        assert!(rows.iter().any(|r| r["check"] == check), "{check}");
    }
}

#[test]
fn corrupted_tracker_is_caught_by_contraction() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.json", &properties_scenario(8));
    let out = sb.out("props");
    let o = sb.twoflux("properties", &cfg, &out, &["--set", "tracker.mutation=flip_speed_sign"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    let (_, rows) = read_csv(&out.join("properties.csv"));
    assert!(rows.iter().any(|r| r["check"] == "l1_contraction" && r["passed"] == "false"));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let worst = summary["worst"].as_array().unwrap();
    let c = worst.iter().find(|w| w["name"] == "l1_contraction").unwrap();
    assert!(c["violations"].as_u64().unwrap() > 0);
}

#[test]
fn converge_single_rung_and_affine_flux() {
    let sb = Sandbox::new();
    let mut v = square_wave_line();
    v["horizon"] = json!(0.5);
    let cfg = sb.config("c.json", &v);
    let out = sb.out("conv");
    assert_eq!(code(&sb.twoflux("converge", &cfg, &out, &[])), 0);
    let (_, rows) = read_csv(&out.join("converge.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(f(&rows[0], "nu"), 6.0);
    assert_eq!(f(&rows[0], "distance"), 0.0);

    let out = sb.out("conv2");
    assert_eq!(code(&sb.twoflux("converge", &cfg, &out, &["--set", "nu_ladder=[3,4,5]"])), 0);
    let (_, rows) = read_csv(&out.join("converge.csv"));
    assert_eq!(rows.len(), 3);
    // both fluxes are affine, so sampling them on a grid is exact
    assert!(rows.iter().all(|r| f(r, "flux_estimate") == 0.0));
    assert!(!out.join("viscous.csv").exists());
}

#[test]
fn converge_on_the_circle_adds_the_viscous_table() {
    let sb = Sandbox::new();
    let mut v = periodic_square();
    v["nu_ladder"] = json!([4, 6]);
    let cfg = sb.config("p.json", &v);
    let out = sb.out("conv");
    assert_eq!(code(&sb.twoflux("converge", &cfg, &out, &[])), 0);
    assert_eq!(read_csv(&out.join("viscous.csv")).1.len(), 1);
}

#[test]
fn outputs_are_deterministic() {
    let sb = Sandbox::new();
    let cfg = sb.config("p.json", &properties_scenario(4));
    let (a, b) = (sb.out("a"), sb.out("b"));
    sb.twoflux("properties", &cfg, &a, &["--jobs", "1"]);
    sb.twoflux("properties", &cfg, &b, &["--jobs", "2"]);
    for name in ["properties.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_flag_reseeds_random_data() {
    let sb = Sandbox::new();
    let v = json!({
        "flux": { "name": "traffic_concave", "gap": 1.0 },
        "initial": { "name": "random_piecewise", "seed": 1, "n_jumps": 6, "amplitude": 0.5 },
        "topology": { "kind": "line" },
        "nu": 5,
        "horizon": 0.2
    });
    let cfg = sb.config("r.json", &v);
    let (a, b, c) = (sb.out("a"), sb.out("b"), sb.out("c"));
    sb.twoflux("run", &cfg, &a, &[]);
    sb.twoflux("run", &cfg, &b, &["--seed", "1"]);
    sb.twoflux("run", &cfg, &c, &["--seed", "2"]);
    let read = |d: &Path| std::fs::read_to_string(d.join("profiles.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}
