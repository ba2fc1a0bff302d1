use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn badk(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_badk"));
    cmd.args(args).env_remove("BADK_PRECISION");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("badk runs")
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> PathBuf {
    let p = dir.path().join("config.json");
    fs::write(&p, body).unwrap();
    p
}

const SQRT2: &str = r#"{ "label": "Q(sqrt 2)", "minpoly": [-2, 0], "units": [[1, 1]] }"#;

#[test]
fn field_info_from_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k.json"), SQRT2).unwrap();
    let cfg = write_config(&dir, r#"{ "field": "k.json" }"#);
    let out = badk(&["field-info", "--config", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["discriminant"], "8");
    assert_eq!(v["places"].as_array().unwrap().len(), 2);
    let res = v["units"][0]["product_formula_residual"].as_f64().unwrap();
    assert!(res < 1e-30);
}

#[test]
fn trajectory_csv_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"{ "trajectory": { "omega": [0, 1], "t_max": 3, "step": 0.5 } }"#,
    );
    let out_path = dir.path().join("sub/traj.csv");
    let out = badk(
        &["trajectory", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--quiet"],
        &[],
    );
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    let csv = fs::read_to_string(out_path).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t,systole,achieving_a,achieving_b");
    assert_eq!(rows.len(), 8);
    // τ(√2) is a field point: the systole at t is at most e^{-t}
    let last: f64 = rows[7].split(',').nth(1).unwrap().parse().unwrap();
    assert!(last <= (-3f64).exp() * (1.0 + 1e-12));
}

#[test]
fn bad_check_of_a_rational_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, r#"{ "bad_check": { "x": ["1/3", "1/3"], "q_bound": 10 } }"#);
    let out = badk(&["bad-check", "--config", cfg.to_str().unwrap(), "--quiet"], &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["c_estimate"].as_f64().unwrap() < 1e-30);
}

const PLAY: &str = r#"{
  "play": {
    "curve": { "components": [["0", "1"], ["0", "1"]] },
    "params": { "rounds": 8 },
    "adversaries": [{ "kind": "random" }, { "kind": "center_hugging" }],
    "strategies": ["tracking"],
    "verify": null
  }
}"#;

#[test]
fn play_is_deterministic_under_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, PLAY);
    let c = cfg.to_str().unwrap();
    let a = badk(&["play", "--config", c, "--seed", "9", "--quiet"], &[]);
    let b = badk(&["play", "--config", c, "--seed", "9", "--quiet"], &[]);
    let other = badk(&["play", "--config", c, "--seed", "10", "--quiet"], &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, other.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let games = v.as_array().unwrap();
    assert_eq!(games.len(), 2);
    assert_eq!(games[0]["params"]["seed"], 9);
    assert_eq!(games[0]["rounds"].as_array().unwrap().len(), 8);
}

#[test]
fn precision_flag_beats_env_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, r#"{ "precision": 40 }"#);
    let c = cfg.to_str().unwrap();
    // 40 bits is rejected, so success tells which value was used
    assert_eq!(badk(&["field-info", "--config", c], &[]).status.code(), Some(2));
    assert!(badk(&["field-info", "--config", c], &[("BADK_PRECISION", "256")]).status.success());
    let out = badk(&["field-info", "--config", c, "--precision", "30"], &[("BADK_PRECISION", "256")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision"));
}

#[test]
fn invalid_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad_field = write_config(&dir, r#"{ "field": { "minpoly": [-5, 0], "power_basis_is_maximal": false } }"#);
    assert_eq!(badk(&["field-info", "--config", bad_field.to_str().unwrap()], &[]).status.code(), Some(2));
    let missing = write_config(&dir, "{}");
    let out = badk(&["play", "--config", missing.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"play\""));
    assert_ne!(badk(&["no-such-command"], &[]).status.code(), Some(0));
    let arity = write_config(&dir, r#"{ "bad_check": { "x": ["0.5"], "q_bound": 10 } }"#);
    assert_eq!(badk(&["bad-check", "--config", arity.to_str().unwrap()], &[]).status.code(), Some(2));
}

#[test]
fn weight_sweep_flags_zero_weight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"{ "weight_sweep": {
            "weights": [[0.5, 0.5], [1.0, 0.0]],
            "curve": { "components": [["0", "1"], ["0", "1"]] },
            "params": { "rounds": 6 },
            "verify": null
        } }"#,
    );
    let out = badk(&["weight-sweep", "--config", cfg.to_str().unwrap(), "--quiet"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let runs = v["runs"].as_array().unwrap();
    assert!(runs[0].get("flagged").is_none());
    assert!(runs[1]["flagged"].is_string());
    assert_eq!(runs[1]["transcript"]["hypothesis_violated"], runs[1]["flagged"]);
}

#[test]
fn counterexample_without_tree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, r#"{ "counterexample": { "t_max": 8, "step": 1, "grid": 11 } }"#);
    let out = badk(&["counterexample", "--config", cfg.to_str().unwrap(), "--quiet"], &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("tree").is_none());
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    assert_eq!(v["below_threshold_from"], 7.0);
}
