//! Exit codes and artifacts of the command line tool.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sdrelax(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdrelax"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("SDRELAX_OUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn hypothesis_check_of_a_catalog_density_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdrelax(&["run", "--strict"], &configs().join("check_psi1_norm.json"), tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert_eq!(r["task"], "check-hypotheses");
    assert_eq!(r["result"]["all_pass"], true);
}

#[test]
fn example_identity_has_no_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdrelax(&["run"], &configs().join("example_identity.json"), tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert_eq!(r["result"]["closed_form"], 2.0);
    assert!(r["result"]["gap"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(r["result"]["lower_bound_ok"], true);
}

#[test]
fn foreign_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdrelax(&["run"], &configs().join("bad_key.json"), tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["error"].as_str().unwrap().contains("pressure"));
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn key_of_another_task_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"task": "example-verify", "d": 2, "example": {"a": [1.0, 0.0], "slice": [1.0, 0.0, 0.0, 1.0]}}"#,
    );
    let o = Command::new(env!("CARGO_BIN_EXE_sdrelax")).args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"].as_str().unwrap().contains("`d`"));
}

#[test]
fn strict_run_fails_on_a_hard_hypothesis() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"task": "check-hypotheses", "densities": {"psi1": {"expr": "norm(lam)^2"}}, "d": 1, "n": 1,
            "sampler": {"samples": 500, "escalation_samples": 100, "refine_steps": 20}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(sdrelax(&["run"], &cfg, &out).status.code(), Some(0));
    assert_eq!(sdrelax(&["run", "--strict"], &cfg, &out).status.code(), Some(4));
    assert_eq!(report(&out)["result"]["all_pass"], false);
}

#[test]
fn missing_competitor_reports_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"task": "cell-sweep",
            "densities": {"w": {"catalog": "w_zero"}, "psi1": {"catalog": "psi1_norm"}, "psi2": {"catalog": "psi2_norm"}},
            "problem": {"x": [0, 0], "d": 2, "n": 2,
                        "variant": {"kind": "w2", "a": [0, 0, 0, 0], "l": [0, 0, 0, 0, 0, 0, 0, 0], "m": [1, 0, 0, 0, 0, 0, 1, 0]}},
            "search": {"families": ["affine"]}}"#,
    );
    let o = sdrelax(&["run"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["problem"]["variant"]["kind"], "w2");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = sdrelax(&["run"], &configs().join("example_identity.json"), &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cell_sweep_writes_a_csv_with_units() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdrelax(&["run"], &configs().join("cell_sweep_w2.json"), tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').count();
    assert_eq!(lines.next().unwrap().split(',').count(), header);
    assert!(lines.next().is_some());
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdrelax(&["run", "--seed", "42"], &configs().join("relax_slip.json"), tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert_eq!(r["config"]["seed"], 42);
    assert_eq!(r["config"]["assembly"]["search"]["seed"], 42);
    assert!(tmp.path().join("contributions.csv").exists());
}
