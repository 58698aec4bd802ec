use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spamtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spamtomo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_example_passes_the_golden_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = spamtomo(&["run-example", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("z^I = [0.2500, 0.2500, 0.2500, 0.2500]"));
    assert!(stdout.contains("golden check: PASS"));
    let file = json(&dir.path().join("run_example.json"));
    assert_eq!(file["passed"], Value::Bool(true));
    assert_eq!(file["meta"]["version"], Value::String(env!("CARGO_PKG_VERSION").into()));
    assert_eq!(file["meta"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn exact_decode_with_reference_zi_matches_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"reference": "ZI"}"#);
    let out = spamtomo(&["decode", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let file = json(&dir.path().join("decode.json"));
    assert_eq!(file["decoder"], "exact");
    let noise = &file["result"]["noise"];
    for (k, expected) in [0.53, 0.53, 0.53, 0.53].iter().enumerate() {
        assert!((noise[k][k].as_f64().unwrap() - expected).abs() < 0.005);
    }
    assert!((file["gauge"]["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!(file["reconstruction"]["noise_error"].as_f64().unwrap() < 1e-10);
    let summary = fs::read_to_string(dir.path().join("decode.txt")).unwrap();
    assert!(summary.starts_with("# spamtomo "));
}

#[test]
fn erasure_noise_is_a_condition_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "erasure.json",
        r#"{"noise": {"kind": "erasure", "column": [0.25, 0.25, 0.25, 0.25]}}"#,
    );
    for mode in ["exact", "randomized"] {
        let out = spamtomo(&["decode", "--config", &cfg, "--mode", mode, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{mode}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("condition 1"));
    }
}

#[test]
fn zero_trial_calibration_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.json", r#"{"calibration": {"trials": 0}}"#);
    let out = spamtomo(&["calibrate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("calibration.trials"));
}

#[test]
fn malformed_configs_report_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"noise": {"kind": "tensor_flip", "flips": [0.1, 2.0]}}"#, "noise.flips[1]"),
        (r#"{"sweeps": [{"protocol": "noise", "stage": "support", "trials": 5}]}"#, "sweeps[0].trials"),
        (r#"{"qubits": 2}"#, "qubits"),
        (r#"{"state": {"kind": "basis", "bits": "012"}}"#, "state.bits"),
    ];
    for (i, (text, path)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), text);
        let out = spamtomo(&["decode", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(4), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(path), "{err}");
    }
}

#[test]
fn randomized_decode_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        let out = spamtomo(&["decode", "--mode", "randomized", "--seed", seed, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &tempfile::TempDir| fs::read_to_string(d.path().join("decode.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(json(&a.path().join("decode.json"))["decoder"], "randomized");
}

#[test]
fn scaling_csvs_reproduce_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        r#"{"sweeps": [{"protocol": "noise", "stage": "support", "taus": [0.05, 0.2, 0.3], "trials": 20}]}"#,
    );
    let runs: Vec<_> = (0..2)
        .map(|i| {
            let out_dir = dir.path().join(format!("run{i}"));
            let out = spamtomo(&["scaling", "--config", &cfg, "--seed", "4", "--threads", "2", "--out", out_dir.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            out_dir
        })
        .collect();
    for name in ["scaling_noise_support.csv", "scaling_noise_support_summary.csv"] {
        assert_eq!(body(&runs[0].join(name)), body(&runs[1].join(name)), "{name}");
    }
    let points = body(&runs[0].join("scaling_noise_support.csv"));
    assert_eq!(points.lines().next().unwrap(), "n,beta,u_norm,N,trials,successes,step_id,seed_base");
    let summary = body(&runs[0].join("scaling_noise_support_summary.csv"));
    let header = summary.lines().next().unwrap();
    assert!(header.contains("n_star") && header.contains("method") && header.contains("slope"));
    assert_eq!(summary.lines().count(), 4);
    let raw = fs::read_to_string(runs[0].join("scaling_noise_support.csv")).unwrap();
    assert!(raw.contains("# seed: 4"));
}

#[test]
fn easy_instances_calibrate_no_higher_than_hard_ones() {
    let dir = tempfile::tempdir().unwrap();
    let recommended = |noise: &str, name: &str| -> f64 {
        let cfg = write_config(dir.path(), name, &format!(r#"{{"noise": {noise}}}"#));
        let out_dir = dir.path().join(name.trim_end_matches(".json"));
        let out = spamtomo(&["calibrate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let file = json(&out_dir.join("calibration.json"));
        file["report"]["recommended"].as_f64().unwrap_or(f64::INFINITY)
    };
    let easy = recommended(r#"{"kind": "identity"}"#, "easy.json");
    let hard = recommended(r#"{"kind": "tensor_flip", "flips": [0.25, 0.25]}"#, "hard.json");
    assert!(easy <= hard, "easy {easy}, hard {hard}");
    assert!(hard <= 10.0);
}
