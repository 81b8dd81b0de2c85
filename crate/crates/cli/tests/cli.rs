use std::path::PathBuf;
use std::process::Command;

use covertctl::{run, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, SEED_ENV};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("covertctl").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn close(v: &serde_json::Value, expected: f64) -> bool {
    v.as_f64().is_some_and(|x| (x - expected).abs() <= 1e-15 * expected.abs().max(1.0))
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn reset_lrt_config_matches_golden() {
    let cfg = data("reset_lrt.toml");
    let (code, out, err) = call(&["run", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let golden = std::fs::read_to_string(data("reset_lrt.golden.json")).unwrap();
    assert_eq!(out, golden);
}

#[test]
fn reset_divergence_vanishes_without_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kl.toml");
    std::fs::write(&cfg, "command = \"kl\"\n[kl]\nkind = \"reset\"\na = 0.0\n").unwrap();
    let (code, out, _) = call(&["run", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["kl"].as_f64(), Some(0.0));
    assert_eq!(v["error_sum_lower"].as_f64(), Some(1.0));
}

#[test]
fn json_to_file_and_summary_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kl.json");
    let (code, out, _) = call(&["kl", "--kind", "reset", "--a", "0.6", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("kl"), "{out}");
    let v = json(&std::fs::read_to_string(&path).unwrap());
    let expected = 0.5 * (1.0f64 / (1.0 - 0.36)).ln();
    assert!(close(&v["kl"], expected));
}

#[test]
fn covert_reset_gain_in_bits() {
    let (code, out, _) = call(&["bounds", "--eps", "0.5", "--log-base", "two"]);
    assert_eq!(code, EXIT_OK);
    let line = out.lines().find(|l| l.contains("reset_max_covert_gain")).expect(&out);
    assert!(line.contains("0.70711"), "{line}");
}

#[test]
fn must_detect_below_window_fails_check() {
    let (code, out, _) = call(&[
        "detect", "--a", "1", "--noise", "uniform", "--controller", "one_bit",
        "--detector", "control_energy", "--window", "20", "--trials", "200",
        "--set", "checks=[\"must_detect\"]",
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED, "{out}");
}

#[test]
fn must_detect_above_window_passes() {
    let (code, out, err) = call(&[
        "detect", "--a", "1", "--noise", "uniform", "--controller", "one_bit",
        "--detector", "control_energy", "--window", "400", "--trials", "200",
        "--set", "checks=[\"must_detect\"]",
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"kl\"\n[kl\na = 1\n").unwrap();
    let (code, _, err) = call(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_with_config_code() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(call(&["kl", "--kind", "nonsense"]).0, EXIT_CONFIG);
    assert_eq!(call(&["detect", "--set", "no_such_key=1"]).0, EXIT_CONFIG);
    assert_eq!(call(&["kl", "--set", "missing_equals"]).0, EXIT_CONFIG);
    assert_eq!(call(&["run"]).0, EXIT_CONFIG);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn overrides_beat_flags_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kl.toml");
    std::fs::write(&cfg, "[kl]\nkind = \"reset\"\na = 0.1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let kl_at = |a: f64| 0.5 * (1.0 / (1.0 - a * a)).ln();
    let (_, out, _) = call(&["--config", c, "kl", "--format", "json"]);
    assert!(close(&json(&out)["kl"], kl_at(0.1)));
    let (_, out, _) = call(&["--config", c, "kl", "--a", "0.2", "--format", "json"]);
    assert!(close(&json(&out)["kl"], kl_at(0.2)));
    let (_, out, _) = call(&["--config", c, "kl", "--a", "0.2", "--set", "a=0.3", "--format", "json"]);
    assert!(close(&json(&out)["kl"], kl_at(0.3)));
}

#[test]
fn sweep_emits_one_csv_row_per_value() {
    let (code, out, err) = call(&[
        "sweep", "--a", "1", "--noise", "uniform", "--controller", "one_bit",
        "--detector", "control_energy", "--axis", "k", "--values", "50,100,400",
        "--trials", "200", "--format", "csv",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "axis");
    assert!(header.iter().any(|h| h == "alpha_hat"));
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values, [50.0, 100.0, 400.0]);
}

#[test]
fn seed_falls_back_to_environment() {
    let bin = env!("CARGO_BIN_EXE_covertctl");
    let args = ["detect", "--detector", "reset_lrt", "--a", "0.9", "--trials", "300", "--format", "json"];
    let with_env = |seed: &str| {
        let o = Command::new(bin).args(args).env(SEED_ENV, seed).output().unwrap();
        assert!(o.status.success());
        json(&String::from_utf8(o.stdout).unwrap())
    };
    let a = with_env("99");
    assert_eq!(a["seed"].as_u64(), Some(99));
    assert_eq!(with_env("99"), a);
    let o = Command::new(bin).args(args).args(["--seed", "5"]).env(SEED_ENV, "99").output().unwrap();
    assert_eq!(json(&String::from_utf8(o.stdout).unwrap())["seed"].as_u64(), Some(5));
    let o = Command::new(bin).args(args).env(SEED_ENV, "not-a-number").output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}
