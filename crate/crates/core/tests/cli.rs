use std::path::Path;
use std::process::{Command, Output};

use marcin_lab::experiments::Manifest;

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marcin-lab")).arg("--out").arg(out).args(args).env_remove("MARCIN_LAB_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn counterexample_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["counterexample", "--n", "2..3", "--theta", "0.25"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("counterexample.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,theta,ratio,target,match"));
    assert_eq!(lines.count(), 2);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let m = Manifest::load(dir.path()).unwrap();
    assert_eq!(m.command, "counterexample");
    assert!(String::from_utf8(o.stdout).unwrap().contains("counterexample.csv"));
}

#[test]
fn oracle_check_and_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["--seed", "1", "oracle-check", "--trials", "5"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = lab(&["--format", "json", "h-estimate", "--entries", "0,0;0,0"], dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h_estimate.json")).unwrap()).unwrap();
    assert_eq!(v[0]["lower_bound"].as_f64(), Some(0.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(&["counterexample", "--n", "5..2"], dir.path())), 2);
    assert_eq!(code(&lab(&["no-such-command"], dir.path())), 2);
    assert_eq!(code(&lab(&[], dir.path())), 2);
    let o = lab(&["counterexample", "--n", "14..15"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(dir.path().join("FAILED").exists());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("marcin-lab: "));
    // A file where the output directory should be.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    assert_eq!(code(&lab(&["counterexample", "--n", "2"], &blocker.join("sub"))), 4);
    let o = Command::new(env!("CARGO_BIN_EXE_marcin-lab"))
        .args(["counterexample", "--n", "2", "--out"])
        .arg(dir.path())
        .env("MARCIN_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "counterexample", "n": "2..5", "theta": 0.4, "seed": 5}"#).unwrap();
    let out = dir.path().join("out");
    let o = lab(&["--config", cfg.to_str().unwrap(), "counterexample", "--n", "3"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::load(&out).unwrap();
    assert_eq!(m.seed, 5);
    assert_eq!(m.params["n"], "3..3");
    assert_eq!(m.params["theta"], serde_json::json!([0.4]));
    let csv = std::fs::read_to_string(out.join("counterexample.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    // The config alone names the command.
    let o = lab(&["--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(out.join("counterexample.csv")).unwrap().lines().count(), 5);
}

#[test]
fn repeated_runs_have_identical_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "4", "band-bound", "--sizes", "4..6", "--restarts", "2"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&lab(&args, &a)), 0);
    assert_eq!(code(&lab(&args, &b)), 0);
    assert_eq!(Manifest::load(&a).unwrap().files, Manifest::load(&b).unwrap().files);
    assert_eq!(std::fs::read(a.join("manifest.json")).unwrap(), std::fs::read(b.join("manifest.json")).unwrap());
}
