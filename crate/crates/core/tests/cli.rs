use std::path::{Path, PathBuf};
use std::process::Command;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn vecgrav(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vecgrav")).args(args).output().unwrap()
}

#[test]
fn identities_pass_and_write_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("identities.conf");
    let out = vecgrav(&["identities", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("status PASS"));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(report.trim_end(), stdout.trim_end());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("status complete"));
}

#[test]
fn small_run_writes_snapshots_and_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("small_run.conf");
    let out = vecgrav(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for name in ["energy.csv", "periods.csv", "manifest.txt", "report.txt"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let energy = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert!(energy.lines().count() > 10);
}

#[test]
fn missing_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = vecgrav(&["static", "--config", dir.path().join("absent.conf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "grid.n = many\nsolver.nonsense = 1\n").unwrap();
    let out = vecgrav(&["static", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid.n") && err.contains("solver.nonsense"), "{err}");
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = vecgrav(&["orbit"]);
    assert_ne!(out.status.code(), Some(0));
}
