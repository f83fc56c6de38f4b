//! End-to-end behavior of the `rsf` binary: exit codes, config
//! overrides, and manifest/CSV consistency.

use std::process::Command;

fn rsf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsf"))
}

#[test]
fn rho_prints_quarter() {
    let out = rsf().args(["rho", "--a", "4", "--b", "2", "--out"]).arg(tmp()).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.25");
}

fn tmp() -> std::path::PathBuf {
    let dir = tempfile::tempdir().unwrap();
    dir.keep()
}

#[test]
fn usage_errors_exit_one() {
    let out = rsf().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = rsf().arg("rho").output().unwrap(); // missing --a/--b
    assert_eq!(out.status.code(), Some(1));
    let out = rsf().args(["overlap", "--a", "2", "--b", "2", "--delta", "banana"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "a = 4.0\nb = 2.0\n").unwrap();
    let out = rsf()
        .args(["rho", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.25");
    // Flag overrides the file value of b.
    let out = rsf()
        .args(["rho", "--config"])
        .arg(&cfg)
        .args(["--b", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0");
    // Unknown keys are configuration errors.
    std::fs::write(&cfg, "alpha = 4.0\n").unwrap();
    let out = rsf().args(["rho", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_hash_matches_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let status = rsf()
        .args(["overlap", "--a", "2", "--b", "2", "--delta", "2^-4..2^-6", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("overlap_manifest.json")).unwrap(),
    )
    .unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    let csv = std::fs::read_to_string(dir.path().join("overlap.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], "overlap");
        assert_eq!(cells[1], hash);
    }
}

#[test]
fn oracle_check_exits_zero_on_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let status = rsf()
        .args(["vinogradov", "--a", "2", "--b", "2", "--delta", "2^-8", "--oracle", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("vinogradov.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    // total == brute_total, oracle_ok == 1
    assert_eq!(row[4], row[7]);
    assert_eq!(row[8], "1");
}
