// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn penning(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_penning"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn verify_matches_golden() {
    let d = tmp();
    let o = penning(&["verify", "--lambda", "0.5,1,2"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("verify.txt"));
    assert_eq!(stdout(&o).matches("PASS").count(), 6);
}

#[test]
fn verify_rejects_bad_lambda_and_defaults() {
    let d = tmp();
    assert_eq!(
        penning(&["verify", "--lambda", "-1"], d.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        penning(&["verify", "--lambda", "0"], d.path())
            .status
            .code(),
        Some(2)
    );
    let o = penning(&["verify"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.contains("lambda=1 ")));
}

#[test]
fn loops_match_golden() {
    let d = tmp();
    let o = penning(&["loops", "--ratio", "3/2,9/4,33/8,2/1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("loops.txt"));
}

#[test]
fn non_trapping_ratios_flagged() {
    let d = tmp();
    for r in ["1/1", "7/5"] {
        let o = penning(&["loops", "--ratio", r], d.path());
        assert_eq!(o.status.code(), Some(4));
        assert!(stdout(&o).contains("trap regime"));
    }
}

#[test]
fn small_solve_is_deterministic() {
    let d = tmp();
    let o = penning(
        &[
            "solve",
            "--kind",
            "fourier3d",
            "--starts",
            "5",
            "--seed",
            "1",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("solve_fourier3d_5_1.csv"));
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.contains("/4 reference rows matched"), "{report}");
}

#[test]
fn scale_table_reproduced_with_manifest() {
    let d = tmp();
    let args = [
        "solve", "--kind", "scale3d", "--starts", "2000", "--seed", "42", "-o", "t3.csv",
    ];
    let o = penning(&args, d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("4/4 reference rows matched"),
        "{}",
        stdout(&o)
    );
    let first = std::fs::read(d.path().join("t3.csv")).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("t3.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["command"], "solve");

    std::fs::rename(d.path().join("t3.csv"), d.path().join("first.csv")).unwrap();
    let o = penning(&["replay", "t3.csv.manifest.json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(d.path().join("t3.csv")).unwrap(), first);
}

#[test]
fn map_golden_and_size() {
    let d = tmp();
    let o = penning(
        &[
            "map",
            "--alpha",
            "0:3:6",
            "--alpha0",
            "0.1:3:6",
            "--loop-constraint",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("map_6x6.csv"));

    let args = [
        "map",
        "--alpha",
        "0:3:200",
        "--alpha0",
        "0.1:3:200",
        "--loop-constraint",
        "-o",
        "m.csv",
    ];
    assert_eq!(penning(&args, d.path()).status.code(), Some(0));
    let first = std::fs::read_to_string(d.path().join("m.csv")).unwrap();
    assert_eq!(first.lines().count(), 40001);
    assert!(d.path().join("m.csv.manifest.json").exists());
    assert_eq!(penning(&args, d.path()).status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(d.path().join("m.csv")).unwrap(),
        first
    );
    // α = 0 rows come first
    assert!(first
        .lines()
        .skip(1)
        .take(200)
        .all(|l| l.starts_with("0,") && (l.contains(",Confined,") || l.contains(",Marginal,"))));
}

#[test]
fn map_usage_errors() {
    let d = tmp();
    assert_eq!(
        penning(
            &["map", "--alpha", "0:3", "--alpha0", "0.1:3:4", "--w", "1"],
            d.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        penning(
            &["map", "--alpha", "0:3:4", "--alpha0", "0.1:3:4"],
            d.path()
        )
        .status
        .code(),
        Some(2)
    );
    let o = penning(
        &[
            "map",
            "--alpha",
            "0:3:4",
            "--alpha0",
            "0.1:3:4",
            "--w",
            "1",
            "-o",
            "missing/dir/m.csv",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn phase_loop_golden() {
    let d = tmp();
    let o = penning(&["phase", "loop", "--state", "ground"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("phase_loop_ground.json"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["phi"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
    assert!(v["beta"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn phase_floquet_agreement_and_deconfined_exit() {
    let d = tmp();
    let o = penning(
        &[
            "phase",
            "floquet",
            "--n",
            "0,0,0",
            "--alpha",
            "0.2",
            "--alpha0",
            "0.75",
            "--loop-constraint",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["difference"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["sum"]["method"], "sum");
    assert_eq!(v["lz"]["method"], "lz");

    let o = penning(
        &[
            "phase",
            "floquet",
            "--alpha",
            "2",
            "--alpha0",
            "2",
            "--loop-constraint",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stderr).unwrap().contains("Deconfined"));
}
