//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn orthoglide(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthoglide"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn ik_prints_all_three_legs() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(&["ik", "0.025", "0.05", "-0.10"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("leg A"), "{text}");
    assert!(text.contains("+0.032385023"), "{text}");
    assert!(text.contains("leg C"), "{text}");
}

#[test]
fn ik_outside_workspace_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(&["ik", "0", "0", "0.9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("workspace"), "{err}");
}

#[test]
fn simulate_writes_csv_with_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(
        &["simulate", "--samples", "51", "--out", "run.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(text.lines().count(), 52);
    assert!(text.starts_with("t,x,y,z,lamA,"));
}

#[test]
fn simulate_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = orthoglide(&["simulate", "--samples", "101", "--out", name], dir.path());
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn simulate_accepts_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("robot.cfg"), "l3 = 0.9\nm5 = 10\n").unwrap();
    let out = orthoglide(
        &[
            "simulate",
            "--config",
            "robot.cfg",
            "--samples",
            "11",
            "--out",
            "run.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plot_renders_six_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(
        &["simulate", "--samples", "41", "--out", "run.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = orthoglide(&["plot", "run.csv", "--out", "charts"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "plot_lamA.svg",
        "plot_lamB.svg",
        "plot_lamC.svg",
        "plot_pA.svg",
        "plot_pB.svg",
        "plot_pC.svg",
    ] {
        let path = dir.path().join("charts").join(name);
        let meta = std::fs::metadata(&path).unwrap_or_else(|_| panic!("{name} missing"));
        assert!(meta.len() > 0);
    }
}

#[test]
fn plot_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "not,a,simulation\n1,2,3\n").unwrap();
    let out = orthoglide(&["plot", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(&["verify", "--suite", "all"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("5 of 5 checks passed"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn verify_kin_suite_alone() {
    let dir = tempfile::tempdir().unwrap();
    let out = orthoglide(&["verify", "--suite", "kin"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("2 of 2 checks passed"));
}
