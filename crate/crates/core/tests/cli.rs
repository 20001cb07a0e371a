use std::path::Path;
use std::process::{Command, Output};

use specdesign::cli::{Artifacts, ARTIFACT_FILES, EXIT_DEGENERATE, EXIT_INPUT, EXIT_PASS, EXIT_VERIFICATION};
use specdesign::expalg::ExpPoly;
use specdesign::linalg;
use specdesign::matfun::{RatMatFun, VecFun};
use specdesign::model::{ChainEntry, TransformationSet};
use specdesign::scenarios::{ScenarioConfig, ScenarioId};
use specdesign::C64;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specdesign")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn build(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["build", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn build_then_verify_passes_and_is_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s53");
    assert_eq!(code(&build(&dir, &["--scenario", "s53", "--seed", "5"])), EXIT_PASS);
    for f in ARTIFACT_FILES {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let a = Artifacts::read(&dir).unwrap();
    for (name, body) in a.files() {
        assert_eq!(std::fs::read_to_string(dir.join(name)).unwrap(), body, "{name}");
    }
    let v = run(&["verify", dir.to_str().unwrap()]);
    assert_eq!(code(&v), EXIT_PASS);
    assert_eq!(v.stdout, std::fs::read(dir.join("report.json")).unwrap());
}

#[test]
fn seed_controls_the_draw() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    build(&a, &["--scenario", "s52", "--seed", "3"]);
    build(&b, &["--scenario", "s52", "--seed", "3"]);
    build(&c, &["--scenario", "s52", "--seed", "4"]);
    let read = |d: &Path| std::fs::read(d.join("config.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn edited_artifact_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    assert_eq!(code(&build(&dir, &["--scenario", "s52", "--seed", "1"])), EXIT_PASS);
    let mut a = Artifacts::read(&dir).unwrap();
    let bump = linalg::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1e-6, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ]);
    a.v_minus = a.v_minus.add(&RatMatFun::from_const(&bump));
    a.write(&dir).unwrap();
    let v = run(&["verify", dir.to_str().unwrap()]);
    assert_eq!(code(&v), EXIT_VERIFICATION);
    assert!(String::from_utf8_lossy(&v.stderr).contains("intertwining"));
}

#[test]
fn malformed_input_exits_with_input_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{\"scenario\": \"s52\", ").unwrap();
    let o = build(&tmp.path().join("out"), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_INPUT);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(code(&run(&["build", "--scenario", "s99"])), EXIT_INPUT);
    assert_eq!(code(&run(&["verify", tmp.path().join("missing").to_str().unwrap()])), EXIT_INPUT);
    let equal = build(&tmp.path().join("eq"), &["--scenario", "s51-case1", "--k1", "1", "--k2", "1"]);
    assert_eq!(code(&equal), EXIT_INPUT);
}

#[test]
fn vanishing_wronskian_exits_with_degenerate_code() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--scenario", "s52", "--k", "1"];
    for name in ["C2=0", "C3=0", "C4=0", "C5=0", "C6=0", "C7=0", "C8=0"] {
        args.extend_from_slice(&["--const", name]);
    }
    assert_eq!(code(&build(&tmp.path().join("out"), &args)), EXIT_DEGENERATE);
}

#[test]
fn invert_flags_the_pole_example() {
    let tmp = tempfile::tempdir().unwrap();
    let k = C64::new(1.0, 0.0);
    let set = TransformationSet::new(
        1,
        vec![ChainEntry { phi: VecFun::new(vec![ExpPoly::term(C64::new(1.0, 0.0), 1, k)]), lambda: k * k, sigma: 0 }],
    )
    .unwrap();
    let cfg = ScenarioConfig { set: Some(set), ..ScenarioConfig::new(ScenarioId::Custom) };
    let path = tmp.path().join("pole.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["invert", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_DEGENERATE);
    let body: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(body["wronskian_check"]["verdict"], "fail");
}

#[test]
fn invert_recovers_zero_potential() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("s53.json");
    let cfg = specdesign::scenarios::random_config(ScenarioId::S53, 2).unwrap();
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["invert", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS);
    let body: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r: RatMatFun = serde_json::from_value(body["potential"].clone()).unwrap();
    assert!(r.is_zero());
}

#[test]
fn export_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    build(&dir, &["--scenario", "s51-case1", "--k1", "1", "--k2", "2", "--x0", "0.7"]);
    let o = run(&["export", dir.to_str().unwrap(), "v_minus", "--grid", "-1:1:5"]);
    assert_eq!(code(&o), EXIT_PASS);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("x,"));
}

#[test]
fn reproduce_reports_every_check() {
    let o = run(&["reproduce", "s52", "--seed", "2"]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
