use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_superroots"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn tmp(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("superroots-cli-{}-{}", tag, std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn goldens_are_reproduced() {
    let o = run(&["build", "--family", "B", "--ranks", "1,1"]);
    assert!(o.status.success());
    assert_eq!(o.stdout, std::fs::read(golden("b11.rootsys.json")).unwrap());

    let o = run(&["chevalley", golden("b11.rootsys.json").to_str().unwrap()]);
    assert_eq!(o.stdout, std::fs::read(golden("b11.constants.json")).unwrap());

    let o = run(&["realize", "--kind", "osp-odd", "--I", "1", "--J", "1"]);
    assert_eq!(o.stdout, std::fs::read(golden("osp32.model.json")).unwrap());

    // the matrix model reproduces the seeded table byte for byte
    let o = run(&["extract", golden("osp32.model.json").to_str().unwrap()]);
    assert_eq!(o.stdout, std::fs::read(golden("b11.constants.json")).unwrap());
}

#[test]
fn golden_constants_pass_the_audit() {
    let v: Value = serde_json::from_slice(&std::fs::read(golden("b11.constants.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], "constants.v1");
    let o = run(&["audit", golden("b11.constants.json").to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["build", "--family", "Z", "--ranks", "1"]).status.code(), Some(2));
    assert_eq!(run(&["check", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let d = tmp("codes");
    let a11 = d.join("a11.json");
    std::fs::write(&a11, run(&["build", "--family", "A(l,l)", "--ranks", "1"]).stdout).unwrap();
    let o = run(&["chevalley", a11.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let b22 = d.join("b22.json");
    let d22 = d.join("d22.json");
    std::fs::write(&b22, run(&["build", "--family", "B", "--ranks", "2,2"]).stdout).unwrap();
    std::fs::write(&d22, run(&["build", "--family", "D", "--ranks", "2,2"]).stdout).unwrap();
    assert_eq!(run(&["compare", b22.to_str().unwrap(), d22.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["compare", b22.to_str().unwrap(), b22.to_str().unwrap()]).status.code(), Some(0));

    // a tampered constant is a violation
    let mut v: Value = serde_json::from_slice(&std::fs::read(golden("b11.constants.json")).unwrap()).unwrap();
    v["N"][0]["val"] = Value::String("7/1".into());
    let bad = d.join("bad.json");
    std::fs::write(&bad, serde_json::to_vec(&v).unwrap()).unwrap();
    assert_eq!(run(&["audit", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["compare", bad.to_str().unwrap(), golden("b11.constants.json").to_str().unwrap()]).status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn out_dir_and_quiet() {
    let d = tmp("out");
    let o = bin()
        .args(["-q", "build", "--family", "B", "--ranks", "1,1", "--out", "x.json"])
        .env("SUPERROOTS_OUT_DIR", &d)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(d.join("x.json")).unwrap(), std::fs::read(golden("b11.rootsys.json")).unwrap());
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn config_files_and_lambda() {
    let d = tmp("cfg");
    let cfg = d.join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "D", "ranks": [2, 1], "lambda": "2"}"#).unwrap();
    let o = run(&["build", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["descriptor"]["lambda"], "2/1");
    let flags = run(&["build", "--family", "D", "--ranks", "2,1", "--lambda", "2"]);
    assert_eq!(o.stdout, flags.stdout);
    assert_eq!(run(&["build", "--family", "B", "--ranks", "1,1", "--lambda", "2"]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn match_flag_transports_the_reference() {
    let d = tmp("match");
    let a = d.join("a23.json");
    let n = d.join("a23.n.json");
    let m = d.join("sl23.json");
    std::fs::write(&a, run(&["build", "--family", "A", "--ranks", "2,3"]).stdout).unwrap();
    std::fs::write(&n, run(&["chevalley", a.to_str().unwrap(), "--seeds", "3/2"]).stdout).unwrap();
    std::fs::write(&m, run(&["realize", "--kind", "sl", "--I", "1,2", "--J", "1,2,3"]).stdout).unwrap();
    let o = run(&["extract", m.to_str().unwrap(), "--match", n.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.stdout, std::fs::read(&n).unwrap());
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn model_check_reports() {
    let d = tmp("check");
    let m = d.join("osp24.json");
    std::fs::write(&m, run(&["realize", "--kind", "osp-even", "--I", "1", "--J", "1,2", "--with-algebra"]).stdout).unwrap();
    let o = run(&["check", m.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("even-part center dimension 1"), "{}", text);
    let _ = std::fs::remove_dir_all(&d);
}
