use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcx_core::fuzz::{random_reduced_d0, random_twisted_target, rng, D0Spec};
use dcx_core::io::nil_to_json;
use dcx_core::linalg::Ring;
use dcx_core::nil::SplittingData;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dcx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcx")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String) {
    let out = dcx(args);
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).expect("utf-8"))
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, text) = run(&all);
    (code, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn moore_space_homology() {
    let (code, out) = run(&["homology", path(&data("moore2.json"))]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "H_0 = Z/2");
    let (_, out) = run(&["homology", path(&data("moore2.json")), "--ring", "Z/2"]);
    assert!(out.contains("H_0 = Z/2") && out.contains("H_1 = Z/2"), "{out}");
    let (_, out) = run(&["homology", path(&data("moore2.json")), "--ring", "Q"]);
    assert_eq!(out.trim(), "H_* = 0");
}

#[test]
fn jordan_block_has_degree_one() {
    let (code, out) = run(&["nilpotency", path(&data("d1-jordan.json")), "--max-n", "4"]);
    assert_eq!((code, out.trim()), (0, "degree 1"));
    let (code, _) = run(&["nilpotency", path(&data("d1-jordan.json")), "--max-n", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn kernel_drop_is_not_an_local() {
    for bound in ["inclusive", "strict"] {
        let (code, out) = run(&["an-local", path(&data("kernel-drop.json")), "--n", "2", "--bound", bound]);
        assert_eq!(code, 1);
        assert!(out.contains("failing m = 1") && out.contains("H_0 = Z"), "{out}");
    }
    let (code, v) = json(&["an-local", path(&data("kernel-drop.json")), "--n", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"]["failing_m"], 1);
    assert_eq!(v["verdict"]["bound"], "inclusive");
}

#[test]
fn json_reports_carry_the_verdict() {
    let cases: &[&[&str]] = &[
        &["homology", "moore2.json"],
        &["order", "moore2.json"],
        &["annihilator", "moore2.json"],
        &["q-acyclic", "moore2.json"],
        &["homotopy", "moore2.json"],
        &["cone", "twice.json"],
        &["verify", "twice.json"],
        &["classify", "kernel-drop.json"],
        &["bn-local", "kernel-drop.json"],
        &["nilpotency", "d1-jordan.json"],
    ];
    for case in cases {
        let file = data(case[1]);
        let (plain, _) = run(&[case[0], path(&file)]);
        let (code, v) = json(&[case[0], path(&file)]);
        assert_eq!(plain, code, "{case:?}");
        assert_eq!(v["exit"], code, "{case:?}");
        assert_eq!(v["holds"], code == 0, "{case:?}");
        assert_eq!(v["verb"], case[0]);
        // Parsing the report again gives the same document.
        let again: Value = serde_json::from_str(&v.to_string()).unwrap();
        assert_eq!(again, v);
    }
}

#[test]
fn torsion_verbs() {
    let moore = data("moore2.json");
    let (_, v) = json(&["order", path(&moore)]);
    assert_eq!(v["report"]["order"], "2");
    let (_, v) = json(&["annihilator", path(&moore)]);
    assert_eq!(v["report"]["exponent"], "2");
    assert_eq!(run(&["q-acyclic", path(&moore)]).0, 0);
    assert_eq!(run(&["homotopy", path(&moore)]).0, 1);
    assert_eq!(run(&["cone", path(&data("twice.json"))]).0, 1);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"ring": "Z", "ranks": {"0": 1, "1": 2}, "differentials": {"1": [[1, "x"]]}}"#).unwrap();
    let out = dcx(&["homology", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.differentials.1[0][1]"));

    assert_eq!(dcx(&["homology", "/no/such/file.json"]).status.code(), Some(2));
    let out = dcx(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(dcx(&["an-local", path(&data("kernel-drop.json")), "--bound", "loose"]).status.code(), Some(2));
    // A complex handed to a verb expecting a D0-complex.
    assert_eq!(dcx(&["bn-local", path(&data("moore2.json"))]).status.code(), Some(2));
}

#[test]
fn verify_reports_broken_structure() {
    let (code, out) = run(&["verify", path(&data("not-a-complex.json"))]);
    assert_eq!(code, 1);
    assert!(out.contains("∂∂ ≠ 0"), "{out}");
    assert_eq!(run(&["verify", path(&data("kernel-drop.json"))]).0, 0);
    assert_eq!(run(&["verify", path(&data("d1-jordan.json"))]).0, 0);
}

fn nil_document(dir: &Path, seed: u64, with_cycle: bool) -> PathBuf {
    let mut r = rng(seed);
    let top = 3;
    let a = random_reduced_d0(&mut r, &Ring::Integers, &D0Spec { acyclic_through: top, ..D0Spec::small(top) }).unwrap();
    let b = random_twisted_target(&mut r, &Ring::Integers, a.bimodule(), top, 0, 2, 2).unwrap();
    let d = SplittingData::derive(&a, &b).unwrap();
    let f = if with_cycle { d.delta_cycles(0).unwrap().into_iter().next() } else { None };
    let file = dir.join(format!("nil-{seed}.json"));
    std::fs::write(&file, serde_json::to_string(&nil_to_json(&a, &b, f.as_ref())).unwrap()).unwrap();
    file
}

#[test]
fn nil_calculus_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let plain = nil_document(dir.path(), 3, false);
    let (code, v) = json(&["tp-check", path(&plain), "--max-n", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["checked"].as_array().unwrap().len(), 2);
    assert_eq!(run(&["delta-check", path(&plain), "--seed", "9"]).0, 0);
    assert_eq!(run(&["verify", path(&plain)]).0, 0);
    // Nothing to invert.
    assert_eq!(run(&["invert", path(&plain)]).0, 2);

    let cyc = nil_document(dir.path(), 3, true);
    let (code, v) = json(&["invert", path(&cyc)]);
    assert_eq!(code, 0);
    assert_eq!(v["delta_cycle"], true);
}

#[test]
fn fuzz_is_deterministic() {
    let (code, a) = run(&["fuzz", "--seed", "5", "--n", "6"]);
    assert_eq!(code, 0, "{a}");
    let (_, b) = run(&["fuzz", "--seed", "5", "--n", "6"]);
    assert_eq!(a, b);
    assert_eq!(run(&["fuzz", "--n", "3", "--ring", "Q"]).0, 0);
}
