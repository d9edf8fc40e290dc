use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qcc() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcc"));
    cmd.env("QCC_THREADS", "1");
    cmd
}

fn run(args: &[&str]) -> Output {
    qcc().args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.trim_end().lines().count(),
        1,
        "single-line JSON expected: {text}"
    );
    serde_json::from_str(&text).unwrap()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn coherence_of_bell_and_diagonal_files() {
    let dir = tempfile::tempdir().unwrap();
    let bell = path(dir.path(), "bell.json");
    json_ok(&["gen", "bell", "phi+", "-o", s(&bell)]);
    let c = num(&json_ok(&["coherence", s(&bell)]), "c_l1");
    assert!((c - 1.0).abs() < 1e-12);

    let mixed = path(dir.path(), "mixed.json");
    json_ok(&["gen", "werner", "--p", "0", "-o", s(&mixed)]);
    assert!(num(&json_ok(&["coherence", s(&mixed)]), "c_l1").abs() < 1e-15);
}

#[test]
fn malformed_dims_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(
        &bad,
        r#"{"dims_a":[2],"dims_b":[3],"re":[[1.0]],"im":[[0.0]]}"#,
    )
    .unwrap();
    let out = run(&["coherence", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("6x6"));
}

#[test]
fn non_density_input_exit_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(
        &bad,
        r#"{"dims_a":[1],"dims_b":[2],"re":[[0.5,0.0],[0.0,0.7]],"im":[[0.0,0.0],[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = run(&["coherence", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));
}

#[test]
fn cc_modes() {
    let dir = tempfile::tempdir().unwrap();
    let bell = path(dir.path(), "bell.json");
    json_ok(&["gen", "bell", "phi+", "-o", s(&bell)]);
    let v = num(
        &json_ok(&["cc", s(&bell), "--mode", "min", "--seed", "1"]),
        "value",
    );
    assert!((v - 1.0).abs() < 1e-3);

    let ccs = path(dir.path(), "cc.json");
    json_ok(&["gen", "cc-state", "--seed", "9", "-o", s(&ccs)]);
    assert!(num(&json_ok(&["cc", s(&ccs), "--seed", "1"]), "value").abs() < 1e-7);

    let generic = path(dir.path(), "generic.json");
    json_ok(&["gen", "random-mixed", "--seed", "4", "-o", s(&generic)]);
    let fixed = num(&json_ok(&["cc", s(&generic), "--mode", "fixed"]), "value");
    let min = num(
        &json_ok(&["cc", s(&generic), "--mode", "min", "--seed", "2"]),
        "value",
    );
    assert!((fixed - min).abs() <= 1e-6);
}

#[test]
fn discord_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cq = path(dir.path(), "cq.json");
    json_ok(&["gen", "cq-state", "--seed", "3", "-o", s(&cq)]);
    assert_eq!(json_ok(&["discord", s(&cq), "--asym", "a"])["zero"], true);
    assert_eq!(json_ok(&["discord", s(&cq), "--sym"])["zero"], false);

    let bell = path(dir.path(), "bell.json");
    json_ok(&["gen", "bell", "psi-", "-o", s(&bell)]);
    assert_eq!(json_ok(&["discord", s(&bell), "--sym"])["zero"], false);
    assert_eq!(
        json_ok(&["discord", s(&bell), "--asym", "b"])["zero"],
        false
    );

    assert_eq!(run(&["discord", s(&bell)]).status.code(), Some(2));
}

#[test]
fn eoc_on_separable_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (st, dec, ext) = (
        path(dir.path(), "s.json"),
        path(dir.path(), "d.json"),
        path(dir.path(), "e.json"),
    );
    json_ok(&[
        "gen",
        "separable",
        "--seed",
        "12",
        "--decomposition-out",
        s(&dec),
        "-o",
        s(&st),
    ]);
    let r = json_ok(&[
        "eoc",
        s(&st),
        "--decomposition",
        s(&dec),
        "--seed",
        "0",
        "--extension-out",
        s(&ext),
    ]);
    assert!(num(&r, "value") <= 1e-3);
    assert!(num(&r, "symmetry_residual") <= 1e-4);
    assert!(num(&r, "marginal_residual") <= 1e-8);
    assert_eq!(
        json_ok(&["check-extension", s(&ext), "--marginal", s(&st)])["is_extension"],
        true
    );
}

#[test]
fn eoc_on_pure_product_without_ancilla() {
    let dir = tempfile::tempdir().unwrap();
    let prod = path(dir.path(), "prod.json");
    std::fs::write(&prod, r#"{"dims_a":[2],"dims_b":[2],"re":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#).unwrap();
    let r = json_ok(&[
        "eoc",
        s(&prod),
        "--ancilla",
        "1",
        "1",
        "--seed",
        "0",
        "--restarts",
        "2",
    ]);
    assert!(num(&r, "value").abs() <= 1e-12);
}

#[test]
fn eoc_gate_failure_exit_3() {
    // A budget of one iteration and a tiny penalty cannot reach the symmetry gate on a generic state.
    let dir = tempfile::tempdir().unwrap();
    let m = path(dir.path(), "m.json");
    json_ok(&[
        "gen",
        "random-mixed",
        "--da",
        "2",
        "--db",
        "3",
        "--rank",
        "3",
        "--seed",
        "5",
        "-o",
        s(&m),
    ]);
    let out = run(&[
        "eoc",
        s(&m),
        "--seed",
        "0",
        "--restarts",
        "1",
        "--max-iters",
        "1",
        "--mu",
        "1e-9",
        "--ancilla",
        "3",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn check_extension_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (st, wit, other) = (
        path(dir.path(), "s.json"),
        path(dir.path(), "w.json"),
        path(dir.path(), "o.json"),
    );
    json_ok(&[
        "gen",
        "separable",
        "--seed",
        "21",
        "--witness-out",
        s(&wit),
        "-o",
        s(&st),
    ]);
    json_ok(&["gen", "random-mixed", "--seed", "22", "-o", s(&other)]);
    let ok = json_ok(&[
        "check-extension",
        s(&wit),
        "--marginal",
        s(&st),
        "--seed",
        "0",
    ]);
    assert_eq!(ok["is_extension"], true);
    assert!(num(&ok, "symmetry_residual") <= 1e-6);
    let wrong = json_ok(&[
        "check-extension",
        s(&wit),
        "--marginal",
        s(&other),
        "--seed",
        "0",
    ]);
    assert_eq!(wrong["is_extension"], false);
    assert!(num(&wrong, "marginal_residual") > 1e-3);
}

#[test]
fn strict_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "f.json");
    assert_eq!(
        run(&["--strict", "gen", "random-pure", "-o", s(&f)])
            .status
            .code(),
        Some(2)
    );
    json_ok(&["--strict", "gen", "bell", "-o", s(&f)]);
    assert_eq!(run(&["--strict", "eoc", s(&f)]).status.code(), Some(2));
    json_ok(&["--strict", "gen", "random-pure", "--seed", "1", "-o", s(&f)]);
}

#[test]
fn gen_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "f.json");
    json_ok(&[
        "gen",
        "random-mixed",
        "--da",
        "2",
        "--db",
        "3",
        "--seed",
        "8",
        "-o",
        s(&f),
    ]);
    let out = run(&[
        "gen",
        "random-mixed",
        "--da",
        "2",
        "--db",
        "3",
        "--seed",
        "8",
    ]);
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(&f).unwrap());
}

#[test]
fn bad_thread_count_exit_2() {
    let out = qcc()
        .env("QCC_THREADS", "zero")
        .args(["gen", "bell"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
