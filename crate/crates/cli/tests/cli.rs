//! End-to-end tests of the `wold` binary: JSON reports, exit codes, DOT
//! emission, determinism, and reorder invariance.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wold")
}

fn repo_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn test_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn report(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        )
    })
}

#[test]
fn classify_single_unitary() {
    let out = run(&["classify", repo_fixture("single_unitary.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["results"]["algebra"]["rendered"], "(C·1 ⊗ C(T))");
    assert_eq!(r["results"]["g_graph"]["vertices"], 1);
    assert_eq!(r["results"]["g_graph"]["edges"], 1);
}

#[test]
fn classify_toeplitz_pair_collapses() {
    let out = run(&["classify", repo_fixture("toeplitz_pair.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["results"]["algebra"]["rendered"], "(C·1 ⊗ T)");
    assert_eq!(r["results"]["pi_components"], serde_json::json!([["a", "b"]]));
}

#[test]
fn classify_shift_and_block_family() {
    let out = run(&["classify", repo_fixture("shift_and_block.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["results"]["algebra"]["rendered"], "(C·1 ⊗ cl(T *alg (C·1 ⊗ M2)))");
}

#[test]
fn classify_results_invariant_under_reordering() {
    let a = report(&run(&["classify", repo_fixture("toeplitz_pair.toml").to_str().unwrap()]));
    let b = report(&run(&[
        "classify",
        test_fixture("toeplitz_pair_reordered.toml").to_str().unwrap(),
    ]));
    assert_eq!(a["results"], b["results"]);
    // The digest tracks the input bytes, so it may differ.
    assert_ne!(a["inputs_digest"], b["inputs_digest"]);
}

#[test]
fn classify_rejects_asymmetric_pi() {
    let out = run(&["classify", test_fixture("bad_pi.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "violations");
    let listed = r["results"]["pi_violations"].as_array().unwrap();
    assert_eq!(listed.len(), 1);
    assert!(listed[0].as_str().unwrap().contains("pi(u, s)"));
}

#[test]
fn classify_rejects_mixed_generator() {
    let out = run(&["classify", repo_fixture("wold_example.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("separate generators"), "stderr: {err}");
}

#[test]
fn groupoid_counts() {
    let out = run(&[
        "groupoid",
        repo_fixture("one_edge.toml").to_str().unwrap(),
        "--max-len",
        "3",
    ]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["results"]["element_count"], 5);

    let out = run(&[
        "groupoid",
        test_fixture("path2.toml").to_str().unwrap(),
        "--max-len",
        "4",
    ]);
    assert_eq!(report(&out)["results"]["element_count"], 10);

    // Loop graph at max_len 3: 0, the vertex, and u^{±1..±3}.
    let out = run(&[
        "groupoid",
        repo_fixture("single_unitary.toml").to_str().unwrap(),
        "--max-len",
        "3",
    ]);
    assert_eq!(report(&out)["results"]["element_count"], 8);
}

#[test]
fn groupoid_emits_dot() {
    let dir = std::env::temp_dir().join(format!("wold-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("loop_tail.toml");
    std::fs::copy(repo_fixture("loop_tail.toml"), &input).unwrap();
    let out = run(&["groupoid", input.to_str().unwrap(), "--max-len", "2", "--emit-dot"]);
    assert!(out.status.success());
    let dot = std::fs::read_to_string(dir.join("loop_tail.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("label=\"u\""));
    // Shadow edges only on request.
    assert!(!dot.contains("style=dashed"));
    let out = run(&["groupoid", input.to_str().unwrap(), "--max-len", "2", "--dot-shadow"]);
    assert!(out.status.success());
    let dot = std::fs::read_to_string(dir.join("loop_tail.dot")).unwrap();
    assert!(dot.contains("style=dashed"));
    assert!(dot.contains("s^-1"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cayley_scalar_dimension() {
    let out = run(&["cayley", "--dim", "1", "--seed", "0"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert!(r["residuals"]["scalar_zero_case"].as_f64().unwrap() <= 1e-14);
}

#[test]
fn verify_accepts_structured_families() {
    for fixture in ["shift_and_block.toml", "wold_example.toml"] {
        let out = run(&["verify", repo_fixture(fixture).to_str().unwrap()]);
        assert!(out.status.success(), "fixture {fixture}");
        let r = report(&out);
        assert_eq!(r["status"], "ok");
        assert_eq!(r["results"]["pi_mismatches"], serde_json::json!([]));
    }
}

#[test]
fn verify_flags_corrupted_pi_entry() {
    let out = run(&["verify", test_fixture("corrupt_pi_numeric.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "mismatch");
    let mismatches = r["results"]["pi_mismatches"].as_array().unwrap();
    assert!(mismatches.iter().any(|m| m["pair"] == "pi(V, V)"));
}

#[test]
fn verify_names_identity_failure() {
    let out = run(&["verify", test_fixture("not_partial_isometry.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let checks = r["results"]["checks"].as_array().unwrap();
    let identity = checks
        .iter()
        .find(|c| c["check"] == "partial_isometry")
        .expect("identity check present");
    assert_eq!(identity["ok"], false);
    assert!(identity["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn cayley_is_deterministic() {
    let a = run(&["cayley", "--dim", "8", "--seed", "5"]);
    let b = run(&["cayley", "--dim", "8", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["status"], "ok");
    assert!(r["residuals"]["roundtrip_max"].as_f64().unwrap() <= 1e-8);
    let c = run(&["cayley", "--dim", "8", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn missing_file_exits_with_error() {
    let out = run(&["classify", "/nonexistent/family.toml"]);
    assert_eq!(out.status.code(), Some(2));
}
