//! End-to-end checks of the command-line surface against the shipped
//! fixtures: values, determinism and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcap"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn workspace_root() -> PathBuf {
    // crates/qcap-cli -> workspace root
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = qcap(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn fidelity_on_pinch_fixture() {
    let v = stdout_json(&[
        "--restarts",
        "64",
        "--samples",
        "20000",
        "fidelity",
        "fixtures/pinch_2.json",
    ]);
    assert_eq!(v["schema"], 1);
    let fc = v["channel_fidelity"].as_f64().unwrap();
    assert!((fc - 0.5).abs() < 1e-12);
    let minf = v["min_fidelity"]["value"].as_f64().unwrap();
    assert!((minf - 0.5).abs() < 1e-9);
    // the pretty report carries the channel-fidelity line
    let out = qcap(&["--pretty", "--restarts", "16", "--samples", "1000", "fidelity", "fixtures/pinch_2.json"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("F_c"));
    assert!(text.contains("0.500000"));
}

#[test]
fn fidelity_on_identity_fixture_is_all_ones() {
    let v = stdout_json(&[
        "--restarts",
        "16",
        "--samples",
        "2000",
        "fidelity",
        "fixtures/identity_2.json",
    ]);
    for key in ["channel_fidelity", "average_fidelity_closed"] {
        assert!((v[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
    }
    assert!((v["average_fidelity_mc"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["min_fidelity"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["inf_entanglement_fidelity"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn fidelity_on_fully_depolarizing_fixture() {
    let v = stdout_json(&[
        "--restarts",
        "16",
        "--samples",
        "2000",
        "fidelity",
        "fixtures/depolarizing_2_p100.json",
    ]);
    assert!((v["channel_fidelity"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn ideal_capacity_output() {
    let out = qcap(&["--pretty", "ideal", "4", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("2.0000"), "missing capacity line: {text}");
    let v = stdout_json(&["ideal", "2", "4"]);
    assert!((v["capacity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["delta_lower_forward"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["delta_lower_reverse"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_reports_are_byte_identical_given_seed() {
    let args = ["--seed", "7", "--restarts", "8", "--samples", "500", "verify", "norms"];
    let a = qcap(&args);
    let b = qcap(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "verify output must be deterministic");
    assert!(!a.stdout.is_empty());
}

#[test]
fn bounds_on_fully_depolarizing_qubit() {
    let v = stdout_json(&[
        "--restarts",
        "64",
        "bounds",
        "fixtures/depolarizing_2_p100.json",
    ]);
    let q = v["partial_transposition"]["value"].as_f64().unwrap();
    assert!(q.abs() <= 2e-3, "Q_Θ = {q}");
    // fully depolarizing: max I_c ≤ 0
    assert!(v["max_coherent_information"]["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn chain_on_pinch_fixture_passes_links() {
    let v = stdout_json(&["--restarts", "32", "chain", "fixtures/pinch_2.json"]);
    assert_eq!(v["all_pass"], true);
    assert!((v["one_minus_inf_fe"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn sequences_fixtures_run() {
    let v = stdout_json(&["sequences", "fixtures/sequences_extend_poly.json"]);
    assert_eq!(v["task"], "extend");
    assert!(v["result"]["all_certified_from"].as_u64().unwrap() <= 64);
    let v = stdout_json(&["sequences", "fixtures/sequences_counterexample.json"]);
    assert_eq!(v["task"], "counterexample");
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row["delta"].as_f64().unwrap() >= 0.49);
    }
}

#[test]
fn exit_codes_for_bad_inputs() {
    // malformed JSON → 2
    let out = qcap(&["fidelity", "Cargo.toml"]);
    assert_eq!(out.status.code(), Some(2));
    // missing file → 2
    let out = qcap(&["fidelity", "no_such_file.json"]);
    assert_eq!(out.status.code(), Some(2));
    // contract violation (non-trace-preserving kraus) → 3
    let bad = workspace_root().join("target/bad_channel_test.json");
    std::fs::write(
        &bad,
        r#"{"dim_in":2,"dim_out":2,"kraus":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]]]}"#,
    )
    .unwrap();
    let out = qcap(&["fidelity", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    // unknown verify suite → contract error, not a crash
    let out = qcap(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(3));
}
