//! End-to-end tests of the `sdiq` binary: file round trips, exit codes,
//! anchor values through the subcommand surface, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

use sdiq::boxes::MeasurementFamily;
use sdiq::json as sj;
use sdiq::states;

fn sdiq_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdiq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// `|0⟩⟨0|` then `|+⟩⟨+|` on each side, written to `dir/meas.json`.
fn write_z_x_measurements(dir: &Path) -> String {
    let fam =
        MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
    let path = dir.join("meas.json");
    std::fs::write(
        &path,
        serde_json::to_string(&sj::measurement_to_json(&fam)).unwrap(),
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn state_command_round_trips_the_werner_family() {
    let out = sdiq_bin(&["state", "werner", "--p", "0.5"]);
    let parsed: sj::StateJson = serde_json::from_slice(&out.stdout).unwrap();
    let rho = sj::state_from_json(&parsed).unwrap();
    let expected = states::werner(0.5).unwrap();
    let diff = (rho.matrix() - expected.matrix()).norm();
    assert!(out.status.success());
    assert!(diff < 1e-11, "round-trip drift {diff}");
}

#[test]
fn q_witness_anchor_reproduces_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let meas = write_z_x_measurements(dir.path());
    let state = dir.path().join("g.json").to_str().unwrap().to_owned();
    assert!(sdiq_bin(&["state", "giorgi", "--out", &state]).status.success());

    let out = sdiq_bin(&[
        "witness", "--what", "q", "--state", &state, "--alice", &meas, "--bob", &meas,
    ]);
    let record = stdout_json(&out);
    let value = record["value"].as_f64().unwrap();
    assert!((value - 0.0381).abs() < 5e-4, "Q = {value}");

    // The same number through an intermediate box file.
    let bx = dir.path().join("box.json").to_str().unwrap().to_owned();
    assert!(sdiq_bin(&[
        "box", "--state", &state, "--alice", &meas, "--bob", &meas, "--out", &bx,
    ])
    .status
    .success());
    let via_box = stdout_json(&sdiq_bin(&["witness", "--what", "q", "--box", &bx]));
    assert_eq!(via_box["value"], record["value"]);
}

#[test]
fn optimized_gamma_matches_the_bell_diagonal_value() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("w.json").to_str().unwrap().to_owned();
    assert!(sdiq_bin(&["state", "werner", "--p", "0.8", "--out", &state]).status.success());
    let out = stdout_json(&sdiq_bin(&[
        "witness", "--what", "gamma", "--state", &state, "--optimize", "--restarts", "24",
    ]));
    let value = out["value"].as_f64().unwrap();
    assert!((value - 1.6).abs() < 1e-6, "Γ = {value}");
    assert!(out["alice"]["effects"].is_array());
}

#[test]
fn unknown_builder_exits_with_usage_code() {
    let out = sdiq_bin(&["state", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_violations_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dimA":2,"dimB":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#,
    )
    .unwrap();
    let out = sdiq_bin(&["info", "--state", path.to_str().unwrap(), "--what", "rank"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn fit_converges_on_a_local_box_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let meas = write_z_x_measurements(dir.path());
    let state = dir.path().join("w.json").to_str().unwrap().to_owned();
    let bx = dir.path().join("box.json").to_str().unwrap().to_owned();
    assert!(sdiq_bin(&["state", "werner", "--p", "0.3", "--out", &state]).status.success());
    assert!(sdiq_bin(&[
        "box", "--state", &state, "--alice", &meas, "--bob", &meas, "--out", &bx,
    ])
    .status
    .success());

    let args = [
        "fit", "--box", bx.as_str(), "--model", "lhv", "--dlambda", "4", "--restarts", "8",
    ];
    let first = sdiq_bin(&args);
    let second = sdiq_bin(&args);
    assert_eq!(first.stdout, second.stdout);
    let record = stdout_json(&first);
    assert!(record["converged"].as_bool().unwrap());
    assert!(record["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(record["model"]["kind"], "lhv");
}

#[test]
fn classify_places_the_reference_states() {
    let dir = tempfile::tempdir().unwrap();
    for (builder, label) in [
        ("trine-qc", "QC"),
        ("cc-half-half", "CC"),
        ("phi-plus", "entangled"),
        ("giorgi", "superseparable"),
    ] {
        let state = dir.path().join(format!("{builder}.json"));
        let state = state.to_str().unwrap().to_owned();
        assert!(sdiq_bin(&["state", builder, "--out", &state]).status.success());
        let record = stdout_json(&sdiq_bin(&["classify", "--state", &state]));
        assert_eq!(record["class"], label, "builder {builder}");
    }
}

#[test]
fn repro_reports_the_three_pinned_failures_and_exits_nonzero() {
    let out = sdiq_bin(&["repro", "--json", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 26);
    let failing: Vec<&str> = rows
        .iter()
        .filter(|r| !r["pass"].as_bool().unwrap())
        .map(|r| r["id"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["3", "4b", "7"]);
}
