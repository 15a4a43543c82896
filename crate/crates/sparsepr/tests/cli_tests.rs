//! End-to-end tests of the `sparsepr` binary: pipelines, exit codes and
//! determinism.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsepr"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn sparsepr");
    child
        .stdin
        .as_mut()
        .expect("stdin")
        .write_all(stdin.as_bytes())
        .expect("write stdin");
    child.wait_with_output().expect("wait")
}

fn run_ok(args: &[&str]) -> String {
    let output = bin().args(args).output().expect("run sparsepr");
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf8")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("write fixture");
    path.to_string_lossy().into_owned()
}

#[test]
fn bekir_pipeline_is_ambiguous() {
    let tmp = tempfile::tempdir().unwrap();
    let signal = run_ok(&["gen", "--dim", "1", "--n", "6", "--bekir", "1,6"]);
    let signal_path = write_file(tmp.path(), "signal.json", &signal);
    let acf = run_ok(&["acf", &signal_path]);
    let acf_path = write_file(tmp.path(), "acf.json", &acf);
    let verdict = run_ok(&["solve1d", &acf_path]);
    let parsed: serde_json::Value = serde_json::from_str(&verdict).unwrap();
    assert_eq!(parsed["verdict"], "ambiguous");
    assert_eq!(parsed["signals"].as_array().unwrap().len(), 2);
}

#[test]
fn gen_acf_recover_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let signal = run_ok(&[
        "gen", "--dim", "2", "--n", "4", "--collision-free", "--seed", "7",
    ]);
    let signal_path = write_file(tmp.path(), "signal.json", &signal);
    let acf = run_ok(&["acf", &signal_path]);
    let acf_path = write_file(tmp.path(), "acf.json", &acf);
    let verdict = run_ok(&["recover", &acf_path, "--seed", "7"]);
    let parsed: serde_json::Value = serde_json::from_str(&verdict).unwrap();
    assert_eq!(parsed["verdict"], "unique");

    // The recovered signal reproduces the same ACF.
    let recovered = serde_json::to_string(&parsed["signals"][0]).unwrap();
    let recovered_path = write_file(tmp.path(), "recovered.json", &recovered);
    let acf_again = run_ok(&["acf", &recovered_path]);
    assert_eq!(acf, acf_again);
}

#[test]
fn collisions_are_not_covered() {
    let signal = r#"{"dim":1,"scalar":"exact","spikes":[
        {"pos":["0"],"coef":"1"},{"pos":["1"],"coef":"2"},
        {"pos":["2"],"coef":"1"},{"pos":["4"],"coef":"3"}]}"#;
    let acf = run_with_stdin(&["acf"], signal);
    assert!(acf.status.success());
    let verdict = run_with_stdin(&["solve1d"], &String::from_utf8(acf.stdout).unwrap());
    assert!(verdict.status.success(), "verdicts are data, not errors");
    let parsed: serde_json::Value =
        serde_json::from_slice(&verdict.stdout).expect("verdict JSON");
    assert_eq!(parsed["verdict"], "not_covered");
    assert_eq!(parsed["reason"], "collisions");
}

#[test]
fn malformed_json_exits_two() {
    let output = run_with_stdin(&["solve1d"], "this is not json");
    assert_eq!(output.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&output.stderr).is_empty());
}

#[test]
fn unreadable_file_exits_two() {
    let output = bin()
        .args(["acf", "/nonexistent/path.json"])
        .output()
        .expect("run");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn inconsistent_acf_exits_one() {
    // Structurally valid ACF (triangular lag count) whose coefficients fit
    // no rank-one completion: solver failure, not bad input.
    let acf = r#"{"dim":1,"deltas":[
        {"lag":["-3"],"coef":"1"},{"lag":["-2"],"coef":"1"},{"lag":["-1"],"coef":"1"},
        {"lag":["0"],"coef":"100"},
        {"lag":["1"],"coef":"1"},{"lag":["2"],"coef":"1"},{"lag":["3"],"coef":"1"}],
        "half":false}"#;
    let output = run_with_stdin(&["solve1d"], acf);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for _ in 0..2 {
        let a = run_ok(&["gen", "--dim", "2", "--n", "5", "--seed", "42"]);
        let b = run_ok(&["gen", "--dim", "2", "--n", "5", "--seed", "42"]);
        assert_eq!(a, b);
    }
    let tmp = tempfile::tempdir().unwrap();
    let signal = run_ok(&["gen", "--dim", "2", "--n", "3", "--collision-free", "--seed", "1"]);
    let signal_path = write_file(tmp.path(), "signal.json", &signal);
    let acf = run_ok(&["acf", &signal_path]);
    let acf_path = write_file(tmp.path(), "acf.json", &acf);
    let r1 = run_ok(&["recover", &acf_path, "--seed", "2"]);
    let r2 = run_ok(&["recover", &acf_path, "--seed", "2"]);
    assert_eq!(r1, r2);
}

#[test]
fn bare_diff_list_is_accepted() {
    let verdict = run_with_stdin(&["solve1d"], "[\"1\",\"2\",\"3\"]");
    assert!(verdict.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&verdict.stdout).unwrap();
    assert_eq!(parsed["verdict"], "unique");
    let spikes = parsed["signals"][0]["spikes"].as_array().unwrap();
    let positions: Vec<&str> = spikes
        .iter()
        .map(|s| s["pos"][0].as_str().unwrap())
        .collect();
    assert_eq!(positions, vec!["0", "1", "3"]);
}

#[test]
fn classify_reports_visibility_for_planar_acfs() {
    let tmp = tempfile::tempdir().unwrap();
    // Collinear points: visibility must fail, and the equal-spacing
    // collisions make the verdict not_covered.
    let signal = r#"{"dim":2,"scalar":"exact","spikes":[
        {"pos":["0","0"],"coef":"1"},{"pos":["1","1"],"coef":"2"},
        {"pos":["2","2"],"coef":"3"}]}"#;
    let signal_path = write_file(tmp.path(), "line.json", signal);
    let acf = run_ok(&["acf", &signal_path]);
    let acf_path = write_file(tmp.path(), "line_acf.json", &acf);
    let report = run_ok(&["classify", &acf_path]);
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["collision"]["has_collisions"], true);
    assert_eq!(parsed["visibility"]["all_visible"], false);
    assert_eq!(parsed["verdict"]["verdict"], "not_covered");
}

#[test]
fn eps_env_variable_is_honored() {
    // A diff list with a 1e-6 mismatch: default eps rejects it as
    // irregular (no solution), a loose eps accepts it.
    let diffs = "[1.000001, 2.0, 3.0]";
    let strict = run_with_stdin(&["solve1d"], diffs);
    assert_eq!(strict.status.code(), Some(1), "no support at eps 1e-9");

    let mut loose_cmd = bin();
    loose_cmd.args(["solve1d"]).env("SPARSEPR_EPS", "1e-4");
    let mut child = loose_cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(diffs.as_bytes()).unwrap();
    let loose = child.wait_with_output().unwrap();
    assert!(loose.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert_eq!(parsed["verdict"], "unique");
}

#[test]
fn ingest_magnitude_extracts_the_acf() {
    let tmp = tempfile::tempdir().unwrap();
    // |DFT|^2 of delta_0 + 2 delta_1 on 8 points: 5 + 4 cos(2 pi u / 8).
    let values: Vec<f64> = (0..8)
        .map(|u| 5.0 + 4.0 * (std::f64::consts::TAU * u as f64 / 8.0).cos())
        .collect();
    let grid = serde_json::json!({"dims": [8], "values": values}).to_string();
    let grid_path = write_file(tmp.path(), "grid.json", &grid);
    let acf = run_ok(&["ingest", "magnitude", &grid_path]);
    let parsed: serde_json::Value = serde_json::from_str(&acf).unwrap();
    let deltas = parsed["deltas"].as_array().unwrap();
    assert_eq!(deltas.len(), 3);
    assert_eq!(deltas[1]["lag"][0], 0.0);
    assert!((deltas[1]["coef"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!((deltas[2]["coef"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    // Piped onward, the verdict is unique.
    let verdict = run_with_stdin(&["solve1d"], &acf);
    assert!(verdict.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&verdict.stdout).unwrap();
    assert_eq!(parsed["verdict"], "unique");
}

#[test]
fn oracle_sweep_reports_pass() {
    let report = run_ok(&["oracle", "sweep", "--n", "3", "--bound", "7"]);
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["pass"], true);
    assert_eq!(parsed["disagreements"].as_array().unwrap().len(), 0);
}

#[test]
fn half_support_documents_are_accepted() {
    // Half-support form of the ACF of {0,1,3} with coefficients (1,2,3).
    let half = r#"{"dim":1,"deltas":[
        {"lag":["0"],"coef":"14"},
        {"lag":["1"],"coef":"2"},{"lag":["2"],"coef":"6"},{"lag":["3"],"coef":"3"}],
        "half":true}"#;
    let verdict = run_with_stdin(&["solve1d"], half);
    assert!(verdict.status.success(), "{}", String::from_utf8_lossy(&verdict.stderr));
    let parsed: serde_json::Value = serde_json::from_slice(&verdict.stdout).unwrap();
    assert_eq!(parsed["verdict"], "unique");
    let coefs: Vec<&str> = parsed["signals"][0]["spikes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["coef"].as_str().unwrap())
        .collect();
    assert_eq!(coefs, vec!["1", "2", "3"]);

    // A half form missing its zero lag is malformed input.
    let broken = r#"{"dim":1,"deltas":[{"lag":["1"],"coef":"2"}],"half":true}"#;
    let output = run_with_stdin(&["solve1d"], broken);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn half_flag_round_trips_through_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let signal = run_ok(&["gen", "--dim", "1", "--n", "4", "--collision-free", "--seed", "9"]);
    let signal_path = write_file(tmp.path(), "signal.json", &signal);
    let full = run_ok(&["acf", &signal_path]);
    let half = run_ok(&["acf", &signal_path, "--half"]);
    let full_doc: serde_json::Value = serde_json::from_str(&full).unwrap();
    let half_doc: serde_json::Value = serde_json::from_str(&half).unwrap();
    assert_eq!(half_doc["half"], true);
    let full_count = full_doc["deltas"].as_array().unwrap().len();
    let half_count = half_doc["deltas"].as_array().unwrap().len();
    assert_eq!(full_count, 2 * half_count - 1);
    // Both forms classify identically.
    let a = run_with_stdin(&["solve1d"], &full);
    let b = run_with_stdin(&["solve1d"], &half);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn recover_routes_one_dimensional_input_to_the_classifier() {
    let tmp = tempfile::tempdir().unwrap();
    let signal = run_ok(&["gen", "--dim", "1", "--n", "5", "--collision-free", "--seed", "4"]);
    let signal_path = write_file(tmp.path(), "signal.json", &signal);
    let acf = run_ok(&["acf", &signal_path]);
    let acf_path = write_file(tmp.path(), "acf.json", &acf);
    let via_recover = run_ok(&["recover", &acf_path, "--seed", "0"]);
    let via_solve = run_ok(&["solve1d", &acf_path]);
    assert_eq!(via_recover, via_solve);
}

#[test]
fn nonpositive_eps_is_rejected() {
    let output = bin()
        .args(["--eps", "-1e-9", "solve1d"])
        .output()
        .expect("run");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn pretty_flag_formats_output() {
    let compact = run_ok(&["gen", "--dim", "1", "--n", "2", "--seed", "1"]);
    let pretty = run_ok(&["gen", "--dim", "1", "--n", "2", "--seed", "1", "--pretty"]);
    assert!(!compact.trim().contains('\n'));
    assert!(pretty.trim().contains('\n'));
    let a: serde_json::Value = serde_json::from_str(&compact).unwrap();
    let b: serde_json::Value = serde_json::from_str(&pretty).unwrap();
    assert_eq!(a, b);
}
