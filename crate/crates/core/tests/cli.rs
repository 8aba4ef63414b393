//! End-to-end tests of the `conditionh` binary: output formats and exit codes.

use std::process::{Command, Output};

fn conditionh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conditionh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf8")
}

#[test]
fn classify_text_and_json() {
    let out = conditionh(&["classify", "--p", "11", "--r", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "p=11 r=3 HOLDS cert=P11R3");

    let out = conditionh(&["classify", "--p", "9", "--r", "6", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(value["status"], "FAILS");
    assert_eq!(value["refutation"], "cs-propagation");
    assert_eq!(value["mirror_of"]["r"], 3);
}

#[test]
fn classify_domain_error_is_usage() {
    let out = conditionh(&["classify", "--p", "5", "--r", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("out of range"));
}

#[test]
fn unknown_flag_is_usage() {
    let out = conditionh(&["classify", "--p", "5", "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_matches_golden() {
    let out = conditionh(&["table", "--max-p", "15"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = include_str!("golden_table.txt");
    assert_eq!(stdout(&out).trim_end(), golden.trim_end());
}

#[test]
fn cert_build_verify_round_trip_and_tamper() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("cert.txt");
    let path_str = path.to_str().expect("utf8 path");

    let out = conditionh(&[
        "cert", "build", "--kind", "RPM2", "--p", "9", "--r", "7", "--out", path_str,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote verified certificate RPM2"));

    let out = conditionh(&["cert", "verify", "--file", path_str]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "VERIFIED p=9 r=7 dim=4");

    // Tamper with one diagonal entry: verification must reject with exit 1.
    let text = std::fs::read_to_string(&path).expect("readable");
    let tampered = text.replacen("9 0 0 0", "8 0 0 0", 1);
    assert_ne!(text, tampered, "tamper target not found");
    std::fs::write(&path, tampered).expect("writable");
    let out = conditionh(&["cert", "verify", "--file", path_str]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("REJECTED"));
}

#[test]
fn cert_build_without_out_prints_certificate() {
    let out = conditionh(&["cert", "build", "--kind", "R1", "--p", "5", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("conditionh-cert v1 p=5 r=1\n"));
    assert!(text.contains("basis 1"));
}

#[test]
fn cert_build_kind_mismatch_is_usage() {
    let out = conditionh(&["cert", "build", "--kind", "R1", "--p", "5", "--r", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = conditionh(&["cert", "build", "--kind", "NOPE", "--p", "5", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cert_verify_missing_file_is_usage() {
    let out = conditionh(&["cert", "verify", "--file", "/nonexistent/cert.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn refute_prints_replayable_transcript() {
    let out = conditionh(&["refute", "--p", "13", "--r", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("FACT witness (p=13,r=3)"));
    assert!(text.trim_end().ends_with("CONCLUSION condition-h-refuted witness-family-b"));
}

#[test]
fn refute_unknown_cell_fails() {
    let out = conditionh(&["refute", "--p", "10", "--r", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("classified UNKNOWN"));
}

#[test]
fn refute_even_r_mirror() {
    let out = conditionh(&["refute", "--p", "9", "--r", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("refutation runs at the interchange partner (9,3) of (9,6)"));
    assert!(text.contains("CONCLUSION condition-h-refuted cs-propagation"));
}

#[test]
fn refute_holding_cell_fails() {
    let out = conditionh(&["refute", "--p", "7", "--r", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("classified HOLDS"));
}

#[test]
fn sdp_feasible_and_rationalized() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("sdp.cert");
    let path_str = path.to_str().expect("utf8 path");
    let out = conditionh(&[
        "sdp", "--p", "5", "--r", "3", "--rationalize", "--out", path_str,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("status=FEASIBLE residual="));
    assert!(text.contains("RATIONALIZED exact certificate verified"));

    let out = conditionh(&["cert", "verify", "--file", path_str]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "VERIFIED p=5 r=3 dim=2");
}

#[test]
fn sdp_stall_report_is_a_successful_run() {
    let out = conditionh(&["sdp", "--p", "6", "--r", "3", "--max-iters", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("status=STALLED"));
    assert!(text.contains("iterations=500"));
}

#[test]
fn sdp_rationalize_on_stalled_cell_fails() {
    let out = conditionh(&[
        "sdp", "--p", "6", "--r", "3", "--max-iters", "500", "--rationalize",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("status=STALLED"));
    assert!(stderr(&out).contains("no feasible point to rationalize"));
}

#[test]
fn sdp_mirrors_even_r_for_odd_p() {
    let out = conditionh(&["sdp", "--p", "7", "--r", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("solving the interchange partner (7,3) of (7,4)"));
}

#[test]
fn sdp_rejects_both_even() {
    let out = conditionh(&["sdp", "--p", "6", "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("both even"));
}

#[test]
fn numcheck_builtin_and_file_certificates() {
    let out = conditionh(&[
        "numcheck", "--p", "7", "--r", "3", "--trials", "3", "--n", "3", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("seed=11 alpha="));
    assert!(text.contains("trials=3 max_reldev="));

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("cert.txt");
    let path_str = path.to_str().expect("utf8 path");
    conditionh(&["cert", "build", "--kind", "P11R3", "--p", "11", "--r", "3", "--out", path_str]);
    let out = conditionh(&[
        "numcheck", "--p", "11", "--r", "3", "--cert", path_str, "--trials", "2", "--n", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn numcheck_without_certificate_is_usage() {
    let out = conditionh(&["numcheck", "--p", "9", "--r", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("supply --cert"));
}

#[test]
fn numcheck_cert_cell_mismatch_is_usage() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("cert.txt");
    let path_str = path.to_str().expect("utf8 path");
    conditionh(&["cert", "build", "--kind", "R1", "--p", "7", "--r", "1", "--out", path_str]);
    let out = conditionh(&["numcheck", "--p", "9", "--r", "1", "--cert", path_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("certificate file is for"));
}
