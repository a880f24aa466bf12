//! End-to-end checks of the `voatrace` binary: output shapes, exit codes,
//! and determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voatrace"))
        .args(args)
        .env_remove("VOATRACE_PRESETS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn trace_boson_prints_the_closed_form() {
    let out = run(&[
        "trace",
        "--boson",
        "-d",
        "1",
        "--state",
        "h1[-2]^2 vac",
        "--order",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("f = -6*E4"), "output: {text}");
    assert!(text.contains("Z = "), "output: {text}");
}

#[test]
fn trace_brute_force_agrees_with_symbolic() {
    let sym = run(&[
        "trace",
        "--boson",
        "-d",
        "2",
        "--state",
        "h1[-1]^2 h2[-1]^2 vac",
        "--order",
        "4",
        "--format",
        "json",
    ]);
    let brute = run(&[
        "trace",
        "--boson",
        "-d",
        "2",
        "--state",
        "h1[-1]^2 h2[-1]^2 vac",
        "--order",
        "4",
        "--format",
        "json",
        "--brute",
    ]);
    assert_eq!(sym.status.code(), Some(0));
    assert_eq!(brute.status.code(), Some(0));
    let sym_json: serde_json::Value = serde_json::from_str(&stdout(&sym)).unwrap();
    let brute_json: serde_json::Value = serde_json::from_str(&stdout(&brute)).unwrap();
    assert_eq!(sym_json["series"], brute_json["series"]);
    assert_eq!(sym_json["engine"], "symbolic");
    assert_eq!(brute_json["engine"], "brute-force");
}

#[test]
fn theta_on_the_e8_preset_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets/e8.json");
    let out = run(&["theta", "--lattice", path, "--order", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("1 + 240*q + 2160*q^2"),
        "output: {}",
        stdout(&out)
    );
}

#[test]
fn theta_preset_by_name_and_coset() {
    let out = run(&["theta", "--lattice", "a1", "--coset", "1", "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("2*q^(1/4)"),
        "output: {}",
        stdout(&out)
    );
}

#[test]
fn presets_dir_env_var_is_honored() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets");
    let out = Command::new(env!("CARGO_BIN_EXE_voatrace"))
        .args(["theta", "--lattice", "e8", "--order", "2"])
        .env("VOATRACE_PRESETS", dir)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("1 + 240*q"));
}

#[test]
fn eisenstein_weights() {
    let out = run(&["eisenstein", "--weight", "2", "--order", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("-1/12 + 2*q + 6*q^2 + 8*q^3"));
    let bad = run(&["eisenstein", "--weight", "3", "--order", "4"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("bad Eisenstein weight"));
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "trace",
        "--boson",
        "-d",
        "1",
        "--state",
        "h1[-1]^4 vac",
        "--order",
        "5",
        "--format",
        "json",
    ];
    let first = stdout(&run(&args));
    let second = stdout(&run(&args));
    assert_eq!(first, second);
    let parsed: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(parsed["f"][0]["e2"], 2);
}

#[test]
fn usage_errors_exit_2() {
    // unknown flag
    let out = run(&["trace", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    // missing rank
    let out = run(&["trace", "--boson", "--state", "vac", "--order", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed state expression
    let out = run(&[
        "trace",
        "--boson",
        "-d",
        "2",
        "--state",
        "h9[-1] vac",
        "--order",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("direction index 9"));
    // malformed lattice file
    let out = run(&[
        "trace",
        "--lattice",
        r#"{"name":"x","gram":[[1]]}"#,
        "--state",
        "vac",
        "--order",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad gram"));
}

#[test]
fn oversized_brute_force_orders_are_refused() {
    let out = run(&[
        "trace",
        "--lattice",
        "e8",
        "--state",
        "vac",
        "--order",
        "41",
        "--brute",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("refused"), "stderr: {}", stderr(&out));
}

#[test]
fn verify_suites_report_and_exit_zero() {
    let out = run(&["verify", "--suite", "e2-transform"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("PASS E2 transformation at tau=i"));
    assert!(text.contains("2 passed, 0 failed"));

    let out = run(&["verify", "--suite", "boson", "--max-weight", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn lattice_trace_reports_level_note() {
    // A1 has level 4; the modular decomposition is reported unavailable.
    let out = run(&["trace", "--lattice", "a1", "--state", "vac", "--order", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("unavailable at level 4"),
        "output: {}",
        stdout(&out)
    );
}

#[test]
fn harmonic_theta_from_inline_spec() {
    let out = run(&[
        "theta",
        "--lattice",
        "e8",
        "--harmonic",
        r#"{"isotropic": {"t": ["1", "i"], "k": 8}}"#,
        "--order",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    // 120 eta^24 = 120q - 2880q^2 + ...
    assert!(stdout(&out).contains("120*q"), "output: {}", stdout(&out));
    assert!(
        stdout(&out).contains("2880*q^2"),
        "output: {}",
        stdout(&out)
    );
}

#[test]
fn weighted_theta_from_csv_vector() {
    let out = run(&[
        "theta",
        "--lattice",
        "a1",
        "--weight-vector",
        "1",
        "--k",
        "2",
        "--order",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("4*q + 16*q^4"),
        "output: {}",
        stdout(&out)
    );
}
