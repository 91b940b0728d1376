//! End-to-end checks of the `symflow` binary: exit-code contract, payload
//! shape, seeding and determinism.

use std::process::{Command, Output};

fn symflow(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_symflow"));
    cmd.args(args);
    cmd.env_remove("SYMFLOW_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn classify_emits_case_and_condition() {
    let out = symflow(&["classify", "--k", "2", "--m", "3"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out), "{\"case\":2,\"condition\":\"k=m-1\"}\n");
}

#[test]
fn classify_reports_snapping_of_decimals() {
    let out = symflow(&["classify", "--k", "0.5", "--m", "2.5"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let payload = stdout_of(&out);
    assert!(payload.contains("\"case\":6"), "{payload}");
    // 0.5 and 2.5 are exactly representable: no snap report.
    assert!(!payload.contains("snapped"), "{payload}");
}

#[test]
fn usage_errors_exit_2() {
    // k = 0 is outside the family.
    let out = symflow(&["classify", "--k", "0", "--m", "2"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k must be nonzero"));
    assert!(out.stdout.is_empty());

    // Unknown flag.
    let out = symflow(&["classify", "--k", "2", "--m", "3", "--bogus"], &[]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown subcommand.
    let out = symflow(&["frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2));

    // Case/exponent contradiction.
    let out = symflow(&["audit", "--case", "2", "--k", "2", "--m", "5"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "classify",
        "generators",
        "check-symmetry",
        "bracket-table",
        "flow",
        "pushforward",
        "catalog",
        "verify",
        "audit",
        "solve-moc",
    ] {
        let out = symflow(&[sub, "--help"], &[]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
    }
}

#[test]
fn stdout_is_machine_payload_and_stderr_carries_the_summary() {
    let out = symflow(&["generators", "--k", "1", "--m", "1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let payload = stdout_of(&out);
    serde_json::from_str::<serde_json::Value>(&payload).expect("stdout is one JSON document");
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn same_argv_and_seed_give_byte_identical_stdout() {
    let args = [
        "check-symmetry",
        "--k",
        "3/2",
        "--m",
        "5/2",
        "--lambda",
        "1.3",
        "--seed",
        "9",
    ];
    let a = symflow(&args, &[]);
    let b = symflow(&args, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn symflow_seed_env_var_overrides_the_default() {
    let args = ["check-symmetry", "--k", "2", "--m", "1", "--lambda", "1.3"];
    let with_env = symflow(&args, &[("SYMFLOW_SEED", "7")]);
    let with_flag = symflow(
        &["check-symmetry", "--k", "2", "--m", "1", "--lambda", "1.3", "--seed", "7"],
        &[],
    );
    assert_eq!(with_env.stdout, with_flag.stdout);
    let default = symflow(&args, &[]);
    let payload = stdout_of(&with_env);
    assert!(payload.contains("\"seed\":7"), "{payload}");
    assert!(stdout_of(&default).contains("\"seed\":0"));
}

#[test]
fn csv_output_has_a_header_and_round_trips_floats() {
    let out = symflow(
        &[
            "solve-moc",
            "--k",
            "2",
            "--m",
            "3",
            "--u0",
            "1.4",
            "--x",
            "0.5,1.0",
            "--t",
            "0.1",
            "--format",
            "csv",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let payload = stdout_of(&out);
    let mut lines = payload.lines();
    assert_eq!(lines.next(), Some("x,t,u"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 3, "{line}");
        for c in &cells {
            let v: f64 = c.parse().expect("numeric cell");
            // Round-trip: the printed text reparses to the identical double.
            assert_eq!(format!("{v}"), *c);
        }
    }
}

#[test]
fn discrepant_verdicts_exit_1() {
    // The as-tabulated linear-damping table has one bad cell when
    // lambda * k != 1.
    let out = symflow(
        &[
            "bracket-table",
            "--case",
            "7",
            "--k",
            "2",
            "--lambda",
            "1.3",
            "--as-printed",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let corrected = symflow(
        &["bracket-table", "--case", "7", "--k", "2", "--lambda", "1.3"],
        &[],
    );
    assert_eq!(corrected.status.code(), Some(0));
}

#[test]
fn flow_crosschecks_closed_form_against_integration() {
    let out = symflow(
        &[
            "flow", "--k", "1", "--m", "1", "--index", "3", "--eps", "-0.1",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["verdict"], "VERIFIED");
    assert!(v["deviation"].as_f64().unwrap() <= 1e-8);
}
