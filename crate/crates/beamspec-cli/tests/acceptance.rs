//! End-to-end checks of the `beamspec` binary: output schemas, determinism,
//! exit codes, and the reproducibility of the verification entry point.

use std::process::{Command, Output};

fn beamspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamspec"))
        .args(args)
        .output()
        .expect("the beamspec binary should spawn")
}

fn stdout_of(output: &Output) -> &str {
    std::str::from_utf8(&output.stdout).expect("stdout should be UTF-8")
}

fn stderr_of(output: &Output) -> &str {
    std::str::from_utf8(&output.stderr).expect("stderr should be UTF-8")
}

/// Criterion 10: the quick verification tier must succeed and be
/// byte-for-byte reproducible under a fixed seed.
#[test]
fn criterion_10_quick_verify_is_green_and_reproducible() {
    let args = ["verify", "--quick", "--seed", "42"];
    let first = beamspec(&args);
    let second = beamspec(&args);

    assert_eq!(
        first.status.code(),
        Some(0),
        "quick verification must exit 0; stderr: {}",
        stderr_of(&first)
    );
    assert_eq!(second.status.code(), Some(0), "second run must also exit 0");
    assert!(
        !first.stdout.is_empty(),
        "the verification table must not be empty"
    );
    assert!(
        stdout_of(&first).contains("PASS"),
        "the table should mark passing rows with PASS"
    );
    assert_eq!(
        first.stdout, second.stdout,
        "two seeded runs must produce byte-identical reports"
    );
    println!("criterion 10: PASS — quick verification exits 0 and is byte-identical across runs");
}

#[test]
fn full_verify_reports_the_known_refinement_order_failure() {
    let output = beamspec(&["verify", "--seed", "7"]);
    assert_eq!(
        output.status.code(),
        Some(1),
        "the full tier carries a known failing check and must exit 1"
    );
    let table = stdout_of(&output);
    assert!(
        table.contains("FAIL  oracle refinement order"),
        "the failing row should be the oracle refinement order, got:\n{table}"
    );
    assert_eq!(
        table.matches("FAIL").count(),
        1,
        "exactly one row should fail in the full tier"
    );
}

#[test]
fn spectrum_csv_has_the_declared_schema() {
    let output = beamspec(&["spectrum", "--k", "1.0", "--n-max", "50"]);
    assert_eq!(output.status.code(), Some(0), "spectrum run should succeed");
    let text = stdout_of(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,re_tau,im_tau,re_lambda,im_lambda,residual,err_tau,err_re_lambda"),
        "header row must match the declared schema"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(
        rows.len() >= 50,
        "expected at least 50 data rows, got {}",
        rows.len()
    );
    for row in &rows {
        assert_eq!(
            row.split(',').count(),
            8,
            "each data row must have 8 fields, got {row:?}"
        );
        for field in row.split(',').skip(1) {
            let value: f64 = field.parse().expect("numeric fields should parse as f64");
            assert!(value.is_finite(), "fields must be finite, got {field}");
        }
    }
    assert!(
        text.ends_with('\n') && !text.contains('\r'),
        "output must use bare newline endings"
    );
}

#[test]
fn spectrum_output_is_deterministic() {
    let args = ["spectrum", "--k", "0.8", "--n-max", "12"];
    let first = beamspec(&args);
    let second = beamspec(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(
        first.stdout, second.stdout,
        "repeated spectrum runs must be byte-identical"
    );
}

#[test]
fn modes_and_closeness_emit_their_headers() {
    let modes = beamspec(&["modes", "--n", "4", "--grid-size", "64", "--kind", "f"]);
    assert_eq!(modes.status.code(), Some(0), "modes run should succeed");
    assert_eq!(
        stdout_of(&modes).lines().next(),
        Some("x,re_comp1,im_comp1,re_comp2,im_comp2")
    );
    assert_eq!(
        stdout_of(&modes).lines().count(),
        66,
        "a 64-interval grid has 65 sample rows plus the header"
    );

    let closeness = beamspec(&["closeness", "--n-from", "10", "--n-to", "14", "--grid-size", "64"]);
    assert_eq!(closeness.status.code(), Some(0), "closeness run should succeed");
    let text = stdout_of(&closeness);
    assert_eq!(text.lines().next(), Some("n,d_n,partial_sum"));
    assert_eq!(text.lines().count(), 6, "five entries plus the header");
}

#[test]
fn undamped_simulation_keeps_energy_constant() {
    let output = beamspec(&["simulate", "--k", "0", "--t-final", "1", "--ic", "poly"]);
    assert_eq!(output.status.code(), Some(0), "simulate run should succeed");
    let text = stdout_of(&output);
    assert_eq!(text.lines().next(), Some("t,E,boundary_power"));
    let energies: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|row| {
            row.split(',')
                .nth(1)
                .expect("rows have an energy column")
                .parse()
                .expect("energy should parse")
        })
        .collect();
    assert!(energies.len() >= 1000, "a one-second run records 1000+ steps");
    let e0 = energies[0];
    assert!(e0 > 0.0, "the polynomial profile carries positive energy");
    let drift = energies
        .iter()
        .fold(0.0_f64, |acc, &e| acc.max((e - e0).abs() / e0));
    assert!(
        drift <= 1e-8,
        "undamped energy must stay constant to 1e-8 relative, drifted {drift:.3e}"
    );
}

#[test]
fn fit_output_is_json_with_schema_version() {
    let output = beamspec(&[
        "simulate",
        "--k",
        "1",
        "--m",
        "64",
        "--dt",
        "1e-3",
        "--t-final",
        "1",
        "--fit",
        "--fit-start",
        "0.2",
    ]);
    assert_eq!(output.status.code(), Some(0), "fit run should succeed");
    let value: serde_json::Value =
        serde_json::from_str(stdout_of(&output)).expect("stdout should be a JSON document");
    assert_eq!(
        value.get("schema_version").and_then(|v| v.as_str()),
        Some("1"),
        "JSON output must declare schema_version 1"
    );
    let mu = value
        .get("mu_hat")
        .and_then(|v| v.as_f64())
        .expect("fit must report mu_hat");
    assert!(
        mu.is_finite() && mu > 0.0,
        "the damped run should fit a positive decay rate, got {mu}"
    );
}

#[test]
fn json_spectrum_is_a_single_versioned_object() {
    let output = beamspec(&["spectrum", "--n-max", "4", "--format", "json"]);
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(stdout_of(&output)).expect("stdout should be a JSON document");
    assert_eq!(
        value.get("schema_version").and_then(|v| v.as_str()),
        Some("1")
    );
    let points = value
        .get("points")
        .and_then(|v| v.as_array())
        .expect("spectrum JSON carries a points array");
    assert!(points.len() >= 4, "expected at least 4 points");
}

#[test]
fn library_errors_exit_one_with_the_error_name() {
    let bad_gain = beamspec(&["spectrum", "--k", "-1"]);
    assert_eq!(
        bad_gain.status.code(),
        Some(1),
        "a rejected gain is a library error, not a parse error"
    );
    assert!(
        stderr_of(&bad_gain).starts_with("InvalidGain"),
        "stderr should surface the error name verbatim, got: {}",
        stderr_of(&bad_gain)
    );

    let bad_dt = beamspec(&["simulate", "--dt", "-0.5"]);
    assert_eq!(bad_dt.status.code(), Some(1));
    assert!(
        stderr_of(&bad_dt).starts_with("InvalidConfig"),
        "stderr should surface the error name verbatim, got: {}",
        stderr_of(&bad_dt)
    );
}

#[test]
fn unparseable_command_lines_exit_two() {
    let bogus_subcommand = beamspec(&["bogus"]);
    assert_eq!(bogus_subcommand.status.code(), Some(2));

    let bogus_ic = beamspec(&["simulate", "--ic", "fourier"]);
    assert_eq!(
        bogus_ic.status.code(),
        Some(2),
        "an unknown initial-condition name fails at argument parsing"
    );
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_beamspec"))
            .env("BEAMSPEC_THREADS", threads)
            .args(["verify", "--quick", "--seed", "42"])
            .output()
            .expect("the beamspec binary should spawn")
    };
    let capped = run("1");
    let auto = run("0");
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(auto.status.code(), Some(0));
    assert_eq!(
        capped.stdout, auto.stdout,
        "the thread cap must not change any reported number"
    );
}
