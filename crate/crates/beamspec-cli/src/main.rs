//! Command-line front end for the `beamspec` library.
//!
//! Every subcommand is a thin dispatcher: it parses arguments, calls into the
//! library, and prints the result in a stable tabular form.  Two output
//! formats are supported where data is emitted: CSV (the default, one header
//! line followed by data rows) and JSON (a single top-level object whose
//! first field is `"schema_version"`).  Floating-point values in CSV are
//! written with 17 significant digits so that round-tripping through text is
//! lossless; negative zero is normalized to zero so reruns are byte-stable.
//!
//! Exit codes: `0` on success, `1` when a library call fails (the error line
//! on stderr starts with the library's error name) or when `verify` finds a
//! failing check, and `2` for unparseable command lines (handled by clap).
//!
//! The environment variable `BEAMSPEC_THREADS` caps worker parallelism; `0`
//! or an unset/unreadable value selects the automatic thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use beamspec::{
    build_mode, compute_spectrum, find_eigenvalue, profile_f, profile_g, run_verification,
    simulate, verify_resolvent, DecayEstimate, Gain, InitialCondition, ModeProfile, Polynomial,
    SimConfig, SpectrumReport, VerifyReport,
};

/// Spectral analysis and closed-loop simulation of a boundary-damped beam.
#[derive(Parser)]
#[command(name = "beamspec", version, about)]
struct Cli {
    /// Seed for the randomized spot checks in the verification suite.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the eigenvalue branch with asymptotic diagnostics.
    Spectrum {
        /// Feedback gain at the damped end.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        /// Largest branch index to resolve.
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        /// Root-finder tolerance on the scaled characteristic value.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one eigenmode profile (or its comparison profile) on a grid.
    Modes {
        /// Feedback gain at the damped end.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        /// Branch index of the mode.
        #[arg(long)]
        n: usize,
        /// Number of grid intervals on [0, 1].
        #[arg(long, default_value_t = 1024)]
        grid_size: usize,
        /// Which family to evaluate: the damped eigenmode or the reference profile.
        #[arg(long, value_enum, default_value_t = Kind::F)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the quadratic-closeness distances d_n over an index range.
    Closeness {
        /// Feedback gain at the damped end.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        /// First branch index of the range.
        #[arg(long, default_value_t = 10)]
        n_from: usize,
        /// Last branch index of the range (inclusive).
        #[arg(long, default_value_t = 80)]
        n_to: usize,
        /// Number of grid intervals used for the norm integrals.
        #[arg(long, default_value_t = 1024)]
        grid_size: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the closed-form inverse on a block of polynomial test data.
    ResolventCheck {
        /// Feedback gain at the damped end.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the closed-loop simulation and emit the energy trace.
    Simulate {
        /// Feedback gain at the damped end.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        /// Number of spatial grid intervals.
        #[arg(long, default_value_t = 200)]
        m: usize,
        /// Time step.
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        dt: f64,
        /// Final simulation time.
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        t_final: f64,
        /// Initial condition: poly, modeJ (e.g. mode3), mixed, or zero.
        #[arg(long, default_value = "poly")]
        ic: InitialCondition,
        /// Record every this-many steps (1 records each step).
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the trace to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Fit an exponential decay rate and print the fit as JSON on stdout.
        #[arg(long)]
        fit: bool,
        /// Start of the fit window (with --fit).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        fit_start: f64,
        /// End of the fit window (with --fit); defaults to t-final.
        #[arg(long)]
        fit_end: Option<f64>,
    },
    /// Run the cross-module verification suite and print a pass/fail table.
    Verify {
        /// Skip the slow grid-refinement study.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Damped eigenmode profile.
    F,
    /// Undamped comparison profile.
    G,
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(line) => {
            eprintln!("{line}");
            ExitCode::from(1)
        }
    }
}

/// Applies the `BEAMSPEC_THREADS` cap before any parallel work starts.
fn init_threads() {
    let Ok(raw) = std::env::var("BEAMSPEC_THREADS") else {
        return;
    };
    let Ok(n) = raw.trim().parse::<usize>() else {
        return;
    };
    if n > 0 {
        // A failure here means a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Spectrum {
            k,
            n_max,
            tol,
            format,
            output,
        } => {
            let gain = beam(Gain::new(k))?;
            let report = beam(compute_spectrum(n_max, gain, tol))?;
            let content = match format {
                Format::Csv => spectrum_csv(&report),
                Format::Json => to_json(&SpectrumJson::from_report(&report))?,
            };
            write_output(output.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Modes {
            k,
            n,
            grid_size,
            kind,
            format,
            output,
        } => {
            let gain = beam(Gain::new(k))?;
            let profile = match kind {
                Kind::F => {
                    let point = beam(find_eigenvalue(n, gain, 1e-12))?;
                    let mode = beam(build_mode(&point, grid_size))?;
                    profile_f(&mode)
                }
                Kind::G => beam(profile_g(n, grid_size))?,
            };
            let content = match format {
                Format::Csv => profile_csv(&profile),
                Format::Json => to_json(&ProfileJson::from_profile(k, n, kind, &profile))?,
            };
            write_output(output.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Closeness {
            k,
            n_from,
            n_to,
            grid_size,
            format,
            output,
        } => {
            let gain = beam(Gain::new(k))?;
            let entries = beam(beamspec::closeness_tail(n_from, n_to, gain, grid_size))?;
            let content = match format {
                Format::Csv => closeness_csv(&entries),
                Format::Json => to_json(&ClosenessJson::from_entries(k, &entries))?,
            };
            write_output(output.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ResolventCheck { k, format, output } => {
            let gain = beam(Gain::new(k))?;
            let cases = resolvent_cases(gain);
            let content = match format {
                Format::Csv => resolvent_csv(&cases),
                Format::Json => to_json(&ResolventJson::from_cases(k, &cases))?,
            };
            write_output(output.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            k,
            m,
            dt,
            t_final,
            ic,
            record_every,
            format,
            output,
            fit,
            fit_start,
            fit_end,
        } => {
            let gain = beam(Gain::new(k))?;
            let config = SimConfig {
                m,
                dt,
                t_final,
                k: gain,
                ic,
                record_every,
            };
            let trace = beam(simulate(&config))?;
            let content = match format {
                Format::Csv => trace_csv(&trace),
                Format::Json => to_json(&TraceJson::from_trace(&config, &trace))?,
            };
            if fit {
                let window = (fit_start, fit_end.unwrap_or(t_final));
                let estimate = beam(beamspec::fit_decay(&trace, window))?;
                // With --fit the trace goes to --output only; stdout carries
                // the fit so scripts can pipe it straight into a JSON parser.
                if let Some(path) = output.as_deref() {
                    write_output(Some(path), &content)?;
                }
                let fit_json = to_json(&FitJson::from_estimate(&estimate))?;
                print!("{fit_json}");
            } else {
                write_output(output.as_deref(), &content)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { quick } => {
            let report = beam(run_verification(cli.seed, quick))?;
            print!("{}", verify_table(&report));
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

/// Converts a library error into the single stderr line for exit code 1.
fn beam<T>(result: beamspec::Result<T>) -> Result<T, String> {
    result.map_err(|e| e.to_string())
}

/// Formats a float with 17 significant digits, normalizing negative zero.
fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_output(output: Option<&std::path::Path>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("WriteFailure: cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| format!("SerializeFailure: {e}"))
}

// --- spectrum -----------------------------------------------------------

fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out =
        String::from("n,re_tau,im_tau,re_lambda,im_lambda,residual,err_tau,err_re_lambda\n");
    for (point, err) in report.points.iter().zip(&report.asymptote_errors) {
        debug_assert_eq!(point.n, err.n);
        let lambda = point.lambda();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            point.n,
            fmt_float(point.tau.re),
            fmt_float(point.tau.im),
            fmt_float(lambda.re),
            fmt_float(lambda.im),
            fmt_float(point.residual),
            fmt_float(err.err_tau),
            fmt_float(err.err_re_lambda),
        );
    }
    out
}

#[derive(Serialize)]
struct SpectrumJson {
    schema_version: &'static str,
    k: f64,
    tolerance: f64,
    points: Vec<SpectrumRowJson>,
}

#[derive(Serialize)]
struct SpectrumRowJson {
    n: usize,
    re_tau: f64,
    im_tau: f64,
    re_lambda: f64,
    im_lambda: f64,
    residual: f64,
    err_tau: f64,
    err_re_lambda: f64,
}

impl SpectrumJson {
    fn from_report(report: &SpectrumReport) -> Self {
        let points = report
            .points
            .iter()
            .zip(&report.asymptote_errors)
            .map(|(point, err)| {
                let lambda = point.lambda();
                SpectrumRowJson {
                    n: point.n,
                    re_tau: point.tau.re,
                    im_tau: point.tau.im,
                    re_lambda: lambda.re,
                    im_lambda: lambda.im,
                    residual: point.residual,
                    err_tau: err.err_tau,
                    err_re_lambda: err.err_re_lambda,
                }
            })
            .collect();
        Self {
            schema_version: "1",
            k: report.k.k(),
            tolerance: report.tolerance,
            points,
        }
    }
}

// --- modes --------------------------------------------------------------

fn profile_csv(profile: &ModeProfile) -> String {
    let mut out = String::from("x,re_comp1,im_comp1,re_comp2,im_comp2\n");
    for (i, &x) in profile.grid.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(x),
            fmt_float(profile.comp1[i].re),
            fmt_float(profile.comp1[i].im),
            fmt_float(profile.comp2[i].re),
            fmt_float(profile.comp2[i].im),
        );
    }
    out
}

#[derive(Serialize)]
struct ProfileJson {
    schema_version: &'static str,
    k: f64,
    n: usize,
    kind: &'static str,
    x: Vec<f64>,
    re_comp1: Vec<f64>,
    im_comp1: Vec<f64>,
    re_comp2: Vec<f64>,
    im_comp2: Vec<f64>,
}

impl ProfileJson {
    fn from_profile(k: f64, n: usize, kind: Kind, profile: &ModeProfile) -> Self {
        Self {
            schema_version: "1",
            k,
            n,
            kind: match kind {
                Kind::F => "f",
                Kind::G => "g",
            },
            x: profile.grid.clone(),
            re_comp1: profile.comp1.iter().map(|z| z.re).collect(),
            im_comp1: profile.comp1.iter().map(|z| z.im).collect(),
            re_comp2: profile.comp2.iter().map(|z| z.re).collect(),
            im_comp2: profile.comp2.iter().map(|z| z.im).collect(),
        }
    }
}

// --- closeness ----------------------------------------------------------

fn closeness_csv(entries: &[beamspec::ClosenessEntry]) -> String {
    let mut out = String::from("n,d_n,partial_sum\n");
    for entry in entries {
        let _ = writeln!(
            out,
            "{},{},{}",
            entry.n,
            fmt_float(entry.d_n),
            fmt_float(entry.partial_sum),
        );
    }
    out
}

#[derive(Serialize)]
struct ClosenessJson {
    schema_version: &'static str,
    k: f64,
    entries: Vec<ClosenessRowJson>,
}

#[derive(Serialize)]
struct ClosenessRowJson {
    n: usize,
    d_n: f64,
    partial_sum: f64,
}

impl ClosenessJson {
    fn from_entries(k: f64, entries: &[beamspec::ClosenessEntry]) -> Self {
        let rows = entries
            .iter()
            .map(|entry| ClosenessRowJson {
                n: entry.n,
                d_n: entry.d_n,
                partial_sum: entry.partial_sum,
            })
            .collect();
        Self {
            schema_version: "1",
            k,
            entries: rows,
        }
    }
}

// --- resolvent check ----------------------------------------------------

struct ResolventCase {
    phi: &'static str,
    psi: &'static str,
    identity_residual: f64,
    bc_residual: f64,
}

/// Runs the fixed polynomial test block at one gain.
fn resolvent_cases(gain: Gain) -> Vec<ResolventCase> {
    let phis: [(&'static str, Polynomial); 2] = [
        ("0", Polynomial::zero()),
        ("x^2*(1-x)", Polynomial::new(vec![0.0, 0.0, 1.0, -1.0])),
    ];
    let psis: [(&'static str, Polynomial); 4] = [
        ("1", Polynomial::new(vec![1.0])),
        ("x", Polynomial::new(vec![0.0, 1.0])),
        ("x^2", Polynomial::new(vec![0.0, 0.0, 1.0])),
        ("x^3", Polynomial::new(vec![0.0, 0.0, 0.0, 1.0])),
    ];
    let mut cases = Vec::with_capacity(phis.len() * psis.len());
    for (phi_label, phi) in &phis {
        for (psi_label, psi) in &psis {
            let report = verify_resolvent(phi, psi, gain);
            let bc_max = report
                .bc_residuals
                .iter()
                .fold(0.0_f64, |acc, &r| acc.max(r.abs()));
            cases.push(ResolventCase {
                phi: phi_label,
                psi: psi_label,
                identity_residual: report.identity_residual,
                bc_residual: bc_max,
            });
        }
    }
    cases
}

fn resolvent_csv(cases: &[ResolventCase]) -> String {
    let mut out = String::from("phi,psi,identity_residual,bc_residual\n");
    for case in cases {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            case.phi,
            case.psi,
            fmt_float(case.identity_residual),
            fmt_float(case.bc_residual),
        );
    }
    out
}

#[derive(Serialize)]
struct ResolventJson {
    schema_version: &'static str,
    k: f64,
    cases: Vec<ResolventRowJson>,
}

#[derive(Serialize)]
struct ResolventRowJson {
    phi: &'static str,
    psi: &'static str,
    identity_residual: f64,
    bc_residual: f64,
}

impl ResolventJson {
    fn from_cases(k: f64, cases: &[ResolventCase]) -> Self {
        Self {
            schema_version: "1",
            k,
            cases: cases
                .iter()
                .map(|c| ResolventRowJson {
                    phi: c.phi,
                    psi: c.psi,
                    identity_residual: c.identity_residual,
                    bc_residual: c.bc_residual,
                })
                .collect(),
        }
    }
}

// --- simulate -----------------------------------------------------------

fn trace_csv(trace: &beamspec::EnergyTrace) -> String {
    let mut out = String::from("t,E,boundary_power\n");
    for (i, &t) in trace.times.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_float(t),
            fmt_float(trace.energy[i]),
            fmt_float(trace.boundary_power[i]),
        );
    }
    out
}

#[derive(Serialize)]
struct TraceJson {
    schema_version: &'static str,
    k: f64,
    m: usize,
    dt: f64,
    t_final: f64,
    ic: String,
    smoothing_window: f64,
    times: Vec<f64>,
    energy: Vec<f64>,
    boundary_power: Vec<f64>,
}

impl TraceJson {
    fn from_trace(config: &SimConfig, trace: &beamspec::EnergyTrace) -> Self {
        Self {
            schema_version: "1",
            k: config.k.k(),
            m: config.m,
            dt: config.dt,
            t_final: config.t_final,
            ic: config.ic.to_string(),
            smoothing_window: trace.smoothing_window,
            times: trace.times.clone(),
            energy: trace.energy.clone(),
            boundary_power: trace.boundary_power.clone(),
        }
    }
}

#[derive(Serialize)]
struct FitJson {
    schema_version: &'static str,
    mu_hat: f64,
    m_hat: f64,
    fit_window: [f64; 2],
    fit_residual: f64,
}

impl FitJson {
    fn from_estimate(estimate: &DecayEstimate) -> Self {
        Self {
            schema_version: "1",
            mu_hat: estimate.mu_hat,
            m_hat: estimate.m_hat,
            fit_window: [estimate.fit_window.0, estimate.fit_window.1],
            fit_residual: estimate.fit_residual,
        }
    }
}

// --- verify -------------------------------------------------------------

fn verify_table(report: &VerifyReport) -> String {
    let tier = if report.quick { "quick" } else { "full" };
    let mut out = format!("verification report - seed {}, {} tier\n", report.seed, tier);
    let name_width = report
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0);
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status}  {name:<name_width$}  measured {measured:>24}  threshold {threshold:>24}  {detail}",
            name = check.name,
            measured = fmt_float(check.measured),
            threshold = fmt_float(check.threshold),
            detail = check.detail,
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(out, "result: {passed}/{} checks passed", report.checks.len());
    out
}
