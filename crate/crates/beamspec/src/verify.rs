//! One-shot verification suite: every module's headline invariant measured
//! against its threshold, reported as a deterministic pass/fail table.
//!
//! The quick tier covers the full set of properties at desk scale. The full
//! tier adds the grid-refinement study of the eigenvalue oracle, which
//! currently reports an honest failure: the root/oracle gap shrinks under
//! refinement at the generator's native first-order rate (the one-sided
//! boundary stencils dominate), not at the 1.5 the rate check demands. See
//! the refinement-order row's detail text.
//!
//! Randomized spot checks (resolvent inputs, gains) draw from a caller-seeded
//! ChaCha stream, so a fixed seed yields byte-identical reports; everything
//! else is straight-line floating-point arithmetic with a fixed evaluation
//! order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::charfun::Gain;
use crate::error::Result;
use crate::modes::{build_mode, closeness_tail, l2_norm, profile_f};
use crate::operator::{
    apply_resolvent, build_generator, generator_abscissa, oracle_eigenvalue, verify_resolvent,
    Polynomial, StatePair,
};
use crate::simulator::{dissipation_check, fit_decay, simulate, InitialCondition, SimConfig};
use crate::spectrum::{compute_spectrum, find_eigenvalue, SpectralPoint, SpectrumReport};

/// Root tolerance used throughout the suite.
const TOL: f64 = 1e-12;

/// One measured property confronted with its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Stable, human-readable row label.
    pub name: &'static str,
    /// The measured quantity.
    pub measured: f64,
    /// The bound it is compared against.
    pub threshold: f64,
    /// Whether the comparison succeeded.
    pub pass: bool,
    /// What was measured, in one sentence.
    pub detail: &'static str,
}

impl CheckResult {
    /// `measured ≤ threshold`.
    fn at_most(name: &'static str, measured: f64, threshold: f64, detail: &'static str) -> Self {
        CheckResult { name, measured, threshold, pass: measured <= threshold, detail }
    }

    /// `measured < threshold` (strict comparisons, e.g. negativity).
    fn below(name: &'static str, measured: f64, threshold: f64, detail: &'static str) -> Self {
        CheckResult { name, measured, threshold, pass: measured < threshold, detail }
    }

    /// `measured ≥ threshold` (rates and orders).
    fn at_least(name: &'static str, measured: f64, threshold: f64, detail: &'static str) -> Self {
        CheckResult { name, measured, threshold, pass: measured >= threshold, detail }
    }
}

/// Outcome of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Seed that drove the randomized spot checks.
    pub seed: u64,
    /// Whether the expensive refinement study was skipped.
    pub quick: bool,
    /// All rows, in a fixed order.
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    /// True when every row passed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn gain(k: f64) -> Result<Gain> {
    Gain::new(k)
}

fn tau_gap(point: &SpectralPoint) -> f64 {
    let theta = (point.n as f64 + 0.5) * std::f64::consts::PI;
    point.n as f64 * (point.tau - theta).norm()
}

fn spectral_checks(checks: &mut Vec<CheckResult>) -> Result<SpectrumReport> {
    let k1 = gain(1.0)?;
    let report = compute_spectrum(60, k1, TOL)?;
    let at = |n: usize| -> &SpectralPoint {
        report.points.iter().find(|p| p.n == n).expect("index present up to n_max")
    };
    let worst = report.points.iter().filter(|p| (10..=60).contains(&p.n)).map(tau_gap).fold(
        0.0,
        f64::max,
    );
    checks.push(CheckResult::at_most(
        "branch asymptotics",
        worst,
        3.0 * tau_gap(at(10)),
        "max of n·|tau_n - (n+1/2)pi| over n in [10,60] against 3x its value at n = 10",
    ));
    checks.push(CheckResult::below(
        "real-part approach",
        (at(60).lambda().re + 2.0).abs(),
        (at(10).lambda().re + 2.0).abs(),
        "|Re lambda + 2| must shrink between n = 10 and n = 60 at unit gain",
    ));

    let mut worst_tail = 0.0f64;
    for k in [0.5, 1.0, 2.0, 4.0] {
        let p = find_eigenvalue(50, gain(k)?, TOL)?;
        let target = 2.0 / k;
        worst_tail = worst_tail.max((p.lambda().re + target).abs() / target);
    }
    checks.push(CheckResult::at_most(
        "gain law",
        worst_tail,
        0.2,
        "relative distance of Re lambda_50 from -2/k across gains {0.5, 1, 2, 4}",
    ));

    let mut rightmost = f64::NEG_INFINITY;
    for k in [0.5, 1.0, 2.0] {
        let damped = compute_spectrum(40, gain(k)?, TOL)?;
        for p in &damped.points {
            rightmost = rightmost.max(p.lambda().re);
        }
    }
    checks.push(CheckResult::below(
        "damped stability",
        rightmost,
        0.0,
        "largest Re lambda across all computed eigenvalues for gains {0.5, 1, 2}",
    ));

    let undamped = compute_spectrum(40, gain(0.0)?, TOL)?;
    let axis = undamped
        .points
        .iter()
        .map(|p| p.lambda().re.abs())
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most(
        "undamped axis",
        axis,
        1e-10,
        "largest |Re lambda| for the conservative beam, whose spectrum is imaginary",
    ));

    Ok(report)
}

/// Relative gaps between the three lowest root-finder eigenvalues and the
/// discrete-generator oracle at panel count `m`.
fn oracle_gaps(m: usize) -> Result<[f64; 3]> {
    let k1 = gain(1.0)?;
    let gen = build_generator(m, k1)?;
    let low = compute_spectrum(3, k1, TOL)?;
    let mut gaps = [0.0f64; 3];
    for (slot, n) in [0usize, 1, 2].into_iter().enumerate() {
        let point = low
            .points
            .iter()
            .find(|p| p.n == n)
            .expect("lowest indices present at unit gain");
        let target = point.lambda();
        let discrete = oracle_eigenvalue(&gen, target * 1.001)?;
        gaps[slot] = (discrete - target).norm() / target.norm();
    }
    Ok(gaps)
}

fn oracle_checks(checks: &mut Vec<CheckResult>, quick: bool) -> Result<()> {
    let coarse = oracle_gaps(400)?;
    checks.push(CheckResult::at_most(
        "oracle agreement",
        coarse.iter().copied().fold(0.0, f64::max),
        1e-2,
        "relative gap between the three lowest roots and the 400-panel generator oracle",
    ));
    if quick {
        return Ok(());
    }
    let fine = oracle_gaps(800)?;
    let ratio = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| f / c)
        .fold(0.0, f64::max);
    checks.push(CheckResult::below(
        "oracle gap shrinks",
        ratio,
        1.0,
        "largest fine/coarse gap ratio when the grid is refined from 400 to 800 panels",
    ));
    let order = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (c / f).log2())
        .fold(f64::INFINITY, f64::min);
    checks.push(CheckResult::at_least(
        "oracle refinement order",
        order,
        1.5,
        "smallest observed convergence order of the gap; the one-sided boundary \
         stencils hold it near first order, so this row reports an honest failure",
    ));
    Ok(())
}

fn mode_checks(checks: &mut Vec<CheckResult>) -> Result<()> {
    let k1 = gain(1.0)?;
    let norm_at = |n: usize| -> Result<f64> {
        let point = find_eigenvalue(n, k1, TOL)?;
        let mode = build_mode(&point, 1024)?;
        l2_norm(&profile_f(&mode))
    };
    let gap50 = (norm_at(50)? - 2.0).abs();
    let gap20 = (norm_at(20)? - 2.0).abs();
    checks.push(CheckResult::at_most(
        "norm limit",
        gap50,
        0.1,
        "distance of the 50th scaled-mode norm from its limit value 2",
    ));
    checks.push(CheckResult::below(
        "norm limit tightens",
        gap50,
        gap20,
        "the norm gap at n = 50 must undercut the gap at n = 20",
    ));

    let entries = closeness_tail(10, 80, k1, 1024)?;
    let d10 = entries[0].d_n;
    let bound = entries
        .iter()
        .map(|e| (e.n * e.n) as f64 * e.d_n)
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most(
        "quadratic closeness",
        bound,
        4.0 * 100.0 * d10,
        "max of n²·d_n over n in [10,80] against 4x its value at n = 10",
    ));
    let head: f64 = entries.iter().filter(|e| e.n <= 40).map(|e| e.d_n).sum();
    let tail: f64 = entries.iter().filter(|e| e.n >= 40).map(|e| e.d_n).sum();
    checks.push(CheckResult::below(
        "closeness tail sum",
        tail,
        head,
        "sum of d_n over [40,80] must fall strictly below the sum over [10,40]",
    ));
    Ok(())
}

fn resolvent_checks(checks: &mut Vec<CheckResult>, rng: &mut ChaCha8Rng) -> Result<()> {
    let psis = [
        Polynomial::new(vec![1.0]),
        Polynomial::new(vec![0.0, 1.0]),
        Polynomial::new(vec![0.0, 0.0, 1.0]),
        Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]),
    ];
    let phis = [Polynomial::zero(), Polynomial::new(vec![0.0, 0.0, 1.0, -1.0])];
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0] {
        let g = gain(k)?;
        for phi in &phis {
            for psi in &psis {
                let rep = verify_resolvent(phi, psi, g);
                worst = worst.max(rep.identity_residual);
                for r in rep.bc_residuals {
                    worst = worst.max(r);
                }
            }
        }
    }
    checks.push(CheckResult::at_most(
        "resolvent identity",
        worst,
        1e-12,
        "worst defect of the inverse over the monomial-by-profile-by-gain test block",
    ));

    let unit_load = StatePair::from_functions(256, |_| 0.0, |_| 1.0);
    let out = apply_resolvent(&unit_load, gain(1.0)?)?;
    let closed = out
        .grid
        .iter()
        .zip(&out.phi)
        .map(|(&x, &u)| {
            let reference = (-3.0 * x * x + 5.0 * x.powi(3) - 2.0 * x.powi(4)) / 48.0;
            (u - reference).abs()
        })
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most(
        "resolvent closed form",
        closed,
        1e-12,
        "pointwise gap between the unit-load inverse and its quartic closed form",
    ));

    let mut seeded = 0.0f64;
    for _ in 0..5 {
        let psi = Polynomial::new((0..6).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let envelope = Polynomial::new(vec![0.0, 0.0, 1.0, -1.0]);
        let modulation =
            Polynomial::new((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let phi = envelope.mul(&modulation);
        let g = gain(rng.gen_range(0.5..2.0))?;
        let rep = verify_resolvent(&phi, &psi, g);
        seeded = seeded.max(rep.identity_residual);
        for r in rep.bc_residuals {
            seeded = seeded.max(r);
        }
    }
    checks.push(CheckResult::at_most(
        "resolvent identity (seeded)",
        seeded,
        1e-10,
        "worst defect over five seeded random input pairs with random gains",
    ));
    Ok(())
}

fn seeded_spectrum_checks(checks: &mut Vec<CheckResult>, rng: &mut ChaCha8Rng) -> Result<()> {
    let k = gain(rng.gen_range(0.6..1.8))?;
    let point = find_eigenvalue(12, k, TOL)?;
    checks.push(CheckResult::at_most(
        "seeded root residual",
        point.residual,
        10.0 * TOL,
        "scaled characteristic residual of a branch root at a seeded random gain",
    ));
    let mode = build_mode(&point, 256)?;
    let clamped = mode.phi.first().map_or(f64::INFINITY, |c| c.norm());
    let pinned = mode.phi.last().map_or(f64::INFINITY, |c| c.norm());
    checks.push(CheckResult::at_most(
        "seeded mode pinning",
        clamped.max(pinned),
        1e-8,
        "end-point displacement of the mode built on the seeded root (both ends vanish)",
    ));
    Ok(())
}

fn simulation_checks(
    checks: &mut Vec<CheckResult>,
    spectrum_k1: &SpectrumReport,
) -> Result<()> {
    let k1 = gain(1.0)?;
    let reference = SimConfig {
        m: 200,
        dt: 1e-3,
        t_final: 5.0,
        k: k1,
        ic: InitialCondition::Poly,
        record_every: 1,
    };
    let trace = simulate(&reference)?;
    let growth = trace
        .energy
        .windows(2)
        .map(|pair| (pair[1] - pair[0]) / pair[0])
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most(
        "energy monotone",
        growth.max(0.0),
        1e-10,
        "largest relative per-step energy increase of the damped reference run",
    ));
    let defect = dissipation_check(&trace)?;
    checks.push(CheckResult::at_most(
        "dissipation defect",
        defect,
        5e-3,
        "energy-balance defect of the reference run against the boundary power",
    ));
    let mut halved = reference.clone();
    halved.dt = 5e-4;
    let fine = dissipation_check(&simulate(&halved)?)?;
    checks.push(CheckResult::at_least(
        "dissipation defect order",
        (defect / fine).log2(),
        1.5,
        "convergence order of the balance defect when the time step is halved",
    ));

    let fit = fit_decay(&trace, (1.0, 5.0))?;
    let gen = build_generator(200, k1)?;
    let abscissa = generator_abscissa(&gen, spectrum_k1)?;
    let target = 2.0 * abscissa.abs();
    checks.push(CheckResult::at_most(
        "decay rate consistency",
        (fit.mu_hat - target).abs() / target,
        0.25,
        "relative gap between the fitted decay rate and twice the generator abscissa",
    ));

    let conservative = SimConfig {
        m: 200,
        dt: 1e-3,
        t_final: 2.0,
        k: gain(0.0)?,
        ic: InitialCondition::Poly,
        record_every: 1,
    };
    let trace0 = simulate(&conservative)?;
    let e0 = trace0.energy[0];
    let drift = trace0
        .energy
        .iter()
        .map(|e| (e - e0).abs() / e0)
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most(
        "undamped conservation",
        drift,
        1e-8,
        "largest relative energy drift of the conservative run over two time units",
    ));
    let fit0 = fit_decay(&trace0, (0.5, 2.0))?;
    checks.push(CheckResult::at_most(
        "undamped rate",
        fit0.mu_hat.abs(),
        1e-6,
        "fitted decay rate of the conservative run, which must vanish",
    ));
    Ok(())
}

/// Runs the verification suite.
///
/// `quick` skips the 800-panel oracle refinement study (the only expensive
/// block, and the one carrying the known-honest order failure). The returned
/// rows are in a fixed order and depend only on `seed`.
///
/// # Errors
/// Propagates the first module error encountered; a failed *check* is not an
/// error (it is a row with `pass == false`).
pub fn run_verification(seed: u64, quick: bool) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let spectrum_k1 = spectral_checks(&mut checks)?;
    oracle_checks(&mut checks, quick)?;
    mode_checks(&mut checks)?;
    resolvent_checks(&mut checks, &mut rng)?;
    seeded_spectrum_checks(&mut checks, &mut rng)?;
    simulation_checks(&mut checks, &spectrum_k1)?;
    Ok(VerifyReport { seed, quick, checks })
}
