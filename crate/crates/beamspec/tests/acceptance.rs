//! Acceptance gate: each test measures one headline property of the build
//! at its stated tolerance and prints a single `criterion N: PASS/FAIL`
//! line (visible with `--nocapture`, and always shown for failures).
//!
//! Criterion 4's refinement-order clause fails by honest measurement — see
//! the assertion message in [`criterion_4`] for the analysis. Criterion 10
//! (CLI determinism) lives in the CLI crate's own acceptance tests, next to
//! the binary it exercises.

use beamspec::{
    apply_resolvent, build_generator, closeness_tail, compute_spectrum, dissipation_check,
    find_eigenvalue, fit_decay, generator_abscissa, l2_norm, oracle_eigenvalue, profile_f,
    simulate, verify_resolvent, build_mode, Gain, InitialCondition, Polynomial, SimConfig,
    SpectralPoint, StatePair,
};
use num_complex::Complex64;

const TOL: f64 = 1e-12;

fn gain(k: f64) -> Gain {
    Gain::new(k).expect("acceptance gains are valid")
}

fn verdict(n: usize, pass: bool, detail: &str) {
    println!("criterion {n}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
}

fn fmt_gaps(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn tau_gap(p: &SpectralPoint) -> f64 {
    let theta = (p.n as f64 + 0.5) * std::f64::consts::PI;
    p.n as f64 * (p.tau - theta).norm()
}

#[test]
fn criterion_1() {
    let report = compute_spectrum(60, gain(1.0), TOL).expect("spectrum to n = 60");
    let at = |n: usize| -> &SpectralPoint {
        report.points.iter().find(|p| p.n == n).expect("branch index present")
    };
    let worst =
        report.points.iter().filter(|p| (10..=60).contains(&p.n)).map(tau_gap).fold(0.0, f64::max);
    let budget = 3.0 * tau_gap(at(10));
    let drift_60 = (at(60).lambda().re + 2.0).abs();
    let drift_10 = (at(10).lambda().re + 2.0).abs();
    let pass = worst <= budget && drift_60 < drift_10;
    verdict(
        1,
        pass,
        &format!(
            "max n·|tau_n - (n+1/2)pi| = {worst:.3e} vs budget {budget:.3e}; \
             |Re lambda + 2| falls {drift_10:.3e} -> {drift_60:.3e}"
        ),
    );
    assert!(worst <= budget, "branch gap {worst:.3e} exceeds 3x the n = 10 gap {budget:.3e}");
    assert!(drift_60 < drift_10, "|Re lambda + 2| must shrink along the branch");
}

#[test]
fn criterion_2() {
    let mut detail = String::new();
    let mut pass = true;
    for k in [0.5, 1.0, 2.0, 4.0] {
        let p = find_eigenvalue(50, gain(k), TOL).expect("branch root at n = 50");
        let target = 2.0 / k;
        let err = (p.lambda().re + target).abs();
        let ok = err <= 0.2 * target;
        pass &= ok;
        detail.push_str(&format!("k={k}: |Re lambda_50 + 2/k| = {err:.3e} (cap {:.3e}); ", 0.2 * target));
    }
    verdict(2, pass, detail.trim_end_matches("; "));
    assert!(pass, "gain law violated: {detail}");
}

#[test]
fn criterion_3() {
    let mut rightmost = f64::NEG_INFINITY;
    for k in [0.5, 1.0, 2.0] {
        let report = compute_spectrum(40, gain(k), TOL).expect("damped spectrum");
        for p in &report.points {
            rightmost = rightmost.max(p.lambda().re);
        }
    }
    let undamped = compute_spectrum(40, gain(0.0), TOL).expect("undamped spectrum");
    let axis = undamped.points.iter().map(|p| p.lambda().re.abs()).fold(0.0, f64::max);
    let pass = rightmost < 0.0 && axis <= 1e-10;
    verdict(
        3,
        pass,
        &format!("rightmost damped Re lambda = {rightmost:.6e}; undamped |Re lambda| = {axis:.3e}"),
    );
    assert!(rightmost < 0.0, "damped spectrum reaches Re lambda = {rightmost:.6e}");
    assert!(axis <= 1e-10, "undamped spectrum strays off the axis by {axis:.3e}");
}

#[test]
fn criterion_4() {
    let k1 = gain(1.0);
    let low = compute_spectrum(3, k1, TOL).expect("lowest roots");
    let targets: Vec<Complex64> = [0usize, 1, 2]
        .iter()
        .map(|&n| {
            low.points.iter().find(|p| p.n == n).expect("lowest indices present").lambda()
        })
        .collect();
    let gaps_at = |m: usize| -> Vec<f64> {
        let gen = build_generator(m, k1).expect("generator");
        targets
            .iter()
            .map(|&t| {
                let discrete = oracle_eigenvalue(&gen, t * 1.001).expect("oracle converges");
                (discrete - t).norm() / t.norm()
            })
            .collect()
    };
    let coarse = gaps_at(400);
    let fine = gaps_at(800);
    let agree = coarse.iter().all(|&g| g <= 1e-2);
    let shrink = coarse.iter().zip(&fine).all(|(c, f)| f < c);
    let orders: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (c / f).log2()).collect();
    let order_ok = orders.iter().all(|&o| o >= 1.5);
    verdict(
        4,
        agree && shrink && order_ok,
        &format!(
            "gaps at m=400: {} (cap 1e-2); shrink under refinement: {shrink}; \
             observed orders {orders:.2?} vs required 1.5",
            fmt_gaps(&coarse)
        ),
    );
    assert!(agree, "root finder and m=400 oracle disagree: gaps {}", fmt_gaps(&coarse));
    assert!(
        shrink,
        "halving h must reduce every gap: {} -> {}",
        fmt_gaps(&coarse),
        fmt_gaps(&fine)
    );
    assert!(
        order_ok,
        "refinement-order clause fails by honest measurement: observed orders {orders:.2?}. \
         The discrete generator closes its stencils one-sidedly at the damped tip (third-order \
         slope extraction feeding a first-order-consistent moment row), so the eigenvalue gap \
         is dominated by an O(h) boundary term; measured orders sit near 1, and no consistent \
         scheme of this family reaches 1.5 without widening the boundary closure. The 1% \
         agreement and monotone-shrink clauses above hold; this assertion records the gap."
    );
}

#[test]
fn criterion_5() {
    let norm_at = |n: usize| -> f64 {
        let p = find_eigenvalue(n, gain(1.0), TOL).expect("branch root");
        let mode = build_mode(&p, 1024).expect("mode on the 1024 grid");
        l2_norm(&profile_f(&mode)).expect("Simpson norm")
    };
    let gap50 = (norm_at(50) - 2.0).abs();
    let gap20 = (norm_at(20) - 2.0).abs();
    let pass = gap50 <= 0.1 && gap50 < gap20;
    verdict(5, pass, &format!("|norm(F_50) - 2| = {gap50:.3e} (cap 0.1), at n = 20: {gap20:.3e}"));
    assert!(gap50 <= 0.1, "norm limit violated: {gap50:.3e}");
    assert!(gap50 < gap20, "norm gap must tighten with n: {gap20:.3e} -> {gap50:.3e}");
}

#[test]
fn criterion_6() {
    let entries = closeness_tail(10, 80, gain(1.0), 1024).expect("closeness entries");
    let d10 = entries[0].d_n;
    let worst = entries.iter().map(|e| (e.n * e.n) as f64 * e.d_n).fold(0.0, f64::max);
    let cap = 4.0 * 100.0 * d10;
    let head: f64 = entries.iter().filter(|e| e.n <= 40).map(|e| e.d_n).sum();
    let tail: f64 = entries.iter().filter(|e| e.n >= 40).map(|e| e.d_n).sum();
    let pass = worst <= cap && tail < head;
    verdict(
        6,
        pass,
        &format!("max n²·d_n = {worst:.3e} (cap {cap:.3e}); tail sum {tail:.3e} < head sum {head:.3e}"),
    );
    assert!(worst <= cap, "n²·d_n escapes its bound: {worst:.3e} > {cap:.3e}");
    assert!(tail < head, "closeness tail sum must fall: {tail:.3e} vs {head:.3e}");
}

#[test]
fn criterion_7() {
    let psis = [
        Polynomial::new(vec![1.0]),
        Polynomial::new(vec![0.0, 1.0]),
        Polynomial::new(vec![0.0, 0.0, 1.0]),
        Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]),
    ];
    let phis = [Polynomial::zero(), Polynomial::new(vec![0.0, 0.0, 1.0, -1.0])];
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0] {
        for phi in &phis {
            for psi in &psis {
                let rep = verify_resolvent(phi, psi, gain(k));
                worst = worst.max(rep.identity_residual);
                for r in rep.bc_residuals {
                    worst = worst.max(r);
                }
            }
        }
    }
    let unit_load = StatePair::from_functions(256, |_| 0.0, |_| 1.0);
    let out = apply_resolvent(&unit_load, gain(1.0)).expect("resolvent application");
    let closed = out
        .grid
        .iter()
        .zip(&out.phi)
        .map(|(&x, &u)| {
            ((-3.0 * x * x + 5.0 * x.powi(3) - 2.0 * x.powi(4)) / 48.0 - u).abs()
        })
        .fold(0.0, f64::max);
    let pass = worst <= 1e-12 && closed <= 1e-12;
    verdict(
        7,
        pass,
        &format!("worst inverse residual {worst:.3e} (cap 1e-12); closed-form gap {closed:.3e}"),
    );
    assert!(worst <= 1e-12, "resolvent residual {worst:.3e} above 1e-12");
    assert!(closed <= 1e-12, "unit-load closed form missed by {closed:.3e}");
}

fn reference_config() -> SimConfig {
    SimConfig {
        m: 200,
        dt: 1e-3,
        t_final: 5.0,
        k: gain(1.0),
        ic: InitialCondition::Poly,
        record_every: 1,
    }
}

#[test]
fn criterion_8() {
    let trace = simulate(&reference_config()).expect("reference run");
    let growth = trace
        .energy
        .windows(2)
        .map(|pair| (pair[1] - pair[0]) / pair[0])
        .fold(0.0, f64::max)
        .max(0.0);
    let defect = dissipation_check(&trace).expect("balance check");
    let mut halved = reference_config();
    halved.dt = 5e-4;
    let fine = dissipation_check(&simulate(&halved).expect("halved run")).expect("balance check");
    let order = (defect / fine).log2();
    let pass = growth <= 1e-10 && defect <= 5e-3 && order >= 1.5;
    verdict(
        8,
        pass,
        &format!(
            "max relative energy growth {growth:.3e} (cap 1e-10); defect {defect:.3e} \
             (cap 5e-3); dt-refinement order {order:.3} (need 1.5)"
        ),
    );
    assert!(growth <= 1e-10, "energy grows by {growth:.3e} in one step");
    assert!(defect <= 5e-3, "balance defect {defect:.3e} above 5e-3");
    assert!(order >= 1.5, "defect order {order:.3} below 1.5");
}

#[test]
fn criterion_9() {
    let trace = simulate(&reference_config()).expect("reference run");
    let fit = fit_decay(&trace, (1.0, 5.0)).expect("decay fit");
    let gen = build_generator(200, gain(1.0)).expect("generator");
    let report = compute_spectrum(20, gain(1.0), TOL).expect("spectrum for shift candidates");
    let abscissa = generator_abscissa(&gen, &report).expect("discrete abscissa");
    let target = 2.0 * abscissa.abs();
    let rel = (fit.mu_hat - target).abs() / target;

    let conservative = SimConfig { k: gain(0.0), t_final: 2.0, ..reference_config() };
    let trace0 = simulate(&conservative).expect("conservative run");
    let fit0 = fit_decay(&trace0, (0.5, 2.0)).expect("flat fit");
    let pass = rel <= 0.25 && fit0.mu_hat.abs() <= 1e-6;
    verdict(
        9,
        pass,
        &format!(
            "mu_hat = {:.6} vs 2|abscissa| = {target:.6} (relative gap {rel:.3e}, cap 0.25); \
             undamped |mu_hat| = {:.3e} (cap 1e-6)",
            fit.mu_hat,
            fit0.mu_hat.abs()
        ),
    );
    assert!(rel <= 0.25, "fitted rate strays from the spectrum by {rel:.3e}");
    assert!(fit0.mu_hat.abs() <= 1e-6, "undamped rate {} must vanish", fit0.mu_hat);
}
