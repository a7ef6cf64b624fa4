//! Eigenvalue localization for the damped beam via damped Newton iteration.
//!
//! For large mode index the roots of the characteristic function sit near the
//! seeds `(n + 1/2)*pi` on the real axis, so indices `n >= 3` are found by
//! Newton iteration on the scaled characteristic function started from those
//! seeds, each converged root validated to stay inside its own seed cell.
//!
//! The lowest modes obey no such asymptotic law — for moderate gains the
//! census even contains an overdamped root on the diagonal `tau = s*(1+i)`
//! whose eigenvalue `lambda = -2 s^2` is real. Those are recovered by a
//! rectangle sweep over `[0.5, 3.5*pi] x [-(2k+2), 2k+2]`: an
//! argument-principle count of zeros along the boundary fixes how many roots
//! the rectangle holds, a 40x40 grid of Newton starts locates them, and the
//! two numbers must agree (the grid is refined to 80x80 once on mismatch).
//! Sweep-only roots are assigned the indices below 3 in increasing `Im lambda`
//! order. Roots outside the rectangle and below index 3 (for very small gains
//! the overdamped pair wanders far off) are outside the operational guarantee
//! and are not reported.
//!
//! Eigenvalues are recovered as `lambda = i*tau^2`; the conjugate family
//! `conj(lambda)` is implied and never stored.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfun::{eval_char_derivative, eval_char_scaled, Gain};
use crate::error::{BeamError, Result};

/// Newton iteration cap per root.
const MAX_NEWTON: usize = 50;
/// Step-halving cap inside one Newton update.
const MAX_HALVINGS: usize = 8;
/// Converged roots closer than this are the same root.
const DEDUP_RADIUS: f64 = 1e-6;
/// Seed-cell radius for the basin-validation check.
const BASIN_RADIUS: f64 = PI / 2.0;

/// Smallest index served by asymptotic seeding: the undamped equation has its
/// first root in the `n = 1` seed cell, while for `k > 0` indices below 3 are
/// owned by the rectangle sweep.
#[inline]
pub fn n_min(gain: Gain) -> usize {
    if gain.is_zero() {
        1
    } else {
        3
    }
}

/// One converged root of the characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    /// Mode index (sweep roots occupy the indices below 3).
    pub n: usize,
    /// Root of the characteristic equation, `Re tau > 0`, `Im tau >= 0`.
    pub tau: Complex64,
    /// `|scaled characteristic value|` at `tau`.
    pub residual: f64,
    /// Newton updates spent.
    pub iterations: usize,
}

impl SpectralPoint {
    /// The eigenvalue `lambda = i*tau^2`, recomputed on access so it can never
    /// drift from `tau`.
    #[inline]
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(0.0, 1.0) * self.tau * self.tau
    }
}

/// Distance of one computed root from the closed-form reference grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteError {
    /// Mode index.
    pub n: usize,
    /// `|tau_n - (n + 1/2)*pi|`.
    pub err_tau: f64,
    /// `|tau_n - (n + 1/4)*pi|`, reported only for `k = 0` where the roots of
    /// `tan w = tanh w` actually approach the quarter grid; for `k > 0` this
    /// is `None`.
    pub err_tau_quarter: Option<f64>,
    /// `|Re lambda_n + 2/k|` for `k > 0`, `|Re lambda_n|` for `k = 0`.
    pub err_re_lambda: f64,
}

/// Computed spectrum slice, sorted by `Im lambda` strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Feedback gain the spectrum belongs to.
    pub k: Gain,
    /// Points sorted by `Im lambda`, no duplicates within the dedup radius.
    pub points: Vec<SpectralPoint>,
    /// Newton convergence tolerance on the scaled residual.
    pub tolerance: f64,
    /// Per-point distances from the asymptotic reference grids.
    pub asymptote_errors: Vec<AsymptoteError>,
}

/// Damped Newton on the scaled characteristic function.
///
/// Accepts the first trial step (halved up to [`MAX_HALVINGS`] times) that
/// decreases `|g|`; if no halving decreases it, the smallest trial step is
/// taken anyway and the iteration cap decides. Returns `(root, residual,
/// iterations)`.
fn damped_newton(seed: Complex64, gain: Gain, tol: f64) -> Result<(Complex64, f64, usize)> {
    let mut tau = seed;
    let mut value = eval_char_scaled(tau, gain)?;
    let mut residual = value.norm();
    for it in 0..=MAX_NEWTON {
        if residual < tol {
            return Ok((tau, residual, it));
        }
        if it == MAX_NEWTON {
            break;
        }
        let der = eval_char_derivative(tau, gain)?;
        if der.norm() == 0.0 {
            break;
        }
        let full_step = value / der;
        let mut scale = 1.0;
        let mut accepted = None;
        let mut fallback: Option<(Complex64, Complex64)> = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = tau - scale * full_step;
            if let Ok(v) = eval_char_scaled(cand, gain) {
                if v.norm() < residual {
                    accepted = Some((cand, v));
                    break;
                }
                // Smallest evaluable step so far; used when nothing decreases.
                fallback = Some((cand, v));
            }
            scale *= 0.5;
        }
        match accepted.or(fallback) {
            Some((cand, v)) => {
                tau = cand;
                value = v;
                residual = value.norm();
            }
            None => break,
        }
    }
    Err(BeamError::NoConvergence {
        context: format!("damped Newton from seed ({:.6}, {:.6})", seed.re, seed.im),
        iterations: MAX_NEWTON,
    })
}

/// Finds the root in the seed cell of index `n` by Newton iteration from
/// `tau = (n + 1/2)*pi`.
///
/// # Errors
/// * `InvalidConfig` — `n` below [`n_min`] or `tol` not positive.
/// * `NoConvergence` — the residual did not reach `tol` within 50 updates.
/// * `BasinEscape` — the iteration converged outside the seed cell
///   (`|tau - seed| >= pi/2`), i.e. onto a different mode's root.
pub fn find_eigenvalue(n: usize, gain: Gain, tol: f64) -> Result<SpectralPoint> {
    if n < n_min(gain) {
        return Err(BeamError::InvalidConfig(format!(
            "mode index {n} below the asymptotic-seeding floor {}",
            n_min(gain)
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(BeamError::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let seed = Complex64::new((n as f64 + 0.5) * PI, 0.0);
    let (tau, residual, iterations) = damped_newton(seed, gain, tol).map_err(|e| match e {
        BeamError::NoConvergence { iterations, .. } => BeamError::NoConvergence {
            context: format!("Newton iteration for mode index {n}"),
            iterations,
        },
        other => other,
    })?;
    let distance = (tau - seed).norm();
    if distance >= BASIN_RADIUS {
        return Err(BeamError::BasinEscape { n, distance });
    }
    Ok(SpectralPoint { n, tau, residual, iterations })
}

/// Winding number of the scaled characteristic function along the rectangle
/// boundary, counting the zeros inside (the function is analytic there: the
/// cosh poles sit on the imaginary axis, left of the rectangle).
fn boundary_winding(
    re_range: (f64, f64),
    im_range: (f64, f64),
    gain: Gain,
) -> Result<i64> {
    let corners = [
        Complex64::new(re_range.0, im_range.0),
        Complex64::new(re_range.1, im_range.0),
        Complex64::new(re_range.1, im_range.1),
        Complex64::new(re_range.0, im_range.1),
        Complex64::new(re_range.0, im_range.0),
    ];
    let phase = |z: Complex64| -> Result<f64> { Ok(eval_char_scaled(z, gain)?.arg()) };
    let wrap = |d: f64| -> f64 {
        let mut d = d;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        d
    };
    let mut total = 0.0;
    for pair in corners.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        // Segment stack: refine until each phase increment is below pi/2, so
        // no wrap ambiguity survives near boundary-adjacent roots.
        let n0 = 256;
        let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
        let mut samples = Vec::with_capacity(n0 + 1);
        for i in 0..=n0 {
            let t = i as f64 / n0 as f64;
            samples.push((t, phase(a + (b - a) * t)?));
        }
        for w in samples.windows(2) {
            stack.push((w[0].0, w[0].1, w[1].0, w[1].1, 0));
        }
        while let Some((t0, p0, t1, p1, depth)) = stack.pop() {
            let d = wrap(p1 - p0);
            if d.abs() <= PI / 2.0 || depth >= 48 {
                if depth >= 48 {
                    return Err(BeamError::InvalidConfig(
                        "low-mode sweep: a root sits on the rectangle boundary".into(),
                    ));
                }
                total += d;
            } else {
                let tm = 0.5 * (t0 + t1);
                let pm = phase(a + (b - a) * tm)?;
                stack.push((t0, p0, tm, pm, depth + 1));
                stack.push((tm, pm, t1, p1, depth + 1));
            }
        }
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(BeamError::InvalidConfig(format!(
            "low-mode sweep: boundary winding {turns:.3} is not close to an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Locates every root inside the low-mode rectangle by Newton polish from a
/// uniform grid of starts, checked against the boundary winding count.
fn low_mode_sweep(gain: Gain, tol: f64) -> Result<Vec<(Complex64, f64, usize)>> {
    let re_range = (0.5, 3.5 * PI);
    let im_bound = 2.0 * gain.k() + 2.0;
    let im_range = (-im_bound, im_bound);
    let expected = boundary_winding(re_range, im_range, gain)?;
    for grid in [40usize, 80] {
        let cells: Vec<(usize, usize)> =
            (0..grid).flat_map(|i| (0..grid).map(move |j| (i, j))).collect();
        let polished: Vec<Option<(Complex64, f64, usize)>> = cells
            .par_iter()
            .map(|&(i, j)| {
                let re = re_range.0
                    + (re_range.1 - re_range.0) * (i as f64 + 0.5) / grid as f64;
                let im = im_range.0
                    + (im_range.1 - im_range.0) * (j as f64 + 0.5) / grid as f64;
                match damped_newton(Complex64::new(re, im), gain, tol) {
                    Ok((tau, res, its))
                        if tau.re > re_range.0 - 1e-9
                            && tau.re < re_range.1 + 1e-9
                            && tau.im > im_range.0 - 1e-9
                            && tau.im < im_range.1 + 1e-9 =>
                    {
                        Some((tau, res, its))
                    }
                    _ => None,
                }
            })
            .collect();
        // Deterministic dedup in fixed cell order.
        let mut roots: Vec<(Complex64, f64, usize)> = Vec::new();
        for cand in polished.into_iter().flatten() {
            if roots.iter().all(|(t, _, _)| (*t - cand.0).norm() > DEDUP_RADIUS) {
                roots.push(cand);
            }
        }
        if roots.len() as i64 == expected {
            roots.sort_by(|a, b| {
                let la = (Complex64::new(0.0, 1.0) * a.0 * a.0).im;
                let lb = (Complex64::new(0.0, 1.0) * b.0 * b.0).im;
                la.total_cmp(&lb)
            });
            return Ok(roots);
        }
        if grid == 80 {
            return Err(BeamError::InvalidConfig(format!(
                "low-mode sweep: boundary winding counts {expected} roots but the \
                 polish grid found {}",
                roots.len()
            )));
        }
    }
    unreachable!("both sweep grids returned before this point")
}

/// Computes the spectrum slice for indices up to `n_max`: asymptotically
/// seeded roots for `n >= n_min` plus, for `k > 0`, every low-mode root the
/// rectangle sweep recovers (assigned the indices below 3).
///
/// # Errors
/// Propagates `find_eigenvalue` failures (the failing index is in the error),
/// and reports `InvalidConfig` when the sweep census is inconsistent or more
/// than three sweep-only roots compete for the low indices.
pub fn compute_spectrum(n_max: usize, gain: Gain, tol: f64) -> Result<SpectrumReport> {
    if n_max < n_min(gain) {
        return Err(BeamError::InvalidConfig(format!(
            "n_max = {n_max} is below the smallest seeded index {}",
            n_min(gain)
        )));
    }
    let seeded: Vec<SpectralPoint> = (n_min(gain)..=n_max)
        .into_par_iter()
        .map(|n| find_eigenvalue(n, gain, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut points = if gain.is_zero() {
        seeded
    } else {
        let sweep = low_mode_sweep(gain, tol)?;
        let sweep_only: Vec<(Complex64, f64, usize)> = sweep
            .into_iter()
            .filter(|(t, _, _)| seeded.iter().all(|p| (p.tau - t).norm() > DEDUP_RADIUS))
            .collect();
        let m = sweep_only.len();
        if m > 3 {
            return Err(BeamError::InvalidConfig(format!(
                "low-mode sweep found {m} roots below index 3; only 3 index slots exist"
            )));
        }
        let mut all = Vec::with_capacity(m + seeded.len());
        for (offset, (tau, residual, iterations)) in sweep_only.into_iter().enumerate() {
            all.push(SpectralPoint { n: 3 - m + offset, tau, residual, iterations });
        }
        all.extend(seeded);
        all
    };
    points.sort_by(|a, b| a.lambda().im.total_cmp(&b.lambda().im));
    for pair in points.windows(2) {
        if (pair[0].tau - pair[1].tau).norm() < DEDUP_RADIUS
            || pair[0].lambda().im >= pair[1].lambda().im
        {
            return Err(BeamError::InvalidConfig(format!(
                "mode indices {} and {} collided on the same root",
                pair[0].n, pair[1].n
            )));
        }
    }
    let asymptote_errors = points
        .iter()
        .map(|p| {
            let half = (p.n as f64 + 0.5) * PI;
            let err_tau = (p.tau - half).norm();
            let err_tau_quarter = if gain.is_zero() {
                Some((p.tau - (p.n as f64 + 0.25) * PI).norm())
            } else {
                None
            };
            let err_re_lambda = if gain.is_zero() {
                p.lambda().re.abs()
            } else {
                (p.lambda().re + 2.0 / gain.k()).abs()
            };
            AsymptoteError { n: p.n, err_tau, err_tau_quarter, err_re_lambda }
        })
        .collect();
    Ok(SpectrumReport { k: gain, points, tolerance: tol, asymptote_errors })
}

/// Largest real part over the computed spectrum (the implied conjugates share
/// the same real parts, so they cannot change the maximum).
///
/// # Errors
/// `EmptyReport` if the report has no points.
pub fn spectral_abscissa(report: &SpectrumReport) -> Result<f64> {
    report
        .points
        .iter()
        .map(|p| p.lambda().re)
        .max_by(f64::total_cmp)
        .ok_or(BeamError::EmptyReport)
}
