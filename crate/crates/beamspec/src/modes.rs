//! Eigenfunction construction and Riesz-basis diagnostics.
//!
//! The eigenfunction attached to a root `tau` is
//!
//! ```text
//! phi(x) = a1*(cos(tau*x) - cosh(tau*x)) + a2*(sin(tau*x) - sinh(tau*x)),
//! a1 = sin(tau) - sinh(tau),   a2 = cosh(tau) - cos(tau),
//! ```
//!
//! which vanishes with its slope at the clamped end by construction. The
//! hyperbolic content makes every naive sample overflow around mode ~450, so
//! everything here works with the tilde-scaled function `e^{-tau} * phi` and
//! its derivatives, expanded into exponentials whose real exponents are all
//! nonpositive on `[0, 1]`:
//!
//! ```text
//! e^{-tau} phi^(m)(x) = tau^m * [ a1~*cycC_m(x) + a2~*cycS_m(x)
//!                                 - term_plus(x) + (-1)^m * em(x) ],
//! a1~ = -1/2 + sin(tau)*eps + eps^2/2,      eps = e^{-tau},
//! a2~ =  1/2 - cos(tau)*eps + eps^2/2,
//! term_plus(x) = [ (sin(tau) - cos(tau))*e^{-tau(1-x)} + e^{-tau(2-x)} ] / 2,
//! em(x)        = [ 1 - (sin(tau) + cos(tau))*eps ] * e^{-tau*x} / 2,
//! ```
//!
//! where `cycC`/`cycS` cycle through `±cos(tau x)`, `±sin(tau x)` with the
//! derivative order `m`. The fourth derivative reuses the `m = 0` bracket
//! times `tau^4`, so the mode satisfies its differential equation identically.
//!
//! The diagnostics compare the scaled profile
//! `F_n = 2 tau_n^{-2} e^{-tau_n} (phi_n'', lambda_n phi_n)` against the
//! closed-form reference profile `G_n` built from `theta = (n + 1/2)*pi`,
//! using the componentwise norm `‖(c1, c2)‖ = ‖c1‖_{L²} + ‖c2‖_{L²}` (the
//! normalization under which `‖F_n‖ → 2`). Closeness is the squared distance
//! `d_n = ‖F_n − G_n‖²`, whose `n²`-scaled sequence staying bounded is the
//! quadratic-closeness diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfun::Gain;
use crate::error::{BeamError, Result};
use crate::quadrature::simpson;
use crate::spectrum::{find_eigenvalue, n_min, SpectralPoint};

/// Newton tolerance used when this module has to locate roots itself.
const ROOT_TOL: f64 = 1e-12;
/// A mode whose scaled samples all fall below this is a spurious root.
const DEGENERACY_FLOOR: f64 = 1e-14;

/// One sampled eigenfunction in the tilde-scaled representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeShape {
    /// The root this mode belongs to.
    pub point: SpectralPoint,
    /// Scaled coefficient `e^{-tau} * (sin(tau) - sinh(tau))`.
    pub a1: Complex64,
    /// Scaled coefficient `e^{-tau} * (cosh(tau) - cos(tau))`.
    pub a2: Complex64,
    /// Uniform sample points on `[0, 1]`.
    pub grid: Vec<f64>,
    /// Samples of `e^{-tau} * phi`.
    pub phi: Vec<Complex64>,
    /// Samples of `e^{-tau} * phi''`, evaluated analytically.
    pub phi2: Vec<Complex64>,
}

/// Which scaled profile a [`ModeProfile`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `2 tau^{-2} e^{-tau} (phi'', lambda*phi)` from a computed mode.
    F,
    /// The closed-form reference profile built from `(n + 1/2)*pi`.
    G,
}

/// Two-component profile sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    /// Mode index.
    pub n: usize,
    /// Profile family.
    pub kind: ProfileKind,
    /// Uniform sample points on `[0, 1]`.
    pub grid: Vec<f64>,
    /// First component (scaled curvature).
    pub comp1: Vec<Complex64>,
    /// Second component (scaled velocity).
    pub comp2: Vec<Complex64>,
}

/// One row of the closeness diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessEntry {
    /// Mode index.
    pub n: usize,
    /// Squared profile distance `‖F_n − G_n‖²`.
    pub d_n: f64,
    /// Running sum of `d_j` for `j` up to `n`.
    pub partial_sum: f64,
}

/// Pointwise evaluator for `e^{-tau} * phi^(m)` at any `x` in `[0, 1]`.
pub(crate) struct ScaledEvaluator {
    tau: Complex64,
    a1: Complex64,
    a2: Complex64,
    sin_minus_cos: Complex64,
    em_coeff: Complex64,
}

impl ScaledEvaluator {
    pub(crate) fn new(tau: Complex64) -> Self {
        let eps = (-tau).exp();
        let (s1, c1) = (tau.sin(), tau.cos());
        ScaledEvaluator {
            tau,
            a1: Complex64::new(-0.5, 0.0) + s1 * eps + eps * eps * 0.5,
            a2: Complex64::new(0.5, 0.0) - c1 * eps + eps * eps * 0.5,
            sin_minus_cos: s1 - c1,
            em_coeff: Complex64::new(1.0, 0.0) - (s1 + c1) * eps,
        }
    }

    pub(crate) fn a1(&self) -> Complex64 {
        self.a1
    }

    pub(crate) fn a2(&self) -> Complex64 {
        self.a2
    }

    /// `e^{-tau} * phi^(m)(x)`; every exponential has a nonpositive real
    /// exponent, so no intermediate can overflow.
    pub(crate) fn derivative(&self, m: usize, x: f64) -> Complex64 {
        let tau = self.tau;
        let arg = tau * x;
        let (c, s) = (arg.cos(), arg.sin());
        let (cyc_c, cyc_s) = match m % 4 {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        };
        let term_plus =
            (self.sin_minus_cos * (-tau * (1.0 - x)).exp() + (-tau * (2.0 - x)).exp()) * 0.5;
        let em = self.em_coeff * (-tau * x).exp() * 0.5;
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        tau.powi(m as i32) * (self.a1 * cyc_c + self.a2 * cyc_s - term_plus + sign * em)
    }
}

fn validate_grid(grid_size: usize, floor: usize) -> Result<()> {
    if grid_size < floor || !grid_size.is_multiple_of(2) {
        return Err(BeamError::InvalidConfig(format!(
            "grid_size must be an even panel count of at least {floor}, got {grid_size}"
        )));
    }
    Ok(())
}

fn uniform_grid(grid_size: usize) -> Vec<f64> {
    (0..=grid_size).map(|i| i as f64 / grid_size as f64).collect()
}

/// Samples the eigenfunction of `point` on a uniform grid of `grid_size`
/// panels (so `grid_size + 1` points), second derivative included.
///
/// # Errors
/// * `InvalidConfig` — fewer than 16 panels, an odd panel count (composite
///   Simpson needs pairs), or a point whose residual is not below 1e-6.
/// * `DegenerateMode` — the scaled samples vanish identically; the root does
///   not carry an eigenfunction (e.g. the trivial root `tau = 0`).
pub fn build_mode(point: &SpectralPoint, grid_size: usize) -> Result<ModeShape> {
    validate_grid(grid_size, 16)?;
    if point.residual.is_nan() || point.residual >= 1e-6 {
        return Err(BeamError::InvalidConfig(format!(
            "spectral point n = {} has residual {:.3e}, not a converged root",
            point.n, point.residual
        )));
    }
    let eval = ScaledEvaluator::new(point.tau);
    let grid = uniform_grid(grid_size);
    let phi: Vec<Complex64> = grid.iter().map(|&x| eval.derivative(0, x)).collect();
    let phi2: Vec<Complex64> = grid.iter().map(|&x| eval.derivative(2, x)).collect();
    let peak = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak < DEGENERACY_FLOOR {
        return Err(BeamError::DegenerateMode);
    }
    Ok(ModeShape { point: *point, a1: eval.a1(), a2: eval.a2(), grid, phi, phi2 })
}

/// Forms the scaled profile `F_n = 2 tau^{-2} e^{-tau} (phi'', lambda*phi)`
/// from a built mode. The `e^{-tau}` is already inside the mode's samples, so
/// only the `2 tau^{-2}` factor is applied here; with `lambda = i tau^2` the
/// second component collapses to `2i * (scaled phi)` exactly.
pub fn profile_f(mode: &ModeShape) -> ModeProfile {
    let tau2 = mode.point.tau * mode.point.tau;
    let two_i = Complex64::new(0.0, 2.0);
    ModeProfile {
        n: mode.point.n,
        kind: ProfileKind::F,
        grid: mode.grid.clone(),
        comp1: mode.phi2.iter().map(|v| 2.0 * v / tau2).collect(),
        comp2: mode.phi.iter().map(|v| two_i * v).collect(),
    }
}

/// Samples the closed-form reference profile `G_n` from `theta = (n+1/2)*pi`:
///
/// ```text
/// comp1 =  cos(theta*x) - sin(theta*x) - (-1)^n e^{-theta(1-x)} + e^{-theta*x}
/// comp2 = i*( -(-1)^n e^{-theta(1-x)} - cos(theta*x) + sin(theta*x) + e^{-theta*x} )
/// ```
///
/// This is the asymptotic shape both profile families share; it is exact to
/// machine precision and carries no remainder term.
///
/// # Errors
/// `InvalidConfig` for `n = 0` (the reference family starts at `n = 1`) or an
/// invalid panel count.
pub fn profile_g(n: usize, grid_size: usize) -> Result<ModeProfile> {
    if n == 0 {
        return Err(BeamError::InvalidConfig(
            "the reference profile family starts at n = 1".into(),
        ));
    }
    validate_grid(grid_size, 16)?;
    let theta = (n as f64 + 0.5) * std::f64::consts::PI;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let grid = uniform_grid(grid_size);
    let mut comp1 = Vec::with_capacity(grid.len());
    let mut comp2 = Vec::with_capacity(grid.len());
    for &x in &grid {
        let (c, s) = ((theta * x).cos(), (theta * x).sin());
        let e_right = (-theta * (1.0 - x)).exp();
        let e_left = (-theta * x).exp();
        comp1.push(Complex64::new(c - s - sign * e_right + e_left, 0.0));
        comp2.push(Complex64::new(0.0, -sign * e_right - c + s + e_left));
    }
    Ok(ModeProfile { n, kind: ProfileKind::G, grid, comp1, comp2 })
}

/// `L²(0,1)` norm of one sampled component by composite Simpson.
fn component_norm(samples: &[Complex64], h: f64) -> f64 {
    let sq: Vec<f64> = samples.iter().map(|v| v.norm_sqr()).collect();
    simpson(&sq, h).max(0.0).sqrt()
}

/// Componentwise profile norm `‖comp1‖_{L²} + ‖comp2‖_{L²}` by composite
/// Simpson on the profile's own grid (quadrature error `O(grid_size^{-4})`
/// for these smooth integrands).
///
/// # Errors
/// `InvalidConfig` if the profile has fewer than 64 panels (or an odd count).
pub fn l2_norm(profile: &ModeProfile) -> Result<f64> {
    let panels = profile.grid.len().saturating_sub(1);
    validate_grid(panels, 64)?;
    let h = 1.0 / panels as f64;
    Ok(component_norm(&profile.comp1, h) + component_norm(&profile.comp2, h))
}

/// Squared componentwise distance `(‖Δcomp1‖ + ‖Δcomp2‖)²` between two
/// profiles sampled on the same grid.
fn profile_distance_squared(a: &ModeProfile, b: &ModeProfile) -> Result<f64> {
    if a.grid.len() != b.grid.len() {
        return Err(BeamError::ShapeMismatch { expected: a.grid.len(), got: b.grid.len() });
    }
    let panels = a.grid.len() - 1;
    let h = 1.0 / panels as f64;
    let d1: Vec<Complex64> = a.comp1.iter().zip(&b.comp1).map(|(x, y)| x - y).collect();
    let d2: Vec<Complex64> = a.comp2.iter().zip(&b.comp2).map(|(x, y)| x - y).collect();
    let dist = component_norm(&d1, h) + component_norm(&d2, h);
    Ok(dist * dist)
}

/// Per-index squared distances `d_n = ‖F_n − G_n‖²` over `n_from..=n_to`,
/// with running partial sums. A bounded `n²·d_n` sequence is the numerical
/// form of quadratic closeness of the mode family to the reference basis.
///
/// # Errors
/// `InvalidConfig` for an empty index range or indices below the seeding
/// floor; otherwise propagates root-finding and mode-building failures.
pub fn closeness_tail(
    n_from: usize,
    n_to: usize,
    gain: Gain,
    grid_size: usize,
) -> Result<Vec<ClosenessEntry>> {
    if n_from < n_min(gain) || n_to < n_from {
        return Err(BeamError::InvalidConfig(format!(
            "closeness range {n_from}..={n_to} must be nonempty and start at or above {}",
            n_min(gain)
        )));
    }
    validate_grid(grid_size, 64)?;
    let distances: Vec<(usize, f64)> = (n_from..=n_to)
        .into_par_iter()
        .map(|n| -> Result<(usize, f64)> {
            let point = find_eigenvalue(n, gain, ROOT_TOL)?;
            let mode = build_mode(&point, grid_size)?;
            let f = profile_f(&mode);
            let g = profile_g(n, grid_size)?;
            Ok((n, profile_distance_squared(&f, &g)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut running = 0.0;
    Ok(distances
        .into_iter()
        .map(|(n, d_n)| {
            running += d_n;
            ClosenessEntry { n, d_n, partial_sum: running }
        })
        .collect())
}
