//! Overflow-safe evaluation of the beam characteristic function.
//!
//! Separation of variables for the clamped beam with velocity feedback at the
//! free end turns the eigenvalue problem into a transcendental equation in the
//! frequency parameter `tau` (eigenvalues are recovered as `lambda = i*tau^2`):
//!
//! ```text
//! D(tau) = i*k*tau*(1 - cos(tau)*cosh(tau)) + cosh(tau)*sin(tau) - cos(tau)*sinh(tau)
//! ```
//!
//! Direct evaluation of `D` overflows once `|Re tau|` passes ~710 because of
//! the hyperbolic factors, while roots up to index ~10^4 must stay reachable.
//! Two representations keep everything finite:
//!
//! * [`eval_char`] returns `D` in split form `value * exp(scale_exponent)`.
//!   In the far field the trig/hyperbolic products are expanded into the four
//!   exponentials `exp((±1±i)tau)` and the common magnitude
//!   `mu = |Re tau| + |Im tau|` (the largest real part among those exponents)
//!   is moved into the exponent.
//! * [`eval_char_scaled`] divides out the growth analytically,
//!
//!   ```text
//!   g(tau) = D(tau) / (tau*cosh(tau))
//!          = i*k*(sech(tau) - cos(tau)) + (sin(tau) - cos(tau)*tanh(tau)) / tau
//!   ```
//!
//!   and evaluates `tanh`/`sech` through `w = exp(-2*tau)`:
//!   `tanh = (1 - w)/(1 + w)`, `sech = 2*exp(-tau)/(1 + w)`, which is stable on
//!   the whole right half-plane. `g` stays bounded on horizontal strips as
//!   `Re tau` grows, which is the form Newton iteration wants.
//!
//! Branch convention: roots are sought with `Re tau > 0`, `Im tau >= 0`, so
//! that `Re lambda = -2*Re(tau)*Im(tau) <= 0`; the mirror eigenvalues
//! `conj(lambda)` are implied by conjugation symmetry and never stored.

use num_complex::Complex64;

use crate::error::{BeamError, Result};

/// Largest `|Re tau| + |Im tau|` for which [`eval_char`] evaluates the raw
/// formula directly (comfortably below the ~710 overflow threshold of cosh).
const DIRECT_SUM_LIMIT: f64 = 200.0;

/// Hard ceiling for the raw formula even in the `|Re tau| <= 1` band where an
/// unscaled value is normally guaranteed; beyond this the trig factors
/// themselves would overflow, so the scaled form takes over.
const RAW_OVERFLOW_LIMIT: f64 = 650.0;

/// Nonnegative feedback gain applied to the tip velocity slope.
///
/// `k = 0` is the undamped (skew-adjoint) configuration whose spectrum lies on
/// the imaginary axis; `k > 0` closes the loop and damps every mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain(f64);

impl Gain {
    /// Validates `k >= 0` and finite.
    ///
    /// # Errors
    /// `InvalidGain` if `k` is negative, NaN, or infinite.
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k >= 0.0 {
            Ok(Gain(k))
        } else {
            Err(BeamError::InvalidGain(k))
        }
    }

    /// The raw gain value.
    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    /// Whether this is the undamped configuration.
    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Characteristic value in split magnitude form: the true value is
/// `value * exp(scale_exponent)`.
///
/// `value` is finite for every finite `tau`; `scale_exponent` is `0` whenever
/// the raw formula is itself representable (in particular for
/// `|Re tau| <= 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    /// Scaled characteristic value.
    pub value: Complex64,
    /// Removed exponential magnitude.
    pub scale_exponent: f64,
}

impl CharValue {
    /// Reconstructs the unscaled value. Overflows (to infinity) when the true
    /// magnitude exceeds the double-precision range — intended for tests and
    /// diagnostics at moderate `tau`, not for the far field.
    #[inline]
    pub fn raw(&self) -> Complex64 {
        self.value * self.scale_exponent.exp()
    }
}

/// Stable `(tanh tau, sech tau)` via `w = exp(-2*s)` with `s = ±tau` chosen in
/// the closed right half-plane, so `|w| <= 1` and no hyperbolic overflow.
fn stable_tanh_sech(tau: Complex64) -> Result<(Complex64, Complex64)> {
    let right = tau.re >= 0.0;
    let s = if right { tau } else { -tau };
    let w = (-2.0 * s).exp();
    let denom = Complex64::new(1.0, 0.0) + w;
    if denom.norm() < 1e-12 {
        // cosh(tau) = exp(s)*(1 + w)/2 vanishes: tau sits on a pole of g.
        return Err(BeamError::CoshPole { re: tau.re, im: tau.im });
    }
    let tanh_s = (Complex64::new(1.0, 0.0) - w) / denom;
    let sech_s = 2.0 * (-s).exp() / denom;
    // tanh is odd, sech is even.
    if right {
        Ok((tanh_s, sech_s))
    } else {
        Ok((-tanh_s, sech_s))
    }
}

#[inline]
fn require_finite(tau: Complex64) -> Result<()> {
    if tau.re.is_finite() && tau.im.is_finite() {
        Ok(())
    } else {
        Err(BeamError::NonFiniteInput)
    }
}

/// Evaluates the characteristic function `D(tau)` in split magnitude form.
///
/// # Formulas
/// `D(tau) = i*k*tau*(1 - cos(tau)*cosh(tau)) + cosh(tau)*sin(tau) - cos(tau)*sinh(tau)`.
///
/// Near the origin (and anywhere the raw formula is representable) the value
/// is returned unscaled with `scale_exponent = 0`. In the far field the four
/// exponentials `exp((±1±i)tau)` are formed individually with the common
/// magnitude `mu = |Re tau| + |Im tau|` pulled into `scale_exponent`:
///
/// ```text
/// cos(tau)*cosh(tau)              = (1/4) * sum_j exp(s_j*tau),
/// cosh(tau)*sin(tau) - cos(tau)*sinh(tau) = (1/4) * sum_j c_j * exp(s_j*tau),
/// s_j in {1+i, 1-i, -1+i, -1-i},  c_j in {-1-i, -1+i, 1-i, 1+i}.
/// ```
///
/// # Errors
/// `NonFiniteInput` if `tau` is NaN or infinite.
pub fn eval_char(tau: Complex64, gain: Gain) -> Result<CharValue> {
    require_finite(tau)?;
    let mu = tau.re.abs() + tau.im.abs();
    let ik = Complex64::new(0.0, gain.k());
    if mu <= DIRECT_SUM_LIMIT || (tau.re.abs() <= 1.0 && mu <= RAW_OVERFLOW_LIMIT) {
        let (c, ch) = (tau.cos(), tau.cosh());
        let (s, sh) = (tau.sin(), tau.sinh());
        let value = ik * tau * (Complex64::new(1.0, 0.0) - c * ch) + ch * s - c * sh;
        return Ok(CharValue { value, scale_exponent: 0.0 });
    }
    // Far field: per-exponential evaluation, all magnitudes <= exp(0) after
    // removing mu (mu is the maximum of Re(s_j*tau) over the four signs).
    let dirs = [
        Complex64::new(1.0, 1.0),
        Complex64::new(1.0, -1.0),
        Complex64::new(-1.0, 1.0),
        Complex64::new(-1.0, -1.0),
    ];
    let coeffs = [
        Complex64::new(-1.0, -1.0),
        Complex64::new(-1.0, 1.0),
        Complex64::new(1.0, -1.0),
        Complex64::new(1.0, 1.0),
    ];
    let ik_tau = ik * tau;
    // The standalone i*k*tau term carries weight exp(-mu), which may flush to
    // zero far out — exactly as the true ratio does.
    let mut value = ik_tau * (-mu).exp();
    for (s_j, c_j) in dirs.iter().zip(coeffs.iter()) {
        let e = (s_j * tau - mu).exp();
        value += (c_j - ik_tau) * 0.25 * e;
    }
    Ok(CharValue { value, scale_exponent: mu })
}

/// Evaluates the scaled characteristic function `g(tau) = D(tau)/(tau*cosh(tau))`.
///
/// This is the form used for root finding: on horizontal strips it stays
/// bounded as `Re tau → ∞` (the trig factors are O(1) there and the
/// hyperbolic ratios saturate), so Newton iteration sees a well-scaled
/// function at every mode index.
///
/// # Formulas
/// `g(tau) = i*k*(sech(tau) - cos(tau)) + (sin(tau) - cos(tau)*tanh(tau))/tau`
/// with `tanh`/`sech` computed through `w = exp(-2*tau)`.
///
/// # Errors
/// * `NonFiniteInput` — `tau` is NaN/infinite, or `tau = 0` (the division by
///   `tau*cosh(tau)` makes the origin a removable point of the ratio only in
///   the limit; it is outside this representation's domain).
/// * `CoshPole` — `cosh(tau) = 0`, i.e. `tau` at an odd multiple of `i*pi/2`.
pub fn eval_char_scaled(tau: Complex64, gain: Gain) -> Result<Complex64> {
    require_finite(tau)?;
    if tau.norm() < 1e-12 {
        return Err(BeamError::NonFiniteInput);
    }
    let (tanh, sech) = stable_tanh_sech(tau)?;
    let (c, s) = (tau.cos(), tau.sin());
    let ik = Complex64::new(0.0, gain.k());
    Ok(ik * (sech - c) + (s - c * tanh) / tau)
}

/// Analytic derivative `g'(tau)` of [`eval_char_scaled`].
///
/// Term-by-term differentiation in the same stable representation:
///
/// ```text
/// g'(tau) = i*k*(sin(tau) - sech(tau)*tanh(tau))
///         + [ (cos(tau) + sin(tau)*tanh(tau) - cos(tau)*sech(tau)^2) * tau
///             - (sin(tau) - cos(tau)*tanh(tau)) ] / tau^2
/// ```
///
/// An analytic derivative (rather than a finite difference) keeps Newton's
/// convergence independent of any step-size choice.
///
/// # Errors
/// Same conditions as [`eval_char_scaled`].
pub fn eval_char_derivative(tau: Complex64, gain: Gain) -> Result<Complex64> {
    require_finite(tau)?;
    if tau.norm() < 1e-12 {
        return Err(BeamError::NonFiniteInput);
    }
    let (tanh, sech) = stable_tanh_sech(tau)?;
    let (c, s) = (tau.cos(), tau.sin());
    let ik = Complex64::new(0.0, gain.k());
    let numer = s - c * tanh;
    let numer_prime = c + s * tanh - c * sech * sech;
    Ok(ik * (s - sech * tanh) + (numer_prime * tau - numer) / (tau * tau))
}
