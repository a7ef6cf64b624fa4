//! Fixed-grid quadrature and one-sided differencing helpers.
//!
//! Everything here operates on uniformly spaced samples. The composite Simpson
//! rule is exact for cubics, and the cumulative rule integrates the local
//! cubic interpolant so it is also exact for cubics — which is what makes the
//! polynomial resolvent checks exact up to rounding.

/// Composite Simpson integration of real samples over a uniform grid.
///
/// `values` holds f(x_0), ..., f(x_n) with spacing `h`; `n` must be even.
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson rule needs an even interval count, got {n}");
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Cumulative integral I(x_j) = ∫_0^{x_j} f, returned at every node.
///
/// Each interval is integrated with the cubic through the four nearest
/// samples (shifted to one-sided stencils at the ends), so the result is
/// exact for polynomials up to degree three.
pub(crate) fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    assert!(n >= 3, "cumulative rule needs at least 4 samples, got {}", values.len());
    let mut out = Vec::with_capacity(values.len());
    out.push(0.0);
    let mut acc = 0.0;
    for j in 0..n {
        // Integrate over [x_j, x_{j+1}] using samples at offsets (base..base+3).
        let base = if j == 0 {
            0
        } else if j == n - 1 {
            n - 3
        } else {
            j - 1
        };
        let f = [values[base], values[base + 1], values[base + 2], values[base + 3]];
        acc += h * match j {
            0 => (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0,
            _ if j == n - 1 => (f[0] - 5.0 * f[1] + 19.0 * f[2] + 9.0 * f[3]) / 24.0,
            _ => (-f[0] + 13.0 * f[1] + 13.0 * f[2] - f[3]) / 24.0,
        };
        out.push(acc);
    }
    out
}

/// Fourth-order one-sided derivative estimate at the right endpoint.
pub(crate) fn deriv_right_4th(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    assert!(m >= 4, "fourth-order one-sided stencil needs 5 samples");
    (25.0 * values[m] - 48.0 * values[m - 1] + 36.0 * values[m - 2] - 16.0 * values[m - 3]
        + 3.0 * values[m - 4])
        / (12.0 * h)
}
