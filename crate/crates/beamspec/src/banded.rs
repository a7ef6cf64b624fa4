//! Banded matrix storage and LU factorization with partial pivoting.
//!
//! The solver is hand-rolled on a LAPACK-style band layout so that both the
//! real time-stepping systems and the complex shifted eigen-solves share one
//! implementation. Storage is column-major with leading dimension
//! `2*kl + ku + 1`; the extra `kl` superdiagonals hold the fill produced by
//! row pivoting.

use num_complex::Complex64;

use crate::error::{BeamError, Result};

/// Scalar abstraction so the factorization works for `f64` and `Complex64`.
pub(crate) trait BandScalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + PartialEq
{
    const ZERO: Self;
    fn modulus(self) -> f64;
}

impl BandScalar for f64 {
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl BandScalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub(crate) struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage with room for pivot fill (width 2kl+ku+1).
    data: Vec<T>,
}

impl<T: BandScalar> Banded<T> {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Banded { n, kl, ku, data: vec![T::ZERO; ldab * n] }
    }

    #[inline]
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        // Row i is reachable from column j when -(ku+kl) <= i-j <= kl; entries
        // above the declared ku band are legal storage (pivot fill) only.
        let d = i as isize - j as isize;
        if d > self.kl as isize || d < -((self.ku + self.kl) as isize) {
            return None;
        }
        let row = (self.kl + self.ku) as isize + d;
        Some(j * self.ldab() + row as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::ZERO, |s| self.data[s])
    }

    /// Sets an entry; panics if (i, j) is outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let d = i as isize - j as isize;
        assert!(
            d <= self.kl as isize && -d <= self.ku as isize,
            "entry ({i},{j}) outside band kl={}, ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j).expect("in-band entry must have a slot");
        self.data[s] = value;
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: T) {
        let current = self.get(i, j);
        self.set(i, j, current + value);
    }

    /// y = M x (uses only the declared band).
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "dimension mismatch in banded apply");
        let mut y = vec![T::ZERO; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::ZERO;
            for (j, &xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc = acc + self.get(i, j) * xj;
            }
            *yi = acc;
        }
        y
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut ipiv = vec![0usize; n];
        for (col, piv_slot) in ipiv.iter_mut().enumerate() {
            // Pivot search among the kl rows reachable below the diagonal.
            let last_row = (col + kl).min(n - 1);
            let mut p = col;
            let mut best = self.get(col, col).modulus();
            for i in (col + 1)..=last_row {
                let m = self.get(i, col).modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(BeamError::SingularShift);
            }
            *piv_slot = p;
            let last_col = (col + kl + ku).min(n - 1);
            if p != col {
                for j in col..=last_col {
                    let a = self.get(col, j);
                    let b = self.get(p, j);
                    // Both slots exist: |p - j| <= kl + ku within this window.
                    let sa = self.slot(col, j).expect("swap source in storage");
                    let sb = self.slot(p, j).expect("swap target in storage");
                    self.data[sa] = b;
                    self.data[sb] = a;
                }
            }
            let piv = self.get(col, col);
            for i in (col + 1)..=last_row {
                let mult = self.get(i, col) / piv;
                let si = self.slot(i, col).expect("multiplier slot");
                self.data[si] = mult;
                for j in (col + 1)..=last_col {
                    let upd = self.get(i, j) - mult * self.get(col, j);
                    let s = self.slot(i, j).expect("update slot inside fill band");
                    self.data[s] = upd;
                }
            }
        }
        Ok(BandedLu { mat: self, ipiv })
    }
}

/// Factored form produced by [`Banded::factor`].
#[derive(Debug, Clone)]
pub(crate) struct BandedLu<T> {
    mat: Banded<T>,
    ipiv: Vec<usize>,
}

impl<T: BandScalar> BandedLu<T> {
    /// Solves M x = b in place.
    pub fn solve(&self, b: &mut [T]) {
        let n = self.mat.n;
        let (kl, ku) = (self.mat.kl, self.mat.ku);
        assert_eq!(b.len(), n, "dimension mismatch in banded solve");
        // Forward substitution with the recorded row interchanges.
        for col in 0..n {
            let p = self.ipiv[col];
            if p != col {
                b.swap(col, p);
            }
            let last_row = (col + kl).min(n - 1);
            for i in (col + 1)..=last_row {
                b[i] = b[i] - self.mat.get(i, col) * b[col];
            }
        }
        // Back substitution on U (band width ku + kl due to fill).
        for col in (0..n).rev() {
            b[col] = b[col] / self.mat.get(col, col);
            let first = col.saturating_sub(ku + kl);
            for i in first..col {
                b[i] = b[i] - self.mat.get(i, col) * b[col];
            }
        }
    }
}

#[cfg(test)]
// Index loops mirror the dense elimination formulas; iterator forms obscure them.
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination oracle with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, p);
            b.swap(col, p);
            for i in (col + 1)..n {
                let m = a[i][col] / a[col][col];
                for j in col..n {
                    a[i][j] -= m * a[col][j];
                }
                b[i] -= m * b[col];
            }
        }
        for col in (0..n).rev() {
            b[col] /= a[col][col];
            for i in 0..col {
                let factor = a[i][col];
                b[i] -= factor * b[col];
            }
        }
        b
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let n = 7;
        let mut m = Banded::<f64>::new(n, 2, 2);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        let lu = m.factor().expect("identity must factor");
        let mut b: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let want = b.clone();
        lu.solve(&mut b);
        for (got, want) in b.iter().zip(&want) {
            assert!((got - want).abs() < 1e-15, "identity solve must return rhs");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // Leading diagonal entry is zero; without pivoting this would fail.
        let mut m = Banded::<f64>::new(2, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        let lu = m.factor().expect("pivoting must rescue zero diagonal");
        let mut b = vec![1.0, 3.0];
        lu.solve(&mut b);
        // Solution of [[0,1],[1,1]] x = (1,3) is x = (2,1).
        assert!((b[0] - 2.0).abs() < 1e-14 && (b[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = Banded::<f64>::new(3, 1, 1);
        assert_eq!(m.factor().err(), Some(BeamError::SingularShift), "zero matrix must not factor");
    }

    #[test]
    fn complex_shifted_system_solves() {
        let n = 6;
        let mut m = Banded::<Complex64>::new(n, 2, 2);
        for i in 0..n {
            m.set(i, i, Complex64::new(3.0, -1.0));
            if i + 1 < n {
                m.set(i, i + 1, Complex64::new(-1.0, 0.5));
                m.set(i + 1, i, Complex64::new(0.5, 0.0));
            }
        }
        let dense = m.clone();
        let lu = m.factor().expect("well-conditioned complex band must factor");
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut x = b.clone();
        lu.solve(&mut x);
        let back = dense.apply(&x);
        for (got, want) in back.iter().zip(&b) {
            assert!((got - want).norm() < 1e-12, "residual too large: {} vs {}", got, want);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn banded_solve_matches_dense_oracle(seed in 0u64..1000, n in 4usize..24) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (kl, ku) = (2usize, 2usize);
            let mut band = Banded::<f64>::new(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    // Diagonal bump keeps the oracle comparison well-conditioned.
                    let v = if i == j { v + 4.0 } else { v };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let want = dense_solve(dense, b.clone());
            let lu = band.factor().expect("diagonally dominant band must factor");
            let mut got = b;
            lu.solve(&mut got);
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-10,
                    "banded LU disagrees with dense oracle: {g} vs {w}");
            }
        }
    }
}
