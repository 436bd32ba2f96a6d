//! Complex banded matrices in LAPACK-style band storage and their LU
//! factorization with partial pivoting.
//!
//! Storage: a matrix with `kl` subdiagonals and `ku` superdiagonals is kept
//! column-major in a `(2·kl + ku + 1) × n` array; entry `(i, j)` lives at
//! offset `kl + ku + i − j` within column `j`.  The extra `kl` rows at the
//! top hold fill-in produced by row interchanges during factorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// A complex matrix with lower bandwidth `kl` and upper bandwidth `ku`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    /// Zero matrix of size `n` with the given true bandwidths.
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let ld = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ld, data: vec![C64::new(0.0, 0.0); ld * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "entry ({i}, {j}) outside band");
        j * self.ld + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        let k = self.offset(i, j);
        self.data[k] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: C64) {
        let k = self.offset(i, j);
        self.data[k] += value;
    }

    /// `y = A·x` over the stored band.
    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for j in 0..self.n {
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.data[self.offset(i, j)] * xj;
            }
        }
        y
    }

    /// `y = A†·x` over the stored band.
    pub fn matvec_adjoint(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let mut acc = C64::new(0.0, 0.0);
            for i in lo..=hi {
                acc += self.data[self.offset(i, j)].conj() * x[i];
            }
            y[j] = acc;
        }
        y
    }

    /// Iterates the stored band as `(row, col, value)`, skipping exact zeros.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |j| {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            (lo..=hi).filter_map(move |i| {
                let v = self.data[self.offset(i, j)];
                (v != C64::new(0.0, 0.0)).then_some((i, j, v))
            })
        })
    }

    /// Dense copy (test/diagnostic use).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                m[(i, j)] = self.data[self.offset(i, j)];
            }
        }
        m
    }

    /// Largest absolute entry (used to scale singularity thresholds).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// LU factorization `P·A = L·U` of a banded matrix, with rows permuted by
/// partial pivoting.  Exactly singular pivots are replaced by a tiny value so
/// that inverse iteration can proceed; the replacement is recorded.
#[derive(Debug, Clone)]
pub struct BandLU {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<C64>,
    ipiv: Vec<usize>,
    /// Number of pivots that were below the singularity floor and replaced.
    pub replaced_pivots: usize,
}

impl BandLU {
    /// Factors the matrix in place (LAPACK `gbtrf`-style unblocked column
    /// elimination).
    pub fn factor(matrix: BandMatrix) -> Result<BandLU> {
        let BandMatrix { n, kl, ku, ld, mut data } = matrix;
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::Numerical("banded matrix contains non-finite entries".into()));
        }
        // Floor for exactly singular pivots: small enough that 1/floor
        // dominates every genuine eigenvalue, large enough to avoid overflow.
        let floor = 1e-300f64.max(1e-30 * scale.max(1e-300));
        let off = |i: usize, j: usize| -> usize { j * ld + (kl + ku + i - j) };
        let mut ipiv = vec![0usize; n];
        let mut replaced = 0usize;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search within the column.
            let mut jp = 0usize;
            let mut best = data[off(j, j)].norm();
            for p in 1..=km {
                let mag = data[off(j + p, j)].norm();
                if mag > best {
                    best = mag;
                    jp = p;
                }
            }
            if best < floor {
                let k = off(j + jp, j);
                data[k] = if data[k] == C64::new(0.0, 0.0) {
                    C64::new(floor, 0.0)
                } else {
                    data[k] * (floor / data[k].norm())
                };
                replaced += 1;
            }
            ipiv[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    data.swap(off(j, c), off(j + jp, c));
                }
            }
            let piv = data[off(j, j)];
            for p in 1..=km {
                let k = off(j + p, j);
                data[k] /= piv;
            }
            for c in (j + 1)..=ju {
                let ajc = data[off(j, c)];
                if ajc == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 1..=km {
                    let mult = data[off(j + p, j)];
                    let k = off(j + p, c);
                    data[k] -= mult * ajc;
                }
            }
        }
        Ok(BandLU { n, kl, ku, ld, data, ipiv, replaced_pivots: replaced })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn off(&self, i: usize, j: usize) -> usize {
        j * self.ld + (self.kl + self.ku + i - j)
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut DVector<C64>) {
        assert_eq!(b.len(), self.n);
        let width = self.kl + self.ku;
        // Apply the recorded interchanges, then unit L, in factorization order.
        for j in 0..self.n {
            let p = self.ipiv[j];
            if p != j {
                b.swap_rows(j, p);
            }
            let bj = b[j];
            if bj != C64::new(0.0, 0.0) {
                let km = self.kl.min(self.n - 1 - j);
                for q in 1..=km {
                    let mult = self.data[self.off(j + q, j)];
                    b[j + q] -= mult * bj;
                }
            }
        }
        // Back substitution with U (upper bandwidth kl + ku after pivoting).
        for j in (0..self.n).rev() {
            let xj = b[j] / self.data[self.off(j, j)];
            b[j] = xj;
            if xj != C64::new(0.0, 0.0) {
                let lo = j.saturating_sub(width);
                for i in lo..j {
                    let u = self.data[self.off(i, j)];
                    b[i] -= u * xj;
                }
            }
        }
    }

    /// Solves `A†·x = b` in place using the factorization of `A`.
    pub fn solve_adjoint_in_place(&self, b: &mut DVector<C64>) {
        assert_eq!(b.len(), self.n);
        let width = self.kl + self.ku;
        // U†·y = b: U† is lower triangular, forward substitution.
        for j in 0..self.n {
            let lo = j.saturating_sub(width);
            let mut acc = b[j];
            for i in lo..j {
                acc -= self.data[self.off(i, j)].conj() * b[i];
            }
            b[j] = acc / self.data[self.off(j, j)].conj();
        }
        // L† and the interchanges, interleaved in reverse factorization
        // order (multiplier columns are not retroactively permuted in band
        // storage, so the swap belongs immediately after each column's
        // substitution step).
        for j in (0..self.n).rev() {
            let km = self.kl.min(self.n - 1 - j);
            let mut acc = b[j];
            for q in 1..=km {
                acc -= self.data[self.off(j + q, j)].conj() * b[j + q];
            }
            b[j] = acc;
            let p = self.ipiv[j];
            if p != j {
                b.swap_rows(j, p);
            }
        }
    }

    /// Column-wise `A⁻¹·B`.
    pub fn solve_matrix(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = b.clone_owned();
        for mut col in out.column_iter_mut() {
            let mut v = DVector::from_column_slice(col.as_slice());
            self.solve_in_place(&mut v);
            col.copy_from(&v);
        }
        out
    }

    /// Column-wise `A⁻†·B`.
    pub fn solve_adjoint_matrix(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = b.clone_owned();
        for mut col in out.column_iter_mut() {
            let mut v = DVector::from_column_slice(col.as_slice());
            self.solve_adjoint_in_place(&mut v);
            col.copy_from(&v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BandMatrix::new(n, kl, ku);
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                m.set(i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        // Diagonal dominance off: keep it generic but invertible in practice.
        for i in 0..n {
            m.add(i, i, C64::new(0.5, 0.0));
        }
        m
    }

    #[test]
    fn solve_matches_dense_lu() {
        for seed in 0..4u64 {
            let band = random_band(40, 3, 2, seed);
            let dense = band.to_dense();
            let lu = BandLU::factor(band).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let b = DVector::from_fn(40, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            let expected = dense.clone().lu().solve(&b).unwrap();
            assert!((x - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_solve_matches_dense() {
        for seed in 0..4u64 {
            let band = random_band(37, 4, 1, 10 + seed);
            let dense = band.to_dense();
            let lu = BandLU::factor(band).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let b = DVector::from_fn(37, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut x = b.clone();
            lu.solve_adjoint_in_place(&mut x);
            // Backward-stability check; a direct solution comparison is not
            // meaningful when the random matrix is poorly conditioned.
            let resid = (dense.adjoint() * &x - &b).norm();
            assert!(resid < 1e-10, "adjoint residual {resid:e} for seed {seed}");
        }
    }

    #[test]
    fn matvec_agrees_with_dense() {
        let band = random_band(25, 2, 5, 42);
        let dense = band.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = DVector::from_fn(25, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        assert!((band.matvec(&x) - &dense * &x).norm() < 1e-12);
        assert!((band.matvec_adjoint(&x) - dense.adjoint() * &x).norm() < 1e-12);
    }

    #[test]
    fn singular_matrix_factors_with_pivot_replacement() {
        // diag(0, 1, 2, ..., 9): inverse iteration must recover e₀.
        let mut m = BandMatrix::new(10, 1, 1);
        for i in 0..10 {
            m.set(i, i, C64::new(i as f64, 0.0));
        }
        let lu = BandLU::factor(m).unwrap();
        assert!(lu.replaced_pivots >= 1);
        let mut v = DVector::from_element(10, C64::new(1.0, 0.0));
        for _ in 0..3 {
            lu.solve_in_place(&mut v);
            let norm = v.norm();
            v /= C64::new(norm, 0.0);
        }
        assert!(v[0].norm() > 1.0 - 1e-9);
    }
}
