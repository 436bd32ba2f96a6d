//! Scalar Laurent polynomials on the unit circle, determinants of small
//! matrix-valued Laurent polynomials, and the winding number of a
//! non-vanishing Laurent polynomial.
//!
//! The winding number is computed two independent ways and must agree:
//! counting companion-matrix roots inside the unit disk (the source of
//! truth), and integrating the phase increment over a dense grid.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Grid size for circle sampling (gap check and phase integration).
const CIRCLE_GRID: usize = 4096;

/// Absolute floor under which the symbol is declared gapless on the circle.
const GAP_FLOOR: f64 = 1e-9;

/// A finitely supported scalar Laurent polynomial `Σ c_k z^k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, C64>,
}

impl LaurentPoly {
    pub fn new() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = LaurentPoly::new();
        p.add_coeff(0, c);
        p
    }

    pub fn monomial(k: i64, c: C64) -> Self {
        let mut p = LaurentPoly::new();
        p.add_coeff(k, c);
        p
    }

    pub fn add_coeff(&mut self, k: i64, c: C64) {
        let entry = self.coeffs.entry(k).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> C64 {
        // Evaluate on |z| = 1 via explicit powers; supports are tiny.
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * z.powi(k as i32))
            .sum()
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::new();
        for (&i, &a) in &self.coeffs {
            for (&j, &b) in &other.coeffs {
                out.add_coeff(i + j, a * b);
            }
        }
        out
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_coeff(k, c);
        }
        out
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_coeff(k, -c);
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        let mut out = LaurentPoly::new();
        for (&k, &c) in &self.coeffs {
            out.add_coeff(k, -c);
        }
        out
    }

    /// Drops coefficients below `1e-12 ×` the largest magnitude (numerical
    /// noise from determinant expansion).
    fn trimmed(&self) -> LaurentPoly {
        let scale = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let mut out = LaurentPoly::new();
        if scale == 0.0 {
            return out;
        }
        for (&k, &c) in &self.coeffs {
            if c.norm() > 1e-12 * scale {
                out.add_coeff(k, c);
            }
        }
        out
    }
}

/// Determinant of a small matrix-valued Laurent polynomial, given as a map
/// `shift ↦ coefficient block`, by cofactor expansion.
pub fn det_laurent(block: &BTreeMap<i64, DMatrix<C64>>) -> LaurentPoly {
    let n = block.values().next().map_or(0, |m| m.nrows());
    if n == 0 {
        return LaurentPoly::constant(C64::new(1.0, 0.0));
    }
    let entries: Vec<Vec<LaurentPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = LaurentPoly::new();
                    for (&k, m) in block {
                        p.add_coeff(k, m[(i, j)]);
                    }
                    p
                })
                .collect()
        })
        .collect();
    det_rec(&entries).trimmed()
}

fn det_rec(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = LaurentPoly::new();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.coeffs.is_empty() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cofactor = entry.mul(&det_rec(&minor));
        det = if j % 2 == 0 { det.add(&cofactor) } else { det.sub(&cofactor) };
    }
    det
}

/// Smallest `|p(z)|` over the dense circle grid.
pub fn min_on_circle(p: &LaurentPoly) -> f64 {
    (0..CIRCLE_GRID)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / CIRCLE_GRID as f64;
            p.eval(C64::from_polar(1.0, t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Winding number of `z ↦ p(z)` around zero as `z` runs counter-clockwise
/// over the unit circle.
///
/// Writes `p(z) = z^lo · q(z)` with `q(0) ≠ 0`, counts the roots of `q`
/// strictly inside the unit disk via companion-matrix eigenvalues, and
/// returns `lo + count`.  A trapezoidal phase integral over the circle grid
/// must reproduce the same integer, otherwise a numerical-instability error
/// is raised.  Roots within `1e-9` of the circle (equivalently small values
/// of `p` on the grid) are reported as a gapless error.
pub fn winding_number(p: &LaurentPoly) -> Result<i64> {
    let p = p.trimmed();
    if p.coeffs.is_empty() {
        return Err(Error::Gapless("polynomial is identically zero on the circle".into()));
    }
    if min_on_circle(&p) <= GAP_FLOOR {
        return Err(Error::Gapless(format!(
            "polynomial vanishes on the unit circle (min |p| ≤ {GAP_FLOOR:e})"
        )));
    }
    let lo = *p.coeffs.keys().next().expect("nonempty");
    let hi = *p.coeffs.keys().next_back().expect("nonempty");
    let degree = (hi - lo) as usize;
    let by_root_count = if degree == 0 {
        lo
    } else {
        // Monic coefficients of q: a_0 + a_1 w + ... + w^degree.
        let lead = p.coeffs[&hi];
        let a: Vec<C64> = (0..=degree as i64)
            .map(|k| p.coeffs.get(&(lo + k)).copied().unwrap_or(C64::new(0.0, 0.0)) / lead)
            .collect();
        let mut companion = DMatrix::<C64>::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -a[i];
        }
        let (_, t) = companion.schur().unpack();
        let mut inside = 0i64;
        for i in 0..degree {
            let r = t[(i, i)].norm();
            if (r - 1.0).abs() <= GAP_FLOOR {
                return Err(Error::Gapless(format!("root of modulus {r} on the unit circle")));
            }
            if r < 1.0 {
                inside += 1;
            }
        }
        lo + inside
    };
    let by_phase = phase_winding(&p);
    if by_phase != by_root_count {
        return Err(Error::MethodDisagreement(format!(
            "winding by root count = {by_root_count}, by phase integration = {by_phase}"
        )));
    }
    Ok(by_root_count)
}

/// Winding by accumulating principal-branch phase increments over the grid.
fn phase_winding(p: &LaurentPoly) -> i64 {
    let mut total = 0.0f64;
    let mut prev = p.eval(C64::new(1.0, 0.0));
    for j in 1..=CIRCLE_GRID {
        let t = 2.0 * std::f64::consts::PI * j as f64 / CIRCLE_GRID as f64;
        let cur = p.eval(C64::from_polar(1.0, t));
        total += (cur / prev).arg();
        prev = cur;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn monomial_windings() {
        for k in -3..=3i64 {
            let p = LaurentPoly::monomial(k, c(2.0, 0.0));
            assert_eq!(winding_number(&p).unwrap(), k);
        }
    }

    #[test]
    fn dominant_constant_has_zero_winding() {
        // 3 + z + z⁻¹: no zeros inside, no pole excess.
        let mut p = LaurentPoly::constant(c(3.0, 0.0));
        p.add_coeff(1, c(1.0, 0.0));
        p.add_coeff(-1, c(1.0, 0.0));
        assert_eq!(winding_number(&p).unwrap(), 0);
    }

    #[test]
    fn mixed_roots_cancel() {
        // (z − 0.5)(z − 2) / z: one root inside, pole order 1 → winding 0.
        let mut inner = LaurentPoly::monomial(1, c(1.0, 0.0));
        inner.add_coeff(0, c(-0.5, 0.0));
        let mut outer = LaurentPoly::monomial(1, c(1.0, 0.0));
        outer.add_coeff(0, c(-2.0, 0.0));
        let p = inner.mul(&outer).mul(&LaurentPoly::monomial(-1, c(1.0, 0.0)));
        assert_eq!(winding_number(&p).unwrap(), 0);
    }

    #[test]
    fn circle_root_is_gapless() {
        // z − 1 vanishes at z = 1.
        let mut p = LaurentPoly::monomial(1, c(1.0, 0.0));
        p.add_coeff(0, c(-1.0, 0.0));
        assert!(matches!(winding_number(&p), Err(Error::Gapless(_))));
    }

    #[test]
    fn determinant_of_diagonal_block() {
        // diag(z, z⁻¹) → det = 1 → winding 0.
        let mut block = BTreeMap::new();
        block.insert(1, DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        block.insert(-1, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        let det = det_laurent(&block);
        assert_eq!(det, LaurentPoly::constant(c(1.0, 0.0)));
    }

    #[test]
    fn determinant_antidiagonal_picks_up_sign() {
        // [[0, z],[z², 0]] → det = −z³.
        let mut block = BTreeMap::new();
        block.insert(1, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        block.insert(2, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        let det = det_laurent(&block);
        assert_eq!(det, LaurentPoly::monomial(3, c(-1.0, 0.0)));
        assert_eq!(winding_number(&det).unwrap(), 3);
    }
}
