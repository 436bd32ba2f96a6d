//! Lattice automorphisms of `ℤ²` and the Möbius action on boundary slopes.
//!
//! An element `g = [[a, b], [c, d]]` of `SL(2, ℤ)` maps the line of slope
//! `s` (direction `(1, s)`) to the line of slope `g(s) = (c + d·s)/(a + b·s)`,
//! handled projectively at infinities.  `normalize_slopes` searches for a `g`
//! bringing a slope pair `(α, β)` into the normalized range
//! `0 < g(α) ≤ 1/2`, `1 ≤ g(β) < ∞` used by the corner constructions.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Slope;

/// A unimodular integer matrix `[[a, b], [c, d]]` with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SL2ZMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2ZMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::InvalidSpec(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}, expected 1"
            )));
        }
        Ok(SL2ZMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        SL2ZMatrix { a: 1, b: 0, c: 0, d: 1 }
    }
}

impl std::fmt::Display for SL2ZMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// The slope of the image line `g · (line of slope s)`, computed projectively
/// and exactly for rational input.  A vertical image line is reported as
/// `+∞` (as a line, `+∞` and `-∞` coincide).
pub fn mobius_slope(g: &SL2ZMatrix, s: &Slope) -> Slope {
    // Direction vector (u, v) of the input line, with slope v/u.
    let (u, v): (i64, i64) = match *s {
        Slope::Rational { num, den } => (den, num),
        Slope::PosInfinity | Slope::NegInfinity => (0, 1),
        Slope::Irrational(value) => {
            let nu = g.a as f64 + g.b as f64 * value;
            let nv = g.c as f64 + g.d as f64 * value;
            if nu == 0.0 {
                return Slope::PosInfinity;
            }
            return Slope::Irrational(nv / nu);
        }
    };
    let nu = g.a as i128 * u as i128 + g.b as i128 * v as i128;
    let nv = g.c as i128 * u as i128 + g.d as i128 * v as i128;
    if nu == 0 {
        return Slope::PosInfinity;
    }
    let gcd = nu.gcd(&nv);
    let (mut nu, mut nv) = (nu / gcd, nv / gcd);
    if nu < 0 {
        nu = -nu;
        nv = -nv;
    }
    match (i64::try_from(nv), i64::try_from(nu)) {
        (Ok(num), Ok(den)) => Slope::Rational { num, den },
        // Astronomically large reduced entries cannot be represented
        // exactly; degrade to an approximate slope instead of failing.
        _ => Slope::Irrational(nv as f64 / nu as f64),
    }
}

fn in_dagger_alpha_range(s: &Slope) -> bool {
    match *s {
        Slope::Rational { num, den } => num > 0 && 2 * num <= den,
        Slope::Irrational(v) => v > 0.0 && v <= 0.5,
        _ => false,
    }
}

fn in_dagger_beta_range(s: &Slope) -> bool {
    match *s {
        Slope::Rational { num, den } => num >= den,
        Slope::Irrational(v) => v >= 1.0,
        _ => false,
    }
}

/// Result of a slope normalization: the automorphism and the image slopes.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedSlopes {
    pub g: SL2ZMatrix,
    pub alpha: Slope,
    pub beta: Slope,
}

/// Finds a unimodular `g` with `0 < g(α) ≤ 1/2` and `1 ≤ g(β) < ∞` by
/// exhaustive search over entry magnitudes, escalating to `bound` (default
/// 50).  The search is ordered by largest entry magnitude and then
/// lexicographically, with the overall sign fixed so the first nonzero of
/// `(a, b, c, d)` is positive, making the returned matrix deterministic.
/// The postcondition is re-verified through `mobius_slope` before returning.
pub fn normalize_slopes(alpha: &Slope, beta: &Slope) -> Result<NormalizedSlopes> {
    normalize_slopes_bounded(alpha, beta, 50)
}

/// `normalize_slopes` with an explicit entry-magnitude cap.
pub fn normalize_slopes_bounded(alpha: &Slope, beta: &Slope, bound: i64) -> Result<NormalizedSlopes> {
    if alpha.cmp_extended(beta) != std::cmp::Ordering::Less {
        return Err(Error::Precondition(format!("need α < β, got α={alpha}, β={beta}")));
    }
    if *alpha == Slope::NegInfinity && *beta == Slope::PosInfinity {
        return Err(Error::Precondition("α and β cannot both be infinite".into()));
    }
    let mut tier = 6;
    loop {
        tier = tier.min(bound);
        if let Some(found) = search_tier(alpha, beta, tier) {
            let na = mobius_slope(&found, alpha);
            let nb = mobius_slope(&found, beta);
            // Re-verify the postcondition independently of the search.
            if !in_dagger_alpha_range(&na) || !in_dagger_beta_range(&nb) {
                return Err(Error::Numerical(format!(
                    "normalization postcondition failed for g={found}: g(α)={na}, g(β)={nb}"
                )));
            }
            return Ok(NormalizedSlopes { g: found, alpha: na, beta: nb });
        }
        if tier == bound {
            return Err(Error::NormalizationSearchExhausted { bound });
        }
        tier = (tier * 2).min(bound);
    }
}

/// Scans all candidate matrices with entries bounded by `tier` in a
/// deterministic order and returns the first match.
fn search_tier(alpha: &Slope, beta: &Slope, tier: i64) -> Option<SL2ZMatrix> {
    let mut candidates: Vec<SL2ZMatrix> = Vec::new();
    for a in -tier..=tier {
        for b in -tier..=tier {
            if a == 0 && b == 0 {
                continue;
            }
            if (a as i128).gcd(&(b as i128)) != 1 {
                continue;
            }
            // Solve a·d − b·c = 1; solutions are (c0 + t·a, d0 + t·b).
            let egcd = (a as i128).extended_gcd(&(b as i128));
            // egcd: gcd = a·x + b·y = 1  ⇒  d0 = x, c0 = -y.
            let (d0, c0) = (egcd.x, -egcd.y);
            // Range of t keeping both |c|, |d| ≤ tier.
            let t_lo = -2 * tier as i128 - c0.abs().max(d0.abs());
            let t_hi = 2 * tier as i128 + c0.abs().max(d0.abs());
            for t in t_lo..=t_hi {
                let c = c0 + t * a as i128;
                let d = d0 + t * b as i128;
                if c.abs() > tier as i128 || d.abs() > tier as i128 {
                    continue;
                }
                let g = SL2ZMatrix { a, b, c: c as i64, d: d as i64 };
                // Canonical sign: first nonzero of (a, b, c, d) positive.
                let firsts = [g.a, g.b, g.c, g.d];
                let first_nonzero = firsts.iter().find(|&&v| v != 0).copied().unwrap_or(1);
                if first_nonzero < 0 {
                    continue;
                }
                if in_dagger_alpha_range(&mobius_slope(&g, alpha))
                    && in_dagger_beta_range(&mobius_slope(&g, beta))
                {
                    candidates.push(g);
                }
            }
        }
    }
    candidates.sort_by_key(|g| {
        let m = g.a.abs().max(g.b.abs()).max(g.c.abs()).max(g.d.abs());
        (m, g.a, g.b, g.c, g.d)
    });
    candidates.first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(num: i64, den: i64) -> Slope {
        Slope::rational(num, den).unwrap()
    }

    #[test]
    fn mobius_identity_fixes_slopes() {
        let id = SL2ZMatrix::identity();
        assert_eq!(mobius_slope(&id, &r(1, 3)), r(1, 3));
        assert_eq!(mobius_slope(&id, &Slope::PosInfinity), Slope::PosInfinity);
    }

    #[test]
    fn mobius_examples() {
        let g = SL2ZMatrix::new(2, 1, 1, 1).unwrap();
        assert_eq!(mobius_slope(&g, &Slope::integer(0)), r(1, 2));
        assert_eq!(mobius_slope(&g, &Slope::PosInfinity), Slope::integer(1));
    }

    #[test]
    fn normalize_already_in_range_returns_identity() {
        let n = normalize_slopes(&r(1, 3), &Slope::integer(2)).unwrap();
        assert_eq!(n.g, SL2ZMatrix::identity());
        assert_eq!(n.alpha, r(1, 3));
        assert_eq!(n.beta, Slope::integer(2));
    }

    #[test]
    fn normalize_axis_aligned_quarter_plane() {
        let n = normalize_slopes(&Slope::integer(0), &Slope::PosInfinity).unwrap();
        assert_eq!(n.g, SL2ZMatrix::new(2, 1, 1, 1).unwrap());
        assert_eq!(n.alpha, r(1, 2));
        assert_eq!(n.beta, Slope::integer(1));
    }

    #[test]
    fn normalize_symmetric_pair() {
        let n = normalize_slopes(&Slope::integer(-1), &Slope::integer(1)).unwrap();
        assert!(in_dagger_alpha_range(&n.alpha));
        assert!(in_dagger_beta_range(&n.beta));
    }
}
