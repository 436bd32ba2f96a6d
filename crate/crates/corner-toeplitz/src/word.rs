//! Structured "word operators": integer combinations of shifts composed with
//! diagonal region masks, such as the index-one generator on a concave corner
//! and its isometric counterpart on a convex corner.
//!
//! A word is a sum of terms `coeff · S_{m,n} · diag(mask)`, where `S_{m,n}`
//! moves a site by `(m, n)` and `mask` is a per-site `{0,1}` expression built
//! from membership queries of the region and its translates.  All words used
//! here have integer coefficients, so truncations can be assembled exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{slopes_satisfy_dagger, RegionKind, RegionSpec, Window};
use crate::symbol::TruncatedOperator;

/// Per-site boolean expression over translate predicates.
///
/// `Translate(m, n)` is the diagonal of the compressed translation pair: it
/// evaluates to 1 at a region site `s` iff `s − (m, n)` is also in the region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskExpr {
    /// Constant 1 on the region.
    One,
    /// `s ↦ [s − (m, n) ∈ Σ]`, evaluated at region sites.
    Translate(i64, i64),
    /// `1 − e`.
    Not(Box<MaskExpr>),
    /// `e₁ · e₂` (logical and).
    Prod(Box<MaskExpr>, Box<MaskExpr>),
    /// `e₁ − e₂`; only valid where `e₂ ≤ e₁` (nested projections).
    Diff(Box<MaskExpr>, Box<MaskExpr>),
}

impl MaskExpr {
    pub fn not(e: MaskExpr) -> MaskExpr {
        MaskExpr::Not(Box::new(e))
    }

    pub fn prod(a: MaskExpr, b: MaskExpr) -> MaskExpr {
        MaskExpr::Prod(Box::new(a), Box::new(b))
    }

    pub fn diff(a: MaskExpr, b: MaskExpr) -> MaskExpr {
        MaskExpr::Diff(Box::new(a), Box::new(b))
    }

    fn eval_raw(&self, spec: &RegionSpec, site: (i64, i64)) -> Result<i64> {
        Ok(match self {
            MaskExpr::One => 1,
            MaskExpr::Translate(m, n) => i64::from(spec.membership(site.0 - m, site.1 - n)?),
            MaskExpr::Not(e) => 1 - e.eval_raw(spec, site)?,
            MaskExpr::Prod(a, b) => a.eval_raw(spec, site)? * b.eval_raw(spec, site)?,
            MaskExpr::Diff(a, b) => a.eval_raw(spec, site)? - b.eval_raw(spec, site)?,
        })
    }

    /// Evaluates at a region site, enforcing the `{0,1}` range invariant.
    pub fn eval(&self, spec: &RegionSpec, site: (i64, i64)) -> Result<i64> {
        let v = self.eval_raw(spec, site)?;
        if v == 0 || v == 1 {
            Ok(v)
        } else {
            Err(Error::InvalidSpec(format!(
                "mask expression evaluates to {v} at site ({}, {}); masks must be {{0,1}}-valued",
                site.0, site.1
            )))
        }
    }
}

/// One summand `coeff · S_shift · diag(mask)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordTerm {
    pub coeff: i64,
    pub shift: (i64, i64),
    pub mask: MaskExpr,
}

/// An integer-coefficient word operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordOperator {
    terms: Vec<WordTerm>,
}

impl WordOperator {
    pub fn new(terms: Vec<WordTerm>) -> Self {
        WordOperator { terms }
    }

    pub fn terms(&self) -> &[WordTerm] {
        &self.terms
    }

    /// Largest `max(|m|, |n|)` over the shifts (mask translates do not move
    /// support, only inspect membership nearby).
    pub fn stencil_radius(&self) -> i64 {
        self.terms.iter().map(|t| t.shift.0.abs().max(t.shift.1.abs())).max().unwrap_or(0)
    }

    /// The diagonal projection word `P̌_{m,n}`.
    pub fn projection(shift: (i64, i64)) -> WordOperator {
        WordOperator::new(vec![WordTerm { coeff: 1, shift: (0, 0), mask: MaskExpr::Translate(shift.0, shift.1) }])
    }
}

fn require_dagger(spec: &RegionSpec) -> Result<()> {
    if !slopes_satisfy_dagger(&spec.alpha, &spec.beta) {
        return Err(Error::Precondition(format!(
            "word operators need normalized slopes 0 < α ≤ 1/2 and 1 ≤ β ≤ ∞, got α={}, β={}",
            spec.alpha, spec.beta
        )));
    }
    Ok(())
}

/// The three-term word `P̌_{0,1} + S_{1,1}(1 − P̌_{−1,0}) + S_{1,0}(P̌_{−1,0} − P̌_{0,1})`
/// shared by the concave generator and its convex counterpart.
fn three_term_word() -> WordOperator {
    WordOperator::new(vec![
        WordTerm { coeff: 1, shift: (0, 0), mask: MaskExpr::Translate(0, 1) },
        WordTerm { coeff: 1, shift: (1, 1), mask: MaskExpr::not(MaskExpr::Translate(-1, 0)) },
        WordTerm {
            coeff: 1,
            shift: (1, 0),
            mask: MaskExpr::diff(MaskExpr::Translate(-1, 0), MaskExpr::Translate(0, 1)),
        },
    ])
}

/// The index `+1` generator on a concave corner (surjective with a
/// one-dimensional kernel for normalized slopes).
pub fn make_a_check(spec: &RegionSpec) -> Result<WordOperator> {
    require_dagger(spec)?;
    if spec.kind != RegionKind::Concave {
        return Err(Error::Precondition(format!(
            "the concave generator lives on a concave region, got {:?}",
            spec.kind
        )));
    }
    Ok(three_term_word())
}

/// The index `−1` isometry on a convex corner (injective with a
/// one-dimensional cokernel for normalized slopes).
pub fn make_a_hat(spec: &RegionSpec) -> Result<WordOperator> {
    require_dagger(spec)?;
    if spec.kind != RegionKind::Convex {
        return Err(Error::Precondition(format!(
            "the convex isometry lives on a convex region, got {:?}",
            spec.kind
        )));
    }
    Ok(three_term_word())
}

/// The diagonal projection `P̃_k` onto the step set `B_k` of a concave
/// region: sites `s` with `s ∈ Σ̌`, `s + (1,0) ∉ Σ̌`, `s + (k+1,0) ∈ Σ̌`,
/// `s + (k,0) ∉ Σ̌`.  For normalized slopes this is a rank-one projection.
pub fn make_p_tilde(spec: &RegionSpec, k: i64) -> Result<WordOperator> {
    require_dagger(spec)?;
    if spec.kind != RegionKind::Concave {
        return Err(Error::Precondition(format!("step projections live on a concave region, got {:?}", spec.kind)));
    }
    if k < 1 {
        return Err(Error::Precondition(format!("step index must satisfy k ≥ 1, got {k}")));
    }
    let mask = MaskExpr::prod(
        MaskExpr::prod(
            MaskExpr::not(MaskExpr::Translate(-1, 0)),
            MaskExpr::Translate(-(k + 1), 0),
        ),
        MaskExpr::not(MaskExpr::Translate(-k, 0)),
    );
    Ok(WordOperator::new(vec![WordTerm { coeff: 1, shift: (0, 0), mask }]))
}

/// Sparse integer assembly of a word on a window: triplets
/// `(row, col, value)` with `row = index(s + shift)`, `col = index(s)`, the
/// mask evaluated at the source site `s`.  Shifts landing outside the window
/// are dropped (open boundary).
pub fn assemble_word_integer(word: &WordOperator, window: &Window) -> Result<Vec<(usize, usize, i64)>> {
    let spec = window.spec();
    let mut triplets = Vec::new();
    for (j, &(x, y)) in window.sites().iter().enumerate() {
        for term in word.terms() {
            let v = term.mask.eval(spec, (x, y))?;
            if v == 0 {
                continue;
            }
            if let Some(i) = window.index_of((x + term.shift.0, y + term.shift.1)) {
                triplets.push((i, j, term.coeff * v));
            }
        }
    }
    Ok(triplets)
}

/// Compresses a word onto `region ∩ [-L, L]²` as a dense complex matrix.
/// Entries are exact small integers placed by membership queries.
pub fn build_word(word: &WordOperator, spec: &RegionSpec, half_width: i64) -> Result<TruncatedOperator> {
    let window = spec.enumerate(half_width)?;
    let n = window.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for (i, j, v) in assemble_word_integer(word, &window)? {
        matrix[(i, j)] += Complex64::new(v as f64, 0.0);
    }
    Ok(TruncatedOperator::from_parts(window, 1, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Slope;

    fn concave_spec(num: i64, den: i64, bnum: i64, bden: i64) -> RegionSpec {
        RegionSpec::concave(Slope::rational(num, den).unwrap(), Slope::rational(bnum, bden).unwrap()).unwrap()
    }

    #[test]
    fn projection_word_is_identity_for_zero_shift() {
        let spec = concave_spec(1, 3, 2, 1);
        let word = WordOperator::projection((0, 0));
        let t = build_word(&word, &spec, 6).unwrap();
        let n = t.matrix().nrows();
        assert_eq!(t.matrix(), &DMatrix::identity(n, n));
    }

    #[test]
    fn projection_word_matches_translate_mask() {
        let spec = concave_spec(2, 7, 3, 2);
        let window = spec.enumerate(8).unwrap();
        for shift in [(-1, 0), (0, 1), (2, -1), (-3, 2)] {
            let word = WordOperator::projection(shift);
            let t = build_word(&word, &spec, 8).unwrap();
            let mask = window.translate_mask(shift).unwrap();
            for i in 0..window.len() {
                for j in 0..window.len() {
                    let expect = if i == j { f64::from(mask[i]) } else { 0.0 };
                    assert_eq!(t.matrix()[(i, j)].re, expect, "shift {shift:?}, entry ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn step_projection_is_rank_one_at_expected_site() {
        let spec = concave_spec(2, 7, 3, 2);
        let word = make_p_tilde(&spec, 3).unwrap();
        let t = build_word(&word, &spec, 10).unwrap();
        let idx = t.window().index_of((-4, -1)).unwrap();
        for i in 0..t.matrix().nrows() {
            let expect = if i == idx { 1.0 } else { 0.0 };
            assert_eq!(t.matrix()[(i, i)].re, expect);
        }
        assert_eq!(t.matrix().map(|z| z.norm()).sum(), 1.0);
    }

    #[test]
    fn generator_requires_matching_region_kind() {
        let spec = concave_spec(1, 2, 1, 1);
        assert!(make_a_check(&spec).is_ok());
        assert!(make_a_hat(&spec).is_err());
        let convex = spec.with_kind(RegionKind::Convex);
        assert!(make_a_hat(&convex).is_ok());
        assert!(make_a_check(&convex).is_err());
    }

    #[test]
    fn generator_rejects_unnormalized_slopes() {
        let spec = RegionSpec::concave(Slope::rational(2, 3).unwrap(), Slope::integer(2)).unwrap();
        assert!(matches!(make_a_check(&spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn three_region_action_on_unit_slopes() {
        // On D₁ (outside the right-translate), the word moves a site
        // diagonally; on D₂ it moves right; on D₃ it fixes the site.
        let spec = concave_spec(1, 3, 2, 1);
        let word = make_a_check(&spec).unwrap();
        let window = spec.enumerate(6).unwrap();
        let t = build_word(&word, &spec, 6).unwrap();
        for (j, &(x, y)) in window.sites().iter().enumerate() {
            let in_right = spec.membership(x + 1, y).unwrap();
            let in_down = spec.membership(x, y - 1).unwrap();
            let target = if !in_right {
                (x + 1, y + 1)
            } else if !in_down {
                (x + 1, y)
            } else {
                (x, y)
            };
            for i in 0..window.len() {
                let expect = window.index_of(target) == Some(i);
                assert_eq!(
                    t.matrix()[(i, j)].re != 0.0,
                    expect,
                    "column for site ({x}, {y})"
                );
            }
        }
    }
}
