//! Exact geometry of corner regions in the square lattice.
//!
//! A region is cut out of `ℤ²` by two boundary lines through the origin with
//! slopes `α < β`: the α-half-plane `{-αx + y ≥ 0}` (or `> 0`) and the
//! β-half-plane `{-βx + y ≤ 0}` (or `< 0`).  Their intersection is a convex
//! corner, their union a concave corner.  One slope may be infinite
//! (`α = -∞` or `β = +∞`, not both); the infinite-slope half-planes are the
//! pointwise limits of the finite-slope ones, so for example the non-strict
//! `β = +∞` half-plane is `{x ≥ 0}` while the strict one is
//! `{x > 0} ∪ {x = 0, y < 0}`.
//!
//! All predicates on rational slopes are exact: membership of `(x, y)`
//! against slope `p/q` tests the sign of `q·y − p·x` in 128-bit integer
//! arithmetic, which cannot overflow for 64-bit inputs.  Irrational slopes
//! are supported with a floating-point guard band and an explicit
//! "ambiguous" error instead of a silent misclassification.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on enumerated window rows (sites × orbital dimension).
pub const DEFAULT_MAX_DIM: usize = 200_000;

/// Size cap for enumerated windows and assembled matrices, read once from
/// `CORNER_TOEPLITZ_MAX_DIM` (default 200 000).
pub fn max_dim() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("CORNER_TOEPLITZ_MAX_DIM")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_MAX_DIM)
    })
}

fn check_dim(rows: usize) -> Result<()> {
    let cap = max_dim();
    if rows > cap {
        return Err(Error::SizeLimit { requested: rows, cap });
    }
    Ok(())
}

/// An edge slope: a reduced rational, an irrational double, or `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    NegInfinity,
    /// Reduced rational slope `num/den` with `den ≥ 1`.
    Rational { num: i64, den: i64 },
    /// Approximate slope; all predicates involving it carry a guard band.
    Irrational(f64),
    PosInfinity,
}

impl Slope {
    /// Reduced rational slope; fails on a zero denominator.
    pub fn rational(num: i64, den: i64) -> Result<Slope> {
        if den == 0 {
            return Err(Error::InvalidSpec("slope denominator is zero".into()));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        Ok(Slope::Rational { num, den })
    }

    /// Integer slope.
    pub fn integer(num: i64) -> Slope {
        Slope::Rational { num, den: 1 }
    }

    /// Irrational (floating-point) slope; must be finite.
    pub fn irrational(value: f64) -> Result<Slope> {
        if !value.is_finite() {
            return Err(Error::InvalidSpec("irrational slope must be finite".into()));
        }
        Ok(Slope::Irrational(value))
    }

    /// True for `±∞`.
    pub fn is_infinite(&self) -> bool {
        matches!(self, Slope::NegInfinity | Slope::PosInfinity)
    }

    /// True when every predicate on this slope is exact.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Slope::Irrational(_))
    }

    /// Approximate value as an extended real (for ordering diagnostics).
    pub fn approx(&self) -> f64 {
        match *self {
            Slope::NegInfinity => f64::NEG_INFINITY,
            Slope::Rational { num, den } => num as f64 / den as f64,
            Slope::Irrational(v) => v,
            Slope::PosInfinity => f64::INFINITY,
        }
    }

    /// Exact comparison as extended reals.  Rational–rational comparisons use
    /// integer cross-multiplication; anything involving an irrational slope
    /// falls back to the floating-point value.
    pub fn cmp_extended(&self, other: &Slope) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        use Slope::*;
        match (self, other) {
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Equal,
            (NegInfinity, _) | (_, PosInfinity) => Less,
            (_, NegInfinity) | (PosInfinity, _) => Greater,
            (Rational { num: a, den: b }, Rational { num: c, den: d }) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self
                .approx()
                .partial_cmp(&other.approx())
                .unwrap_or(Equal),
        }
    }

    /// Parses `p/q`, an integer, `inf`/`-inf`, or a decimal float (treated as
    /// irrational).
    pub fn parse(text: &str) -> Result<Slope> {
        let t = text.trim();
        match t {
            "inf" | "+inf" | "Inf" | "INF" => return Ok(Slope::PosInfinity),
            "-inf" | "-Inf" | "-INF" => return Ok(Slope::NegInfinity),
            _ => {}
        }
        if let Some((p, q)) = t.split_once('/') {
            let num: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad slope numerator in {t:?}")))?;
            let den: i64 = q
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad slope denominator in {t:?}")))?;
            return Slope::rational(num, den);
        }
        if let Ok(n) = t.parse::<i64>() {
            return Ok(Slope::integer(n));
        }
        if let Ok(v) = t.parse::<f64>() {
            return Slope::irrational(v);
        }
        Err(Error::InvalidSpec(format!("cannot parse slope {t:?}")))
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Slope::NegInfinity => write!(f, "-inf"),
            Slope::Rational { num, den } if den == 1 => write!(f, "{num}"),
            Slope::Rational { num, den } => write!(f, "{num}/{den}"),
            Slope::Irrational(v) => write!(f, "{v}"),
            Slope::PosInfinity => write!(f, "inf"),
        }
    }
}

/// Which of the two boundary lines are included in their half-planes.
///
/// Case 1 = `(-αx+y ≥ 0, -βx+y ≤ 0)`, Case 2 = `(>, ≤)`, Case 3 = `(≥, <)`,
/// Case 4 = `(>, <)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl BoundaryCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(BoundaryCase::Case1),
            2 => Ok(BoundaryCase::Case2),
            3 => Ok(BoundaryCase::Case3),
            4 => Ok(BoundaryCase::Case4),
            _ => Err(Error::InvalidSpec(format!("boundary case must be 1..=4, got {i}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            BoundaryCase::Case1 => 1,
            BoundaryCase::Case2 => 2,
            BoundaryCase::Case3 => 3,
            BoundaryCase::Case4 => 4,
        }
    }

    /// The α-line is excluded (strict inequality) in cases 2 and 4.
    pub fn alpha_strict(&self) -> bool {
        matches!(self, BoundaryCase::Case2 | BoundaryCase::Case4)
    }

    /// The β-line is excluded (strict inequality) in cases 3 and 4.
    pub fn beta_strict(&self) -> bool {
        matches!(self, BoundaryCase::Case3 | BoundaryCase::Case4)
    }
}

impl Default for BoundaryCase {
    fn default() -> Self {
        BoundaryCase::Case1
    }
}

/// Which boolean combination of the two half-planes forms the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    HalfAlpha,
    HalfBeta,
    Convex,
    Concave,
    FullPlane,
}

impl RegionKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "half-alpha" => Ok(RegionKind::HalfAlpha),
            "half-beta" => Ok(RegionKind::HalfBeta),
            "convex" => Ok(RegionKind::Convex),
            "concave" => Ok(RegionKind::Concave),
            "full" => Ok(RegionKind::FullPlane),
            _ => Err(Error::InvalidSpec(format!(
                "region kind must be convex|concave|half-alpha|half-beta|full, got {text:?}"
            ))),
        }
    }
}

/// A fully specified lattice region: two slopes, a boolean combination, and
/// the boundary-inclusion case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub alpha: Slope,
    pub beta: Slope,
    pub kind: RegionKind,
    pub case: BoundaryCase,
}

/// Sign of an irrational line functional with a relative guard band; `None`
/// means the site is too close to the line to classify.
fn guarded_sign(value: f64, x: i64, y: i64) -> Option<std::cmp::Ordering> {
    let band = 1e-12 * (x.abs().max(y.abs()).max(1) as f64);
    if value.abs() <= band {
        None
    } else {
        value.partial_cmp(&0.0)
    }
}

impl RegionSpec {
    pub fn new(alpha: Slope, beta: Slope, kind: RegionKind, case: BoundaryCase) -> Result<Self> {
        if alpha == Slope::PosInfinity {
            return Err(Error::InvalidSpec("α cannot be +∞".into()));
        }
        if beta == Slope::NegInfinity {
            return Err(Error::InvalidSpec("β cannot be -∞".into()));
        }
        if alpha.is_infinite() && beta.is_infinite() {
            return Err(Error::InvalidSpec("α and β cannot both be infinite".into()));
        }
        if kind != RegionKind::FullPlane && alpha.cmp_extended(&beta) != std::cmp::Ordering::Less {
            return Err(Error::InvalidSpec(format!("slopes must satisfy α < β, got α={alpha}, β={beta}")));
        }
        Ok(RegionSpec { alpha, beta, kind, case })
    }

    /// Convenience constructor with default boundary case 1.
    pub fn convex(alpha: Slope, beta: Slope) -> Result<Self> {
        RegionSpec::new(alpha, beta, RegionKind::Convex, BoundaryCase::Case1)
    }

    /// Convenience constructor with default boundary case 1.
    pub fn concave(alpha: Slope, beta: Slope) -> Result<Self> {
        RegionSpec::new(alpha, beta, RegionKind::Concave, BoundaryCase::Case1)
    }

    /// The same slopes and case with a different boolean combination.
    pub fn with_kind(&self, kind: RegionKind) -> RegionSpec {
        RegionSpec { kind, ..*self }
    }

    /// True when all predicates on this spec are exact integer arithmetic.
    pub fn is_exact(&self) -> bool {
        self.alpha.is_exact() && self.beta.is_exact()
    }

    /// Membership in the α-half-plane under this spec's boundary case.
    pub fn in_half_alpha(&self, x: i64, y: i64) -> Result<bool> {
        let strict = self.case.alpha_strict();
        match self.alpha {
            Slope::Rational { num: p, den: q } => {
                // -αx + y ⋛ 0  ⇔  q·y − p·x ⋛ 0  (q > 0)
                let v = q as i128 * y as i128 - p as i128 * x as i128;
                Ok(if strict { v > 0 } else { v >= 0 })
            }
            Slope::NegInfinity => {
                // Pointwise limit of {-αx + y (≥|>) 0} as α → -∞.
                Ok(x > 0 || (x == 0 && if strict { y > 0 } else { y >= 0 }))
            }
            Slope::Irrational(a) => {
                let v = y as f64 - a * x as f64;
                match guarded_sign(v, x, y) {
                    Some(std::cmp::Ordering::Greater) => Ok(true),
                    Some(std::cmp::Ordering::Less) => Ok(false),
                    Some(std::cmp::Ordering::Equal) | None => Err(Error::AmbiguousMembership {
                        x,
                        y,
                        band: 1e-12 * (x.abs().max(y.abs()).max(1) as f64),
                    }),
                }
            }
            Slope::PosInfinity => unreachable!("validated in RegionSpec::new"),
        }
    }

    /// Membership in the β-half-plane under this spec's boundary case.
    pub fn in_half_beta(&self, x: i64, y: i64) -> Result<bool> {
        let strict = self.case.beta_strict();
        match self.beta {
            Slope::Rational { num: p, den: q } => {
                let v = q as i128 * y as i128 - p as i128 * x as i128;
                Ok(if strict { v < 0 } else { v <= 0 })
            }
            Slope::PosInfinity => {
                // Pointwise limit of {-βx + y (≤|<) 0} as β → +∞: the closed
                // variant keeps the whole boundary column x = 0, the strict
                // variant only its lower half.
                Ok(if strict { x > 0 || (x == 0 && y < 0) } else { x >= 0 })
            }
            Slope::Irrational(b) => {
                let v = y as f64 - b * x as f64;
                match guarded_sign(v, x, y) {
                    Some(std::cmp::Ordering::Less) => Ok(true),
                    Some(std::cmp::Ordering::Greater) => Ok(false),
                    Some(std::cmp::Ordering::Equal) | None => Err(Error::AmbiguousMembership {
                        x,
                        y,
                        band: 1e-12 * (x.abs().max(y.abs()).max(1) as f64),
                    }),
                }
            }
            Slope::NegInfinity => unreachable!("validated in RegionSpec::new"),
        }
    }

    /// Exact membership test.  Errors only for sites inside the guard band of
    /// an irrational boundary line.
    pub fn membership(&self, x: i64, y: i64) -> Result<bool> {
        match self.kind {
            RegionKind::FullPlane => Ok(true),
            RegionKind::HalfAlpha => self.in_half_alpha(x, y),
            RegionKind::HalfBeta => self.in_half_beta(x, y),
            RegionKind::Convex => Ok(self.in_half_alpha(x, y)? && self.in_half_beta(x, y)?),
            RegionKind::Concave => Ok(self.in_half_alpha(x, y)? || self.in_half_beta(x, y)?),
        }
    }

    /// Enumerates the region window `Σ ∩ [-L, L]²` in lexicographic order.
    pub fn enumerate(&self, half_width: i64) -> Result<Window> {
        if half_width < 1 {
            return Err(Error::Precondition("window half-width must be ≥ 1".into()));
        }
        let l = half_width;
        let mut sites = Vec::new();
        for x in -l..=l {
            for y in -l..=l {
                if self.membership(x, y)? {
                    sites.push((x, y));
                }
            }
        }
        check_dim(sites.len())?;
        let index = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Window { spec: *self, half_width: l, sites, index })
    }
}

/// A finite window of a region: the sites of `Σ ∩ [-L, L]²` in lexicographic
/// order together with the site → index bijection.
#[derive(Debug, Clone)]
pub struct Window {
    spec: RegionSpec,
    half_width: i64,
    sites: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
}

impl Window {
    pub fn spec(&self) -> &RegionSpec {
        &self.spec
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn sites(&self) -> &[(i64, i64)] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Index of a site in the window, if present.
    pub fn index_of(&self, site: (i64, i64)) -> Option<usize> {
        self.index.get(&site).copied()
    }

    /// Diagonal 0/1 mask of the translate projection: `mask(s) = 1` iff both
    /// `s` and `s − shift` lie in the region (membership of `s` itself is
    /// guaranteed by construction of the window).
    pub fn translate_mask(&self, shift: (i64, i64)) -> Result<Vec<u8>> {
        self.sites
            .iter()
            .map(|&(x, y)| Ok(self.spec.membership(x - shift.0, y - shift.1)? as u8))
            .collect()
    }

    /// Indices of the sites lying in the shrunken box `[-(L−r), L−r]²`, i.e.
    /// the columns kept by an interior restriction of stencil radius `r`.
    pub fn interior_indices(&self, radius: i64) -> Vec<usize> {
        let m = self.half_width - radius;
        self.sites
            .iter()
            .enumerate()
            .filter(|&(_, &(x, y))| x.abs() <= m && y.abs() <= m)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Condition (†) on a normalized slope pair: `0 < α ≤ 1/2` and `1 ≤ β`, with
/// `β = +∞` tolerated for the strict-β boundary cases where the construction
/// still applies.
pub fn slopes_satisfy_dagger(alpha: &Slope, beta: &Slope) -> bool {
    let alpha_ok = match *alpha {
        Slope::Rational { num, den } => num > 0 && 2 * num <= den,
        Slope::Irrational(v) => v > 0.0 && v <= 0.5,
        _ => false,
    };
    let beta_ok = match *beta {
        Slope::Rational { num, den } => num >= den,
        Slope::Irrational(v) => v >= 1.0,
        Slope::PosInfinity => true,
        Slope::NegInfinity => false,
    };
    alpha_ok && beta_ok
}

/// The set `B_k` carrying the rank-one projection `P̃_k`: all sites `s` of
/// the search box `[-L, L]²` with
///
/// ```text
/// s ∈ Σ̌,  s + (1,0) ∉ Σ̌,  s + (k+1, 0) ∈ Σ̌,  s + (k, 0) ∉ Σ̌
/// ```
///
/// where `Σ̌` is the concave region of `(α, β)` under the given boundary
/// case.  For finite slopes this is equivalent to the closed-form strip
/// description `0 ≤ -αx+y < α` and `kβ < -βx+y ≤ (k+1)β` (with the interval
/// closures swapped on the strict sides); the membership formulation extends
/// it uniformly to `β = +∞`.
pub fn b_set(alpha: Slope, beta: Slope, case: BoundaryCase, k: i64, half_width: i64) -> Result<Vec<(i64, i64)>> {
    if k < 1 {
        return Err(Error::Precondition("b_set requires k ≥ 1".into()));
    }
    if !slopes_satisfy_dagger(&alpha, &beta) {
        return Err(Error::Precondition(format!(
            "b_set requires normalized slopes 0 < α ≤ 1/2 ≤ 1 ≤ β, got α={alpha}, β={beta}"
        )));
    }
    let spec = RegionSpec::new(alpha, beta, RegionKind::Concave, case)?;
    let l = half_width;
    let mut out = Vec::new();
    for x in -l..=l {
        for y in -l..=l {
            if spec.membership(x, y)?
                && !spec.membership(x + 1, y)?
                && spec.membership(x + k + 1, y)?
                && !spec.membership(x + k, y)?
            {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(num: i64, den: i64) -> Slope {
        Slope::rational(num, den).unwrap()
    }

    #[test]
    fn quarter_plane_membership() {
        let spec = RegionSpec::convex(Slope::integer(0), Slope::PosInfinity).unwrap();
        assert!(spec.membership(3, 2).unwrap());
        assert!(!spec.membership(-1, 0).unwrap());
        assert!(spec.membership(0, 0).unwrap());
    }

    #[test]
    fn concave_half_slope_membership() {
        // -(1/2)(-4) + (-2) = 0 ≥ 0 puts (-4, -2) on the α-line.
        let spec = RegionSpec::concave(r(1, 2), Slope::integer(1)).unwrap();
        assert!(spec.membership(-4, -2).unwrap());
    }

    #[test]
    fn enumerate_counts() {
        let full = RegionSpec::new(
            Slope::integer(0),
            Slope::PosInfinity,
            RegionKind::FullPlane,
            BoundaryCase::Case1,
        )
        .unwrap();
        assert_eq!(full.enumerate(1).unwrap().len(), 9);

        let convex = RegionSpec::convex(Slope::integer(0), Slope::PosInfinity).unwrap();
        assert_eq!(convex.enumerate(2).unwrap().len(), 9);

        let concave = RegionSpec::concave(Slope::integer(0), Slope::PosInfinity).unwrap();
        assert_eq!(concave.enumerate(1).unwrap().len(), 8);
    }

    #[test]
    fn slope_parsing_round_trip() {
        assert_eq!(Slope::parse("2/7").unwrap(), r(2, 7));
        assert_eq!(Slope::parse("-4/2").unwrap(), r(-2, 1));
        assert_eq!(Slope::parse("inf").unwrap(), Slope::PosInfinity);
        assert_eq!(Slope::parse("-inf").unwrap(), Slope::NegInfinity);
        assert_eq!(Slope::parse("3").unwrap(), Slope::integer(3));
        assert!(matches!(Slope::parse("1.25").unwrap(), Slope::Irrational(_)));
        assert!(Slope::parse("x").is_err());
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(RegionSpec::convex(Slope::NegInfinity, Slope::PosInfinity).is_err());
        assert!(RegionSpec::convex(Slope::integer(1), Slope::integer(1)).is_err());
        assert!(RegionSpec::convex(Slope::integer(2), Slope::integer(1)).is_err());
    }

    #[test]
    fn irrational_guard_band_errors_on_boundary_site() {
        let spec = RegionSpec::new(
            Slope::irrational(0.5).unwrap(),
            Slope::integer(2),
            RegionKind::HalfAlpha,
            BoundaryCase::Case1,
        )
        .unwrap();
        // (2, 1) lies exactly on y = 0.5 x.
        assert!(matches!(spec.membership(2, 1), Err(Error::AmbiguousMembership { .. })));
        assert!(spec.membership(2, 2).unwrap());
    }
}
