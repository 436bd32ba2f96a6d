//! Matrix-valued Laurent-polynomial symbols (tight-binding hopping tables)
//! and their compressions onto finite region windows.
//!
//! A symbol is a finite map `(m, n) ↦ c_{m,n}` of hopping matrices; its
//! momentum-space form is `H(k) = Σ c_{m,n} e^{i(m·kx + n·ky)}`, so the lattice
//! operator has matrix element `c_{s' − s}` between sites `s → s'`.  A symbol
//! is Hermitian when `c_{-m,-n} = c_{m,n}†` for every term, and chiral when a
//! grading `Π` (`Π² = 1`, `Π = Π†`) anti-commutes with every term.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{max_dim, RegionSpec, Window};

pub type C64 = Complex64;

/// Tolerance for structural matrix identities (Hermiticity, unitarity,
/// anti-commutation) that hold exactly in the constructions.
pub const STRUCT_TOL: f64 = 1e-12;

fn zero_matrix(dim: usize) -> DMatrix<C64> {
    DMatrix::zeros(dim, dim)
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A finite-support matrix-valued Laurent polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    dim: usize,
    terms: BTreeMap<(i64, i64), DMatrix<C64>>,
}

impl Symbol {
    /// Empty symbol of internal rank `dim`.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "symbol rank must be positive");
        Symbol { dim, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &DMatrix<C64>)> {
        self.terms.iter()
    }

    pub fn term(&self, shift: (i64, i64)) -> Option<&DMatrix<C64>> {
        self.terms.get(&shift)
    }

    /// Number of stored (nonzero) terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Largest `max(|m|, |n|)` over the support.
    pub fn stencil_radius(&self) -> i64 {
        self.terms.keys().map(|&(m, n)| m.abs().max(n.abs())).max().unwrap_or(0)
    }

    /// Adds `c` to the `(m, n)` coefficient, pruning the term if it becomes
    /// zero.
    pub fn add_term(&mut self, shift: (i64, i64), c: DMatrix<C64>) {
        assert_eq!(c.nrows(), self.dim);
        assert_eq!(c.ncols(), self.dim);
        let entry = self.terms.entry(shift).or_insert_with(|| zero_matrix(self.dim));
        *entry += c;
        if max_abs(entry) == 0.0 {
            self.terms.remove(&shift);
        }
    }

    /// Replaces the `(m, n)` coefficient.
    pub fn set_term(&mut self, shift: (i64, i64), c: DMatrix<C64>) {
        assert_eq!(c.nrows(), self.dim);
        assert_eq!(c.ncols(), self.dim);
        if max_abs(&c) == 0.0 {
            self.terms.remove(&shift);
        } else {
            self.terms.insert(shift, c);
        }
    }

    /// Maximal Hermiticity defect `max ‖c_{-m,-n} − c_{m,n}†‖`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(m, n), c) in &self.terms {
            let partner = self.terms.get(&(-m, -n)).cloned().unwrap_or_else(|| zero_matrix(self.dim));
            worst = worst.max(max_abs(&(partner - c.adjoint())));
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() < STRUCT_TOL
    }

    /// Adds the adjoint of every one-sided term so the symbol becomes
    /// Hermitian: for each `(m, n)` with no `(-m, -n)` partner, inserts
    /// `c_{m,n}†` at `(-m, -n)`.  Terms with partners are left untouched.
    pub fn hermitize(&mut self) {
        let missing: Vec<((i64, i64), DMatrix<C64>)> = self
            .terms
            .iter()
            .filter(|(&(m, n), _)| !self.terms.contains_key(&(-m, -n)) && (m, n) != (0, 0))
            .map(|(&(m, n), c)| ((-m, -n), c.adjoint()))
            .collect();
        for (shift, c) in missing {
            self.terms.insert(shift, c);
        }
        // A lone constant term is symmetrized in place.
        if let Some(c0) = self.terms.get(&(0, 0)) {
            if max_abs(&(c0.clone() - c0.adjoint())) >= STRUCT_TOL {
                let sym = (c0.clone() + c0.adjoint()) * C64::new(0.5, 0.0);
                self.terms.insert((0, 0), sym);
            }
        }
    }

    /// Momentum-space evaluation `H(kx, ky) = Σ c_{m,n} e^{i(m·kx + n·ky)}`.
    pub fn eval(&self, kx: f64, ky: f64) -> DMatrix<C64> {
        let mut h = zero_matrix(self.dim);
        for (&(m, n), c) in &self.terms {
            let phase = C64::from_polar(1.0, m as f64 * kx + n as f64 * ky);
            h += c * phase;
        }
        h
    }

    /// Shifts the Fermi level: subtracts `mu · I` from the constant term.
    pub fn shift_fermi_level(&mut self, mu: f64) {
        if mu != 0.0 {
            let shift = DMatrix::from_diagonal_element(self.dim, self.dim, C64::new(-mu, 0.0));
            self.add_term((0, 0), shift);
        }
    }

    /// The symbol restricted to one axis as a 1-D hopping table, failing if
    /// any support lies off that axis.
    pub fn axis_terms(&self, axis: usize) -> Result<BTreeMap<i64, DMatrix<C64>>> {
        let mut out = BTreeMap::new();
        for (&(m, n), c) in &self.terms {
            let (along, off) = if axis == 0 { (m, n) } else { (n, m) };
            if off != 0 {
                return Err(Error::Unsupported(format!(
                    "symbol has support at ({m}, {n}); expected a one-dimensional symbol on axis {axis}"
                )));
            }
            out.insert(along, c.clone());
        }
        Ok(out)
    }
}

/// A chiral grading: a Hermitian involution anti-commuting with a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiralStructure {
    pi: DMatrix<C64>,
}

impl ChiralStructure {
    pub fn new(pi: DMatrix<C64>) -> Result<Self> {
        if pi.nrows() != pi.ncols() {
            return Err(Error::InvalidSpec("chiral operator must be square".into()));
        }
        let n = pi.nrows();
        let herm = max_abs(&(pi.clone() - pi.adjoint()));
        let invol = max_abs(&(&pi * &pi - DMatrix::identity(n, n)));
        if herm >= STRUCT_TOL || invol >= STRUCT_TOL {
            return Err(Error::InvalidSpec(format!(
                "chiral operator is not a Hermitian involution (‖Π−Π†‖={herm:e}, ‖Π²−1‖={invol:e})"
            )));
        }
        Ok(ChiralStructure { pi })
    }

    pub fn dim(&self) -> usize {
        self.pi.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.pi
    }

    /// Maximal anti-commutation defect `max ‖Π c Π + c‖` over the terms.
    pub fn anticommutation_residual(&self, symbol: &Symbol) -> f64 {
        let mut worst: f64 = 0.0;
        for (_, c) in symbol.terms() {
            worst = worst.max(max_abs(&(&self.pi * c * &self.pi + c)));
        }
        worst
    }

    /// Orthonormal bases of the `+1` and `-1` eigenspaces of `Π`.
    ///
    /// When `Π` is already diagonal with `±1` entries the coordinate basis is
    /// used directly (in index order), so that the block decomposition of a
    /// symbol is reproducible; otherwise the eigenbasis is computed
    /// numerically.
    pub fn graded_basis(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.dim();
        let mut is_diag_sign = true;
        for i in 0..n {
            for j in 0..n {
                let z = self.pi[(i, j)];
                let expect_diag = i == j && (z - C64::new(1.0, 0.0)).norm() < STRUCT_TOL
                    || i == j && (z + C64::new(1.0, 0.0)).norm() < STRUCT_TOL;
                if i == j && !expect_diag || i != j && z.norm() >= STRUCT_TOL {
                    is_diag_sign = false;
                }
            }
        }
        let mut plus_cols: Vec<DMatrix<C64>> = Vec::new();
        let mut minus_cols: Vec<DMatrix<C64>> = Vec::new();
        if is_diag_sign {
            for i in 0..n {
                let mut e = DMatrix::zeros(n, 1);
                e[(i, 0)] = C64::new(1.0, 0.0);
                if self.pi[(i, i)].re > 0.0 {
                    plus_cols.push(e);
                } else {
                    minus_cols.push(e);
                }
            }
        } else {
            let eig = nalgebra::SymmetricEigen::new(self.pi.clone());
            for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                let col = DMatrix::from_column_slice(n, 1, eig.eigenvectors.column(i).as_slice());
                if lam > 0.0 {
                    plus_cols.push(col);
                } else {
                    minus_cols.push(col);
                }
            }
        }
        let stack = |cols: &[DMatrix<C64>]| {
            let mut m = DMatrix::zeros(n, cols.len());
            for (j, c) in cols.iter().enumerate() {
                m.set_column(j, &c.column(0));
            }
            m
        };
        (stack(&plus_cols), stack(&minus_cols))
    }

    /// Off-diagonal block `h_{m,n} = Q₋† c_{m,n} Q₊` of a chiral symbol in
    /// the grading basis, as a 1-D Laurent hopping table along `axis`.
    pub fn block_1d(&self, symbol: &Symbol, axis: usize) -> Result<BTreeMap<i64, DMatrix<C64>>> {
        let (qp, qm) = self.graded_basis();
        let mut out = BTreeMap::new();
        for (shift, c) in symbol.axis_terms(axis)? {
            out.insert(shift, qm.adjoint() * c * &qp);
        }
        Ok(out)
    }
}

/// Validation report for a symbol and optional chiral structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_residual: f64,
    pub chiral_residual: Option<f64>,
    pub pass: bool,
}

/// Checks Hermiticity of a symbol and, when given, anti-commutation with the
/// chiral structure; passes iff both residuals are below `1e-12`.
pub fn validate(symbol: &Symbol, chiral: Option<&ChiralStructure>) -> ValidationReport {
    let hermiticity_residual = symbol.hermiticity_residual();
    let chiral_residual = chiral.map(|c| c.anticommutation_residual(symbol));
    let pass = hermiticity_residual < STRUCT_TOL && chiral_residual.map_or(true, |r| r < STRUCT_TOL);
    ValidationReport { hermiticity_residual, chiral_residual, pass }
}

/// A symbol compressed onto a finite region window with open boundary.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    window: Window,
    dim: usize,
    matrix: DMatrix<C64>,
}

impl TruncatedOperator {
    pub(crate) fn from_parts(window: Window, dim: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), window.len() * dim);
        TruncatedOperator { window, dim, matrix }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Total matrix dimension (site count × internal rank).
    pub fn size(&self) -> usize {
        self.window.len() * self.dim
    }
}

/// Compresses a symbol onto `region ∩ [-L, L]²`: the block `[s', s]` is
/// `c_{s' − s}` when both sites lie in the window, with open boundary at the
/// artificial window edge.
pub fn compress(symbol: &Symbol, spec: &RegionSpec, half_width: i64) -> Result<TruncatedOperator> {
    let window = spec.enumerate(half_width)?;
    compress_on_window(symbol, window)
}

/// `compress` onto an already enumerated window.
pub fn compress_on_window(symbol: &Symbol, window: Window) -> Result<TruncatedOperator> {
    let dim = symbol.dim();
    let size = window.len().checked_mul(dim).unwrap_or(usize::MAX);
    if size > max_dim() {
        return Err(Error::SizeLimit { requested: size, cap: max_dim() });
    }
    if window.is_empty() {
        return Err(Error::Precondition("window is empty".into()));
    }
    let mut matrix = DMatrix::zeros(size, size);
    for (j, &(x, y)) in window.sites().iter().enumerate() {
        for (&(m, n), c) in symbol.terms() {
            if let Some(i) = window.index_of((x + m, y + n)) {
                for a in 0..dim {
                    for b in 0..dim {
                        matrix[(i * dim + a, j * dim + b)] += c[(a, b)];
                    }
                }
            }
        }
    }
    Ok(TruncatedOperator { window, dim, matrix })
}

// --- JSON model format -----------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    dx: i64,
    dy: i64,
    #[serde(flatten)]
    matrix: MatrixJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    dim: usize,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chiral: Option<MatrixJson>,
}

fn matrix_from_json(dim: usize, m: &MatrixJson, what: &str) -> Result<DMatrix<C64>> {
    if m.re.len() != dim || m.im.len() != dim || m.re.iter().chain(m.im.iter()).any(|row| row.len() != dim) {
        return Err(Error::InvalidSpec(format!("{what}: expected {dim}×{dim} re/im arrays")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| C64::new(m.re[i][j], m.im[i][j])))
}

/// Loads the JSON model format:
///
/// ```json
/// { "dim": 2,
///   "terms": [ { "dx": 1, "dy": 0, "re": [[..]], "im": [[..]] } ],
///   "chiral": { "re": [[..]], "im": [[..]] } }
/// ```
///
/// Hermiticity is enforced at load time.  With `auto_hermitize`, terms whose
/// `(-dx, -dy)` partner is absent get the adjoint added automatically;
/// otherwise any defect above `1e-12` is an error.
pub fn load_model_json(text: &str, auto_hermitize: bool) -> Result<(Symbol, Option<ChiralStructure>)> {
    let model: ModelJson = serde_json::from_str(text)?;
    if model.dim == 0 {
        return Err(Error::InvalidSpec("model dim must be positive".into()));
    }
    let mut symbol = Symbol::new(model.dim);
    for term in &model.terms {
        let c = matrix_from_json(model.dim, &term.matrix, "model term")?;
        symbol.add_term((term.dx, term.dy), c);
    }
    if auto_hermitize {
        symbol.hermitize();
    }
    let residual = symbol.hermiticity_residual();
    if residual >= STRUCT_TOL {
        return Err(Error::InvalidSpec(format!(
            "model is not Hermitian (residual {residual:e}); pass --auto-hermitize to add adjoint terms"
        )));
    }
    let chiral = match &model.chiral {
        Some(m) => Some(ChiralStructure::new(matrix_from_json(model.dim, m, "chiral operator")?)?),
        None => None,
    };
    Ok((symbol, chiral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryCase, RegionKind, Slope};

    fn pauli(k: usize) -> DMatrix<C64> {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match k {
            1 => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            3 => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
            _ => DMatrix::identity(2, 2),
        }
    }

    #[test]
    fn hermiticity_detects_one_sided_terms() {
        let mut s = Symbol::new(2);
        s.set_term((1, 0), DMatrix::identity(2, 2));
        assert!(!s.is_hermitian());
        s.hermitize();
        assert!(s.is_hermitian());
    }

    #[test]
    fn chiral_validation() {
        // Dimerized chain: off-diagonal terms anti-commute with σ₃.
        let mut s = Symbol::new(2);
        s.set_term((1, 0), pauli(1) * C64::new(0.5, 0.0) - pauli(2) * C64::new(0.0, 0.5));
        s.hermitize();
        let pi = ChiralStructure::new(pauli(3)).unwrap();
        let report = validate(&s, Some(&pi));
        assert!(report.pass, "residuals: {report:?}");
    }

    #[test]
    fn compress_constant_symbol_is_identity() {
        let mut s = Symbol::new(1);
        s.set_term((0, 0), DMatrix::identity(1, 1));
        let spec = RegionSpec::new(
            Slope::integer(0),
            Slope::PosInfinity,
            RegionKind::Convex,
            BoundaryCase::Case1,
        )
        .unwrap();
        let t = compress(&s, &spec, 3).unwrap();
        assert_eq!(t.matrix(), &DMatrix::identity(16, 16));
    }

    #[test]
    fn compress_shift_symbol_is_tridiagonal_per_row() {
        // c_{1,0} = c_{-1,0} = 1 on the half-plane x ≥ 0.
        let mut s = Symbol::new(1);
        s.set_term((1, 0), DMatrix::identity(1, 1));
        s.set_term((-1, 0), DMatrix::identity(1, 1));
        let spec = RegionSpec::new(
            Slope::integer(0),
            Slope::PosInfinity,
            RegionKind::HalfBeta,
            BoundaryCase::Case1,
        )
        .unwrap();
        let t = compress(&s, &spec, 2).unwrap();
        // Sites (x, y), x ∈ {0,1,2}, y ∈ {-2..2}, lexicographic: hopping
        // couples (x, y) ↔ (x+1, y), i.e. index distance 5.
        let m = t.matrix();
        assert_eq!(m.nrows(), 15);
        for i in 0..15 {
            for j in 0..15 {
                let expect = (i as i64 - j as i64).abs() == 5;
                assert_eq!(m[(i, j)] != C64::new(0.0, 0.0), expect, "entry ({i}, {j})");
            }
        }
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{
            "dim": 2,
            "terms": [ { "dx": 1, "dy": 0, "re": [[0.0, 1.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]] } ],
            "chiral": { "re": [[1.0, 0.0], [0.0, -1.0]], "im": [[0.0, 0.0], [0.0, 0.0]] }
        }"#;
        assert!(load_model_json(text, false).is_err());
        let (symbol, chiral) = load_model_json(text, true).unwrap();
        assert!(symbol.is_hermitian());
        assert!(chiral.is_some());
        assert_eq!(symbol.term_count(), 2);
    }
}
