//! Reference tight-binding models: the 1-D two-band chiral chain, graded
//! tensor products, the four-band quadrupole model in both frames, a two-band
//! Chern insulator, and the three-dimensional family obtained by crossing the
//! two — plus the symmetry-verification toolkit for the quadrupole model.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{ChiralStructure, Symbol};

type C64 = Complex64;

const SYM_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrix `σ_j` for `j ∈ {0, 1, 2, 3}` (`σ₀ = 1`).
pub fn pauli(j: usize) -> DMatrix<C64> {
    match j {
        0 => DMatrix::identity(2, 2),
        1 => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        2 => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        3 => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        _ => panic!("Pauli index must be 0..=3, got {j}"),
    }
}

/// A symbol together with the chiral grading it anticommutes with.
#[derive(Debug, Clone)]
pub struct ChiralModel {
    pub symbol: Symbol,
    pub chiral: ChiralStructure,
}

impl ChiralModel {
    fn new(symbol: Symbol, pi: DMatrix<C64>) -> Result<ChiralModel> {
        let chiral = ChiralStructure::new(pi)?;
        let report = crate::symbol::validate(&symbol, Some(&chiral));
        if !report.pass {
            return Err(Error::InvalidSpec(format!(
                "model fails validation: hermiticity {:.2e}, chirality {:?}",
                report.hermiticity_residual, report.chiral_residual
            )));
        }
        Ok(ChiralModel { symbol, chiral })
    }
}

fn require_nonzero(name: &str, value: f64) -> Result<()> {
    if value == 0.0 {
        return Err(Error::InvalidSpec(format!("{name} must be nonzero")));
    }
    Ok(())
}

/// Two-band 1-D chiral chain along the x axis:
/// `H(k) = (γ₁ + λ₁ cos k)σ₁ + (γ₂ + λ₂ sin k)σ₂`, grading `σ₃`.
///
/// Its off-diagonal block is `h(k) = γ₁ + iγ₂ + λ₁ cos k + iλ₂ sin k`; the
/// chain is gapped iff `(γ₁/λ₁)² + (γ₂/λ₂)² ≠ 1`, with winding 1 inside that
/// ellipse and 0 outside.
pub fn h_aiii_1d(g1: f64, g2: f64, l1: f64, l2: f64) -> Result<ChiralModel> {
    require_nonzero("λ₁", l1)?;
    require_nonzero("λ₂", l2)?;
    let mut s = Symbol::new(2);
    s.set_term((0, 0), pauli(1) * c(g1, 0.0) + pauli(2) * c(g2, 0.0));
    s.set_term((1, 0), pauli(1) * c(l1 / 2.0, 0.0) + pauli(2) * c(0.0, -l2 / 2.0));
    s.set_term((-1, 0), pauli(1) * c(l1 / 2.0, 0.0) + pauli(2) * c(0.0, l2 / 2.0));
    ChiralModel::new(s, pauli(3))
}

/// Fully dimerized two-band chain `H(k) = e^{ik}σ₊ + e^{−ik}σ₋` with grading
/// `1⊗σ₃`; its off-diagonal block `e^{−ik}` has winding −1.
pub fn ssh_example() -> ChiralModel {
    let mut s = Symbol::new(2);
    let plus = (pauli(1) + pauli(2) * c(0.0, 1.0)) * c(0.5, 0.0);
    let minus = (pauli(1) - pauli(2) * c(0.0, 1.0)) * c(0.5, 0.0);
    s.set_term((1, 0), plus);
    s.set_term((-1, 0), minus);
    ChiralModel::new(s, pauli(3)).expect("fixed model is valid")
}

/// The coefficient list of a 1-D symbol, regardless of which lattice axis it
/// is stored on (constants count as either).
fn line_terms(symbol: &Symbol) -> Result<BTreeMap<i64, DMatrix<C64>>> {
    symbol.axis_terms(0).or_else(|_| symbol.axis_terms(1)).map_err(|_| {
        Error::InvalidSpec("tensor factor must be supported on a single lattice axis".into())
    })
}

/// Graded tensor product of two 1-D chiral models: the first factor acts
/// along x, the second along y, and the total grading is `Π₁⊗Π₂`:
/// `H = H₁⊗Π₂ + 1⊗H₂`.
pub fn tensor_graded(first: &ChiralModel, second: &ChiralModel) -> Result<ChiralModel> {
    let a = line_terms(&first.symbol)?;
    let b = line_terms(&second.symbol)?;
    let (n1, n2) = (first.symbol.dim(), second.symbol.dim());
    let one1 = DMatrix::<C64>::identity(n1, n1);
    let mut s = Symbol::new(n1 * n2);
    for (m, cm) in &a {
        s.add_term((*m, 0), cm.kronecker(second.chiral.matrix()));
    }
    for (n, cn) in &b {
        s.add_term((0, *n), one1.kronecker(cn));
    }
    let pi = first.chiral.matrix().kronecker(second.chiral.matrix());
    ChiralModel::new(s, pi)
}

/// Parameters of the four-band quadrupole model: intracell (γ) and intercell
/// (λ) couplings for the x and y factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleParams {
    pub gx1: f64,
    pub gx2: f64,
    pub lx1: f64,
    pub lx2: f64,
    pub gy1: f64,
    pub gy2: f64,
    pub ly1: f64,
    pub ly2: f64,
}

impl QuadrupoleParams {
    /// The fully dimerized symmetric point (all γ = 0, all λ = 1).
    pub fn dimerized() -> Self {
        QuadrupoleParams { gx1: 0.0, gx2: 0.0, lx1: 1.0, lx2: 1.0, gy1: 0.0, gy2: 0.0, ly1: 1.0, ly2: 1.0 }
    }

    /// Symmetric point with equal intracell couplings on both axes and unit
    /// intercell couplings.
    pub fn symmetric(g: f64) -> Self {
        QuadrupoleParams { gx1: g, gy1: g, ..QuadrupoleParams::dimerized() }
    }

    /// Independent first intracell couplings, unit λ, γ₂ = 0 (the plane
    /// scanned by the phase-diagram sweep).
    pub fn axes(gx1: f64, gy1: f64) -> Self {
        QuadrupoleParams { gx1, gy1, ..QuadrupoleParams::dimerized() }
    }
}

/// Which basis the quadrupole model is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadrupoleFrame {
    /// Block form `H_x(k_x)⊗1 + σ₃⊗H_y(k_y)` with grading `σ₃⊗σ₃`.
    Tensor,
    /// The constant-unitary conjugated frame with grading `σ₃⊗σ₁` (the basis
    /// used in the original quadrupole literature).
    Original,
}

/// The constant unitary relating the two quadrupole frames.
pub fn quadrupole_frame_unitary() -> DMatrix<C64> {
    let mut u = DMatrix::<C64>::zeros(4, 4);
    u[(0, 3)] = c(-1.0, 0.0);
    u[(1, 0)] = c(1.0, 0.0);
    u[(2, 1)] = c(-1.0, 0.0);
    u[(3, 2)] = c(1.0, 0.0);
    u
}

/// Four-band quadrupole model.  The tensor frame is assembled directly in its
/// block form (x-factor terms `c⊗1`, y-factor terms `σ₃⊗c`); the original
/// frame is the exact conjugation of every coefficient by the constant frame
/// unitary.
pub fn quadrupole_2d(p: &QuadrupoleParams, frame: QuadrupoleFrame) -> Result<ChiralModel> {
    let x = h_aiii_1d(p.gx1, p.gx2, p.lx1, p.lx2)?;
    let y = h_aiii_1d(p.gy1, p.gy2, p.ly1, p.ly2)?;
    let xterms = line_terms(&x.symbol)?;
    let yterms = line_terms(&y.symbol)?;
    let one = pauli(0);
    let s3 = pauli(3);
    let mut s = Symbol::new(4);
    for (m, cm) in &xterms {
        s.add_term((*m, 0), cm.kronecker(&one));
    }
    for (n, cn) in &yterms {
        s.add_term((0, *n), s3.kronecker(cn));
    }
    let pi = s3.kronecker(&s3);
    match frame {
        QuadrupoleFrame::Tensor => ChiralModel::new(s, pi),
        QuadrupoleFrame::Original => {
            let u = quadrupole_frame_unitary();
            let ua = u.adjoint();
            let mut t = Symbol::new(4);
            for (&shift, coeff) in s.terms() {
                t.set_term(shift, &u * coeff * &ua);
            }
            ChiralModel::new(t, &u * pi * &ua)
        }
    }
}

/// Two-band Chern insulator
/// `H(k) = sin k₁ σ₁ + sin k₂ σ₂ + (u + cos k₁ + cos k₂)σ₃`.
pub fn chern_model(u: f64) -> Symbol {
    let mut s = Symbol::new(2);
    s.set_term((0, 0), pauli(3) * c(u, 0.0));
    s.set_term((1, 0), pauli(1) * c(0.0, -0.5) + pauli(3) * c(0.5, 0.0));
    s.set_term((-1, 0), pauli(1) * c(0.0, 0.5) + pauli(3) * c(0.5, 0.0));
    s.set_term((0, 1), pauli(2) * c(0.0, -0.5) + pauli(3) * c(0.5, 0.0));
    s.set_term((0, -1), pauli(2) * c(0.0, 0.5) + pauli(3) * c(0.5, 0.0));
    s
}

/// The Chern-model mass point used by the worked three-dimensional example
/// (Chern number −1).
pub fn qwz_chern_model() -> Symbol {
    chern_model(-1.0)
}

/// One member of the three-dimensional class A family: the Chern factor's
/// first momentum is carried by the family parameter (offset so the base
/// point `t = 0` is gapped), its second momentum lives on the x axis, and the
/// dimerized chain acts along y:
/// `H(t)(k_x, k_y) = H₃(t + π, k_x)⊗σ₃ + 1⊗H₂(k_y)`.
pub fn exam_a_family(t: f64) -> Symbol {
    let theta = t + std::f64::consts::PI;
    let chern = qwz_chern_model();
    let chain = ssh_example();
    let s3 = pauli(3);
    let one = pauli(0);
    let mut s = Symbol::new(4);
    for (&(m, n), coeff) in chern.terms() {
        let phase = C64::from_polar(1.0, m as f64 * theta);
        s.add_term((n, 0), (coeff * phase).kronecker(&s3));
    }
    for (&(m, _), coeff) in chain.symbol.terms() {
        s.add_term((0, m), one.kronecker(coeff));
    }
    s.hermitize();
    s
}

/// How a symmetry transforms momentum, as the induced map on lattice shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumMap {
    /// `(k_x, k_y) ↦ (k_x, k_y)`
    Identity,
    /// `(k_x, k_y) ↦ (−k_x, k_y)`
    FlipX,
    /// `(k_x, k_y) ↦ (k_x, −k_y)`
    FlipY,
    /// `(k_x, k_y) ↦ (−k_x, −k_y)`
    FlipBoth,
    /// `(k_x, k_y) ↦ (k_y, −k_x)`
    RotateQuarter,
}

impl MomentumMap {
    /// The shift `ρ(δ)` such that `H(r(k)) = Σ c_{ρ(δ)} e^{iδ·k}`.
    fn shift(&self, d: (i64, i64)) -> (i64, i64) {
        match self {
            MomentumMap::Identity => d,
            MomentumMap::FlipX => (-d.0, d.1),
            MomentumMap::FlipY => (d.0, -d.1),
            MomentumMap::FlipBoth => (-d.0, -d.1),
            MomentumMap::RotateQuarter => (d.1, -d.0),
        }
    }
}

/// A (anti)unitary lattice symmetry candidate: checks the relation
/// `U H(k) U† = sign · H(r(k))` (with fiberwise complex conjugation of `H(k)`
/// first when antiunitary).
#[derive(Debug, Clone)]
pub struct SymmetryOp {
    pub name: String,
    pub matrix: DMatrix<C64>,
    pub antiunitary: bool,
    pub momentum_map: MomentumMap,
    /// +1 for a commuting relation, −1 for an anticommuting one.
    pub sign: f64,
}

impl SymmetryOp {
    pub fn new(
        name: impl Into<String>,
        matrix: DMatrix<C64>,
        antiunitary: bool,
        momentum_map: MomentumMap,
        sign: f64,
    ) -> Result<SymmetryOp> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidSpec("symmetry operator must be square".into()));
        }
        let resid = (matrix.adjoint() * &matrix - DMatrix::<C64>::identity(n, n)).camax();
        if resid > SYM_TOL {
            return Err(Error::InvalidSpec(format!(
                "symmetry operator is not unitary (residual {resid:.2e})"
            )));
        }
        Ok(SymmetryOp { name: name.into(), matrix, antiunitary, momentum_map, sign })
    }
}

/// Outcome of a coefficient-level symmetry check.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryCheck {
    pub residual: f64,
    pub pass: bool,
}

/// Verifies `U H(k) U† = sign·H(r(k))` at the coefficient level: for every
/// shift `δ`, the transformed coefficient must equal `sign·c_{ρ(δ)}`.  For a
/// unitary op the transformed coefficient is `U c_δ U†`; for an antiunitary
/// one it is `U conj(c_{−δ}) U†` (fiberwise conjugation reverses shifts).
pub fn symmetry_check(symbol: &Symbol, op: &SymmetryOp) -> Result<SymmetryCheck> {
    if op.matrix.nrows() != symbol.dim() {
        return Err(Error::InvalidSpec(format!(
            "symmetry operator dimension {} does not match symbol dimension {}",
            op.matrix.nrows(),
            symbol.dim()
        )));
    }
    let zero = DMatrix::<C64>::zeros(symbol.dim(), symbol.dim());
    let mut support: Vec<(i64, i64)> = symbol.terms().map(|(d, _)| *d).collect();
    for d in support.clone() {
        // The check at δ touches c_{ρ(δ)}; make sure shifts whose image is
        // occupied are checked even when c_δ itself vanishes.
        let source = if op.antiunitary { (-d.0, -d.1) } else { d };
        support.push(source);
        support.push(op.momentum_map.shift(d));
    }
    support.sort_unstable();
    support.dedup();
    let ua = op.matrix.adjoint();
    let mut residual: f64 = 0.0;
    for &d in &support {
        let source = if op.antiunitary { (-d.0, -d.1) } else { d };
        let cd = symbol.term(source).cloned().unwrap_or_else(|| zero.clone());
        let cd = if op.antiunitary { cd.map(|z| z.conj()) } else { cd };
        let lhs = &op.matrix * cd * &ua;
        let rhs = symbol.term(op.momentum_map.shift(d)).cloned().unwrap_or_else(|| zero.clone());
        residual = residual.max((lhs - rhs * c(op.sign, 0.0)).camax());
    }
    Ok(SymmetryCheck { residual, pass: residual < SYM_TOL })
}

/// The symmetry candidates of the quadrupole model in the requested frame:
/// chiral grading, two reflections, time reversal, particle-hole, and the
/// quarter rotation.  Original-frame operators are the numerical conjugates
/// of the tensor-frame ones.
pub fn quadrupole_symmetries(frame: QuadrupoleFrame) -> Vec<SymmetryOp> {
    let s0 = pauli(0);
    let s1 = pauli(1);
    let s3 = pauli(3);
    let pi = s3.kronecker(&s3);
    let mx = s1.kronecker(&s3) * c(-1.0, 0.0);
    let my = s0.kronecker(&s1) * c(-1.0, 0.0);
    let mut r4 = DMatrix::<C64>::zeros(4, 4);
    r4[(0, 2)] = c(1.0, 0.0);
    r4[(1, 0)] = c(1.0, 0.0);
    r4[(2, 3)] = c(-1.0, 0.0);
    r4[(3, 1)] = c(1.0, 0.0);
    let theta = DMatrix::<C64>::identity(4, 4);
    let xi = pi.clone();
    let ops = vec![
        ("chiral", pi, false, MomentumMap::Identity, -1.0),
        ("mirror-x", mx, false, MomentumMap::FlipX, 1.0),
        ("mirror-y", my, false, MomentumMap::FlipY, 1.0),
        ("time-reversal", theta, true, MomentumMap::FlipBoth, 1.0),
        ("particle-hole", xi, true, MomentumMap::FlipBoth, -1.0),
        ("rotation-4", r4, false, MomentumMap::RotateQuarter, 1.0),
    ];
    let u = quadrupole_frame_unitary();
    let ua = u.adjoint();
    ops.into_iter()
        .map(|(name, m, anti, map, sign)| {
            let m = match frame {
                QuadrupoleFrame::Tensor => m,
                // An antiunitary V = M∘K conjugates as U V U† = (U M conj(U)†)∘K;
                // the frame unitary is real, so plain conjugation works for both.
                QuadrupoleFrame::Original => &u * m * &ua,
            };
            SymmetryOp::new(name, m, anti, map, sign).expect("fixed operators are unitary")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::roots::{det_laurent, winding_number, LaurentPoly};
    use crate::symbol::validate;

    fn winding_of(model: &ChiralModel) -> i64 {
        let blocks = model.chiral.block_1d(&model.symbol, 0).unwrap();
        winding_number(&det_laurent(&blocks)).unwrap()
    }

    #[test]
    fn chain_winding_matches_phase() {
        assert_eq!(winding_of(&h_aiii_1d(0.0, 0.0, 1.0, 1.0).unwrap()), 1);
        assert_eq!(winding_of(&h_aiii_1d(2.0, 0.0, 1.0, 1.0).unwrap()), 0);
        assert_eq!(winding_of(&h_aiii_1d(0.0, 0.0, 1.0, -1.0).unwrap()), -1);
        assert_eq!(winding_of(&ssh_example()), -1);
    }

    #[test]
    fn gapless_chain_is_rejected_by_winding() {
        let m = h_aiii_1d(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(winding_of_checked(&m), Err(Error::Gapless(_))));
    }

    fn winding_of_checked(model: &ChiralModel) -> crate::error::Result<i64> {
        let blocks = model.chiral.block_1d(&model.symbol, 0)?;
        let mut p = LaurentPoly::default();
        for (shift, block) in &blocks {
            p.add_coeff(*shift, block[(0, 0)]);
        }
        winding_number(&p)
    }

    #[test]
    fn graded_product_anticommutes_and_matches_direct_form() {
        let a = h_aiii_1d(0.3, -0.2, 1.0, 0.7).unwrap();
        let b = h_aiii_1d(-0.5, 0.1, 0.9, 1.1).unwrap();
        let t = tensor_graded(&a, &b).unwrap();
        let report = validate(&t.symbol, Some(&t.chiral));
        assert!(report.pass, "{report:?}");
        // Spot-check the defining block identity at one momentum.
        let (kx, ky) = (0.7, -1.3);
        let direct = a.symbol.eval(kx, 0.0).kronecker(b.chiral.matrix())
            + pauli(0).kronecker(&b.symbol.eval(ky, 0.0));
        assert!((t.symbol.eval(kx, ky) - direct).camax() < 1e-12);
    }

    #[test]
    fn quadrupole_frames_are_exactly_conjugate() {
        let p = QuadrupoleParams { gx1: 0.4, gx2: 0.25, lx1: 1.0, lx2: 0.8, gy1: -0.3, gy2: 0.15, ly1: 1.2, ly2: 1.0 };
        let tensor = quadrupole_2d(&p, QuadrupoleFrame::Tensor).unwrap();
        let original = quadrupole_2d(&p, QuadrupoleFrame::Original).unwrap();
        let u = quadrupole_frame_unitary();
        let ua = u.adjoint();
        for (shift, coeff) in tensor.symbol.terms() {
            let expect = &u * coeff * &ua;
            let got = original.symbol.term(*shift).unwrap();
            assert!((expect - got).camax() < 1e-12, "term {shift:?}");
        }
        assert!((&u * tensor.chiral.matrix() * &ua - original.chiral.matrix()).camax() < 1e-12);
        // The original-frame grading is σ₃⊗1 (the diag(1,1,−1,−1) grading of
        // the quadrupole literature).
        assert!((original.chiral.matrix() - pauli(3).kronecker(&pauli(0))).camax() < 1e-12);
    }

    #[test]
    fn reflection_symmetries_hold_and_break_as_stated() {
        for frame in [QuadrupoleFrame::Tensor, QuadrupoleFrame::Original] {
            let ops = quadrupole_symmetries(frame);
            let good = quadrupole_2d(&QuadrupoleParams::symmetric(0.5), frame).unwrap();
            for op in &ops {
                let check = symmetry_check(&good.symbol, op).unwrap();
                assert!(check.pass, "{frame:?} {} residual {:.2e}", op.name, check.residual);
            }
            // γ₂ ≠ 0 breaks both reflections, time reversal, particle-hole and
            // the quarter rotation (its constant-term identity needs
            // γ_{x,2} = γ_{y,2} = −γ_{x,2}), but not the chiral grading.
            let broken = quadrupole_2d(
                &QuadrupoleParams { gx2: 0.3, gy2: 0.3, ..QuadrupoleParams::symmetric(0.5) },
                frame,
            )
            .unwrap();
            for op in &ops {
                let check = symmetry_check(&broken.symbol, op).unwrap();
                let expect_pass = op.name == "chiral";
                assert_eq!(check.pass, expect_pass, "{frame:?} {} {:.2e}", op.name, check.residual);
            }
            // Unequal intercell couplings on the two axes break the quarter
            // rotation only.
            let aniso = quadrupole_2d(
                &QuadrupoleParams { lx1: 1.3, ..QuadrupoleParams::symmetric(0.5) },
                frame,
            )
            .unwrap();
            for op in &ops {
                let check = symmetry_check(&aniso.symbol, op).unwrap();
                let expect_pass = op.name != "rotation-4";
                assert_eq!(check.pass, expect_pass, "{frame:?} {} {:.2e}", op.name, check.residual);
            }
        }
    }

    #[test]
    fn original_frame_rotation_matches_block_form() {
        // The conjugated quarter rotation should equal (0 1; −iσ₂ 0).
        let ops = quadrupole_symmetries(QuadrupoleFrame::Original);
        let r4 = &ops.iter().find(|o| o.name == "rotation-4").unwrap().matrix;
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        expect[(0, 2)] = c(1.0, 0.0);
        expect[(1, 3)] = c(1.0, 0.0);
        let mis2 = pauli(2) * c(0.0, -1.0);
        for i in 0..2 {
            for j in 0..2 {
                expect[(2 + i, j)] = mis2[(i, j)];
            }
        }
        assert!((r4 - expect).camax() < 1e-12, "got {r4}");
    }

    #[test]
    fn chern_model_is_hermitian_with_five_terms() {
        let s = chern_model(-1.0);
        assert!(validate(&s, None).pass);
        assert_eq!(s.term_count(), 5);
        // Bulk gap 1 at u = −1: check on a coarse momentum grid.
        let mut min_eig = f64::INFINITY;
        for i in 0..24 {
            for j in 0..24 {
                let k = 2.0 * std::f64::consts::PI / 24.0;
                let h = s.eval(i as f64 * k, j as f64 * k);
                let ev = nalgebra::SymmetricEigen::new(h).eigenvalues;
                min_eig = min_eig.min(ev.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs())));
            }
        }
        assert!(min_eig > 0.5, "min |eig| {min_eig}");
    }

    #[test]
    fn family_member_is_hermitian_and_gapped_at_base_point() {
        let s = exam_a_family(0.0);
        assert_eq!(s.dim(), 4);
        assert!(validate(&s, None).pass);
        let mut min_eig = f64::INFINITY;
        for i in 0..32 {
            for j in 0..32 {
                let k = 2.0 * std::f64::consts::PI / 32.0;
                let h = s.eval(i as f64 * k, j as f64 * k);
                let ev = nalgebra::SymmetricEigen::new(h).eigenvalues;
                min_eig = min_eig.min(ev.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs())));
            }
        }
        // The family's base point sits away from the edge-branch crossing.
        assert!(min_eig > 0.9, "min |eig| {min_eig}");
        // 2π-periodicity in the family parameter.
        let s2 = exam_a_family(2.0 * std::f64::consts::PI);
        for (shift, coeff) in s.terms() {
            assert!((coeff - s2.term(*shift).unwrap()).camax() < 1e-9, "term {shift:?}");
        }
    }
}
