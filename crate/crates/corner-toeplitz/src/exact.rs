//! Exact Fredholm-index computation for integer word operators via rational
//! elimination — no floating point, no tolerances.
//!
//! The word is assembled on a finite window and its domain is restricted to
//! the interior (window shrunk by the stencil radius) so the artificial edge
//! cannot create spurious kernel vectors.  Kernel and cokernel bases of the
//! rectangular window×interior matrix are computed over ℚ, and the whole
//! computation is repeated at a larger window; the results must agree.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::RegionSpec;
use crate::word::{assemble_word_integer, WordOperator};

/// A sparse rational vector keyed by lattice site.
pub type ExactVector = BTreeMap<(i64, i64), BigRational>;

/// Exact kernel/cokernel data of an interior-restricted word truncation.
#[derive(Debug, Clone)]
pub struct WordIndexResult {
    /// Kernel basis vectors, supported on interior sites, each normalized so
    /// its lexicographically first entry is 1.
    pub kernel: Vec<ExactVector>,
    /// Cokernel basis (kernel of the transpose), same support and
    /// normalization.
    pub cokernel: Vec<ExactVector>,
    /// `dim kernel − dim cokernel`.
    pub index: i64,
    /// Window half-width the reported bases were computed at.
    pub l_used: i64,
}

/// Sparse rational nullspace of a `rows × cols` matrix given as triplets.
///
/// Gauss–Jordan elimination over ℚ with minimum-fill pivoting (among rows
/// with a nonzero in the pivot column, the sparsest is chosen).  Returns one
/// basis vector per free column.
fn rational_nullspace(cols: usize, triplets: &[(usize, usize, i64)]) -> Vec<BTreeMap<usize, BigRational>> {
    let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::new();
    {
        let mut by_row: BTreeMap<usize, BTreeMap<usize, BigRational>> = BTreeMap::new();
        for &(i, j, v) in triplets {
            if v != 0 {
                let entry = by_row.entry(i).or_default().entry(j).or_insert_with(BigRational::zero);
                *entry += BigRational::from(BigInt::from(v));
            }
        }
        for (_, mut row) in by_row {
            row.retain(|_, v| !v.is_zero());
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    let mut pivot_of_col: BTreeMap<usize, usize> = BTreeMap::new();
    let mut row_used = vec![false; rows.len()];
    for col in 0..cols {
        // Sparsest unused row with a nonzero in this column.
        let pivot_row = (0..rows.len())
            .filter(|&r| !row_used[r] && rows[r].contains_key(&col))
            .min_by_key(|&r| rows[r].len());
        let Some(p) = pivot_row else { continue };
        row_used[p] = true;
        pivot_of_col.insert(col, p);
        let scale = rows[p][&col].clone();
        for v in rows[p].values_mut() {
            *v /= &scale;
        }
        let pivot_row_snapshot = rows[p].clone();
        for r in 0..rows.len() {
            if r == p {
                continue;
            }
            let Some(factor) = rows[r].get(&col).cloned() else { continue };
            for (&c, v) in &pivot_row_snapshot {
                let delta = v * &factor;
                let entry = rows[r].entry(c).or_insert_with(BigRational::zero);
                *entry -= delta;
            }
            rows[r].retain(|_, v| !v.is_zero());
        }
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_of_col.contains_key(&free) {
            continue;
        }
        let mut vec: BTreeMap<usize, BigRational> = BTreeMap::new();
        vec.insert(free, BigRational::one());
        for (&col, &row) in &pivot_of_col {
            if let Some(v) = rows[row].get(&free) {
                vec.insert(col, -v.clone());
            }
        }
        basis.push(vec);
    }
    basis
}

/// Divides a vector by its lexicographically first nonzero entry.
fn normalize(vec: &mut ExactVector) {
    if let Some(first) = vec.values().find(|v| !v.is_zero()).cloned() {
        for v in vec.values_mut() {
            *v /= &first;
        }
    }
    vec.retain(|_, v| !v.is_zero());
}

fn bases_at(word: &WordOperator, spec: &RegionSpec, half_width: i64) -> Result<(Vec<ExactVector>, Vec<ExactVector>)> {
    let window = spec.enumerate(half_width)?;
    let triplets = assemble_word_integer(word, &window)?;
    let interior = window.interior_indices(word.stencil_radius());
    let col_of_window_index: BTreeMap<usize, usize> =
        interior.iter().enumerate().map(|(c, &w)| (w, c)).collect();
    let restrict = |trips: &[(usize, usize, i64)]| -> Vec<(usize, usize, i64)> {
        trips
            .iter()
            .filter_map(|&(i, j, v)| col_of_window_index.get(&j).map(|&c| (i, c, v)))
            .collect()
    };
    let transposed: Vec<(usize, usize, i64)> = triplets.iter().map(|&(i, j, v)| (j, i, v)).collect();
    let decode = |basis: Vec<BTreeMap<usize, BigRational>>| -> Vec<ExactVector> {
        basis
            .into_iter()
            .map(|v| {
                let mut out: ExactVector =
                    v.into_iter().map(|(c, val)| (window.sites()[interior[c]], val)).collect();
                normalize(&mut out);
                out
            })
            .collect()
    };
    let kernel = decode(rational_nullspace(interior.len(), &restrict(&triplets)));
    let cokernel = decode(rational_nullspace(interior.len(), &restrict(&transposed)));
    Ok((kernel, cokernel))
}

fn sorted_basis(mut basis: Vec<ExactVector>) -> Vec<ExactVector> {
    basis.sort_by(|a, b| a.keys().next().cmp(&b.keys().next()));
    basis
}

/// Minimum window half-width accepted by [`exact_index_word_operator`].
pub const MIN_EXACT_HALF_WIDTH: i64 = 12;

/// Window growth used for the agreement check.
const EXACT_GROWTH: i64 = 4;

/// Exact kernel, cokernel, and Fredholm index of a word operator compressed
/// onto `region ∩ [−L, L]²` with the domain restricted to interior sites.
///
/// The computation runs at `L` and again at `L + 4`; the index and the
/// normalized bases must coincide, otherwise the window is too small for the
/// kernel vectors to have converged and a non-convergence error is raised.
pub fn exact_index_word_operator(
    word: &WordOperator,
    spec: &RegionSpec,
    half_width: i64,
) -> Result<WordIndexResult> {
    if half_width < MIN_EXACT_HALF_WIDTH {
        return Err(Error::Precondition(format!(
            "window half-width {half_width} below minimum {MIN_EXACT_HALF_WIDTH} for exact index computation"
        )));
    }
    if !spec.is_exact() {
        return Err(Error::Unsupported(
            "exact index computation requires rational or infinite slopes".into(),
        ));
    }
    let (kernel, cokernel) = bases_at(word, spec, half_width)?;
    let (kernel2, cokernel2) = bases_at(word, spec, half_width + EXACT_GROWTH)?;
    let kernel = sorted_basis(kernel);
    let cokernel = sorted_basis(cokernel);
    if kernel != sorted_basis(kernel2) || cokernel != sorted_basis(cokernel2) {
        return Err(Error::NonConvergence(format!(
            "kernel/cokernel differ between L={half_width} and L={}; window too small",
            half_width + EXACT_GROWTH
        )));
    }
    let index = kernel.len() as i64 - cokernel.len() as i64;
    Ok(WordIndexResult { kernel, cokernel, index, l_used: half_width })
}

/// Builds the sparse vector `e_a − e_b` (handy for stating expected kernels).
pub fn difference_vector(a: (i64, i64), b: (i64, i64)) -> ExactVector {
    let mut v = ExactVector::new();
    v.insert(a, BigRational::one());
    v.insert(b, -BigRational::one());
    let mut normalized = v;
    normalize(&mut normalized);
    normalized
}

/// Builds the sparse unit vector `e_a`.
pub fn unit_vector(a: (i64, i64)) -> ExactVector {
    let mut v = ExactVector::new();
    v.insert(a, BigRational::one());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RegionKind, Slope};
    use crate::word::{make_a_check, make_a_hat};

    fn concave(anum: i64, aden: i64, bnum: i64, bden: i64) -> RegionSpec {
        RegionSpec::concave(Slope::rational(anum, aden).unwrap(), Slope::rational(bnum, bden).unwrap()).unwrap()
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        let triplets = vec![(0, 0, 1), (1, 1, 1), (2, 2, 1)];
        assert!(rational_nullspace(3, &triplets).is_empty());
    }

    #[test]
    fn nullspace_of_rank_one_matrix() {
        // Rows (1 2), (2 4): nullspace spanned by (-2, 1).
        let triplets = vec![(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4)];
        let basis = rational_nullspace(2, &triplets);
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        let two = BigRational::from(BigInt::from(2));
        assert_eq!(v[&0].clone(), -(two * v[&1].clone()));
    }

    #[test]
    fn concave_generator_has_index_one() {
        let spec = concave(1, 3, 2, 1);
        let word = make_a_check(&spec).unwrap();
        let result = exact_index_word_operator(&word, &spec, 12).unwrap();
        assert_eq!(result.index, 1);
        assert_eq!(result.kernel, vec![difference_vector((-1, 0), (0, 0))]);
        assert!(result.cokernel.is_empty());
    }

    #[test]
    fn convex_isometry_has_index_minus_one() {
        let spec = RegionSpec::new(
            Slope::rational(1, 2).unwrap(),
            Slope::integer(1),
            RegionKind::Convex,
            crate::geometry::BoundaryCase::Case1,
        )
        .unwrap();
        let word = make_a_hat(&spec).unwrap();
        let result = exact_index_word_operator(&word, &spec, 12).unwrap();
        assert_eq!(result.index, -1);
        assert!(result.kernel.is_empty());
        assert_eq!(result.cokernel, vec![unit_vector((0, 0))]);
    }

    #[test]
    fn small_window_is_rejected() {
        let spec = concave(1, 3, 2, 1);
        let word = make_a_check(&spec).unwrap();
        assert!(matches!(
            exact_index_word_operator(&word, &spec, 8),
            Err(Error::Precondition(_))
        ));
    }
}
