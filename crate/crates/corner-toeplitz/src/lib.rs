//! Numerical toolkit for truncated lattice operators on half-plane and
//! corner-shaped subsets of ℤ², and the integer invariants attached to them.
//!
//! The crate models tight-binding Hamiltonians as matrix-valued Laurent
//! polynomial symbols, compresses them onto convex or concave corner regions
//! with exact membership arithmetic, and computes:
//!
//! - exact Fredholm indices of integer word operators via rational
//!   elimination,
//! - 1-D winding numbers and 2-D weak/Chern invariants of gapped symbols,
//! - chiral zero-mode signatures of corner-truncated Hamiltonians,
//! - spectral flow of corner modes along symbol paths,
//!
//! together with the consistency relations among them (convex/concave sign
//! flip, product formulas for tensor-graded symbols, weak-invariant
//! obstructions).  A command-line front end exposes the same operations; see
//! the `corner-toeplitz` binary.

pub mod edge;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod invariants;
pub mod linalg;
pub mod models;
pub mod sl2z;
pub mod sweep;
pub mod symbol;
pub mod word;

pub use error::{Error, Result};
