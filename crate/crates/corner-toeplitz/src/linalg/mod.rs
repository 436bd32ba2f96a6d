//! Numerical linear algebra kernels: banded LU with partial pivoting,
//! shift-invert eigensolvers for Hermitian truncations, and Laurent
//! polynomial root counting for winding numbers.

pub mod banded;
pub mod eigs;
pub mod roots;
