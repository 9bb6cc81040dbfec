//! Small self-contained linear algebra: a real CSR matrix, dense symmetric
//! eigen-decomposition and a pivoted linear solver.

mod dense;
mod sparse;

pub use dense::{solve_in_place, SymmetricEigen};
pub use sparse::{Csr, CsrBuilder};

use num_complex::Complex64;

/// ⟨a|b⟩ with the first argument conjugated.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
