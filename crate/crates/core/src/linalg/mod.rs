//! Dense complex linear algebra: vectors, Hermitian matrices, eigendecomposition,
//! PSD tests, the Moore–Penrose pseudo-inverse and the generalized Schur
//! complement test.

mod eigen;
mod matrix;
mod psd;
mod vector;

pub use eigen::{eigenvalues, evd, EigenDecomposition, QL_MAX_ITERATIONS};
pub use matrix::{HermitianMatrix, HERMITIAN_ASYMMETRY_TOL};
pub use psd::{
    generalized_schur, generalized_schur_feasible, is_psd, penrose_residual, pseudo_inverse,
    PsdReport, SchurReport, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL,
};
pub use vector::ComplexVector;

pub type C64 = num_complex::Complex64;

/// Orthonormalizes `vectors` by modified Gram–Schmidt, dropping any vector whose
/// residual falls below `drop_tol` relative to its original norm.
pub fn orthonormalize(vectors: &[ComplexVector], drop_tol: f64) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        let mut r = v.clone();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for q in &basis {
                r = r.axpy(-q.dot(&r), q);
            }
        }
        if r.norm() > drop_tol * original {
            basis.push(r.normalized().expect("non-zero residual"));
        }
    }
    basis
}

/// Stacks column vectors into a matrix.
pub fn columns_to_matrix(cols: &[ComplexVector]) -> nalgebra::DMatrix<C64> {
    let n = cols[0].dim();
    nalgebra::DMatrix::from_fn(n, cols.len(), |i, j| cols[j].get(i))
}
