use nalgebra::DMatrix;

use super::{ComplexVector, C64};
use crate::error::{Error, Result};

/// Relative asymmetry above which construction fails instead of symmetrizing.
pub const HERMITIAN_ASYMMETRY_TOL: f64 = 1e-12;

/// Dense complex Hermitian matrix. Hermitian symmetry is exact after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates symmetry and returns `(m + mᴴ)/2`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyDimension);
        }
        let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let mut asym = 0.0f64;
        for j in 0..cols {
            for i in 0..=j {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if scale > 0.0 && asym > HERMITIAN_ASYMMETRY_TOL * scale {
            return Err(Error::NotHermitian {
                asymmetry: asym / scale,
            });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for j in 0..n {
            out[(j, j)] = C64::new(out[(j, j)].re, 0.0);
            for i in 0..j {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Self(out)
    }

    /// Wraps a matrix known to be Hermitian up to rounding (internal assembly paths).
    pub(crate) fn from_assembled(m: DMatrix<C64>) -> Self {
        Self::symmetrized(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `v vᴴ`
    pub fn outer(v: &ComplexVector) -> Self {
        let inner = v.inner();
        Self::symmetrized(inner * inner.adjoint())
    }

    /// `weight · v vᴴ`
    pub fn scaled_outer(weight: f64, v: &ComplexVector) -> Self {
        Self::outer(v).scale(weight)
    }

    /// Block matrix `[a b; bᴴ c]` of dimension `a.dim() + 1`.
    pub fn bordered(a: &HermitianMatrix, b: &ComplexVector, c: f64) -> Self {
        let n = a.dim();
        assert_eq!(b.dim(), n, "border vector dimension mismatch");
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&a.0);
        for i in 0..n {
            m[(i, n)] = b.get(i);
            m[(n, i)] = b.get(i).conj();
        }
        m[(n, n)] = C64::new(c, 0.0);
        Self(m)
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add");
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in sub");
        Self(&self.0 - &other.0)
    }

    /// `self + shift · I`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += C64::new(shift, 0.0);
        }
        Self(m)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), v.dim(), "dimension mismatch in mul_vec");
        ComplexVector::from_inner(&self.0 * v.inner())
    }

    /// Real quadratic form `vᴴ M v`.
    pub fn quad_form(&self, v: &ComplexVector) -> f64 {
        v.dot(&self.mul_vec(v)).re
    }

    /// General product `self · other` (not Hermitian in general).
    pub fn matmul(&self, other: &Self) -> DMatrix<C64> {
        &self.0 * &other.0
    }

    /// Unitary congruence `Bᴴ M B` for a basis `B` with orthonormal columns.
    pub fn compress(&self, basis: &DMatrix<C64>) -> Self {
        Self::symmetrized(basis.adjoint() * &self.0 * basis)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn symmetrizes_tiny_asymmetry() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 1e-15),
                C64::new(1.0, 1.0),
                C64::new(1.0 + 1e-14, -1.0),
                C64::new(3.0, 0.0),
            ],
        );
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
        assert_eq!(h.get(0, 0).im, 0.0);
    }

    #[test]
    fn rejects_non_square() {
        let m = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn bordered_layout() {
        let a = HermitianMatrix::identity(2);
        let b = ComplexVector::new(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)]).unwrap();
        let m = HermitianMatrix::bordered(&a, &b, 7.0);
        assert_eq!(m.dim(), 3);
        assert_eq!(m.get(0, 2), C64::new(1.0, 2.0));
        assert_eq!(m.get(2, 0), C64::new(1.0, -2.0));
        assert_eq!(m.get(2, 2), C64::new(7.0, 0.0));
    }

    #[test]
    fn outer_trace_is_norm_sqr() {
        let v = ComplexVector::new(vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)]).unwrap();
        let m = HermitianMatrix::scaled_outer(3.0, &v);
        assert!((m.trace() - 3.0 * 6.0).abs() < 1e-14);
        assert!((m.quad_form(&v) - 3.0 * 36.0).abs() < 1e-12);
    }
}
