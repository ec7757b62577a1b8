use nalgebra::DMatrix;
use serde::Serialize;

use super::eigen::{eigenvalues, evd, rank_cutoff};
use super::{ComplexVector, HermitianMatrix, C64};
use crate::error::Result;

/// Eigenvalues below `DEFAULT_RANK_TOL · max(max|λ|, 1)` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Slack on the minimum eigenvalue accepted by [`is_psd`].
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub feasible: bool,
}

/// PSD test with margin: feasible iff `λ_min ≥ -tol`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> Result<PsdReport> {
    let vals = eigenvalues(m)?;
    let min_eigenvalue = *vals.last().expect("non-empty");
    Ok(PsdReport {
        min_eigenvalue,
        feasible: min_eigenvalue >= -tol,
    })
}

/// Moore–Penrose pseudo-inverse through the eigendecomposition, inverting
/// only eigenvalues above the rank cutoff.
pub fn pseudo_inverse(m: &HermitianMatrix, rank_tol: f64) -> Result<HermitianMatrix> {
    let dec = evd(m)?;
    let cutoff = rank_cutoff(dec.eigenvalues(), rank_tol);
    Ok(dec.reconstruct_with(|l| (l.abs() >= cutoff).then(|| 1.0 / l)))
}

/// Both conditions of the generalized Schur complement test for
/// `[a b; bᴴ c] ⪰ 0` with `a ⪰ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurReport {
    /// `c - bᴴ a† b`
    pub complement: f64,
    /// `‖(I - a a†) b‖`
    pub range_residual: f64,
    pub b_norm: f64,
    pub complement_ok: bool,
    pub range_ok: bool,
}

impl SchurReport {
    pub fn feasible(&self) -> bool {
        self.complement_ok && self.range_ok
    }
}

/// Evaluates the generalized Schur conditions. `rank_tol` sets both the
/// pseudo-inverse cutoff and the slack on each condition; the complement
/// slack is scaled by `max(1, |c|, bᴴa†b)`.
pub fn generalized_schur(
    a: &HermitianMatrix,
    b: &ComplexVector,
    c: f64,
    rank_tol: f64,
) -> Result<SchurReport> {
    let pinv = pseudo_inverse(a, rank_tol)?;
    let pinv_b = pinv.mul_vec(b);
    let quad = b.dot(&pinv_b).re;
    let complement = c - quad;

    let projected = a.mul_vec(&pinv_b);
    let range_residual = b.sub(&projected).norm();
    let b_norm = b.norm();

    let scale = 1.0f64.max(c.abs()).max(quad.abs());
    Ok(SchurReport {
        complement,
        range_residual,
        b_norm,
        complement_ok: complement >= -rank_tol * scale,
        range_ok: range_residual <= rank_tol * b_norm,
    })
}

pub fn generalized_schur_feasible(
    a: &HermitianMatrix,
    b: &ComplexVector,
    c: f64,
    rank_tol: f64,
) -> Result<bool> {
    Ok(generalized_schur(a, b, c, rank_tol)?.feasible())
}

/// Largest Penrose-identity deviation (max-abs entry) of a candidate pseudo-inverse.
pub fn penrose_residual(m: &HermitianMatrix, pinv: &HermitianMatrix) -> f64 {
    let mp = m.matmul(pinv);
    let pm = pinv.matmul(m);
    let max_abs = |x: &DMatrix<C64>| x.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let r1 = max_abs(&(&mp * m.as_matrix() - m.as_matrix()));
    let r2 = max_abs(&(&pm * pinv.as_matrix() - pinv.as_matrix()));
    let r3 = max_abs(&(mp.adjoint() - &mp));
    let r4 = max_abs(&(pm.adjoint() - &pm));
    r1.max(r2).max(r3).max(r4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_inverse() {
        let m = HermitianMatrix::from_diagonal(&[2.0, 4.0]);
        let p = pseudo_inverse(&m, DEFAULT_RANK_TOL).unwrap();
        let expected = HermitianMatrix::from_diagonal(&[0.5, 0.25]);
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rank_one_pseudo_inverse() {
        let u = ComplexVector::new(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let m = HermitianMatrix::scaled_outer(5.0, &u);
        let p = pseudo_inverse(&m, DEFAULT_RANK_TOL).unwrap();
        let expected = HermitianMatrix::scaled_outer(0.2, &u);
        assert!(p.max_abs_diff(&expected) < 1e-15);
        assert!(penrose_residual(&m, &p) < 1e-12);
    }

    #[test]
    fn zero_matrix_psd() {
        let r = is_psd(&HermitianMatrix::zeros(3), DEFAULT_PSD_TOL).unwrap();
        assert_eq!(r.min_eigenvalue, 0.0);
        assert!(r.feasible);
    }

    #[test]
    fn indefinite_diag() {
        let r = is_psd(&HermitianMatrix::from_diagonal(&[1.0, -0.5]), DEFAULT_PSD_TOL).unwrap();
        assert_eq!(r.min_eigenvalue, -0.5);
        assert!(!r.feasible);
    }

    #[test]
    fn schur_identity_zero_border() {
        let a = HermitianMatrix::identity(3);
        let b = ComplexVector::zeros(3);
        assert!(generalized_schur_feasible(&a, &b, 1.0, DEFAULT_RANK_TOL).unwrap());
    }

    #[test]
    fn schur_range_violation() {
        let u = ComplexVector::basis(3, 0);
        let a = HermitianMatrix::outer(&u);
        let b = ComplexVector::basis(3, 1).scale(0.3);
        for c in [-1.0, 0.0, 1.0, 1e6] {
            let rep = generalized_schur(&a, &b, c, DEFAULT_RANK_TOL).unwrap();
            assert!(!rep.range_ok);
            assert!(!rep.feasible());
        }
    }
}
