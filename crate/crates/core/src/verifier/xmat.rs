use crate::beamformer::{covariance_views, BeamformingSolution, TargetSinrs};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// One pair per user:
/// `X_{e,k} = Σ_{i≠k} Sᵢ + Wₑ − Sₖ/γ_{e,k}` and `X_{s,k} = Sₖ/γₖ − Σ_{i≠k} Sᵢ − Wₑ`.
pub fn build_x_matrices(
    sol: &BeamformingSolution,
    targets: &TargetSinrs,
) -> Result<(Vec<HermitianMatrix>, Vec<HermitianMatrix>)> {
    let (we, s) = covariance_views(sol);
    x_matrices_from(&we, &s, targets)
}

/// Same as [`build_x_matrices`] from explicit covariances.
pub fn x_matrices_from(
    we: &HermitianMatrix,
    s: &[HermitianMatrix],
    targets: &TargetSinrs,
) -> Result<(Vec<HermitianMatrix>, Vec<HermitianMatrix>)> {
    if s.len() != targets.n_users() {
        return Err(Error::DimensionMismatch {
            expected: targets.n_users(),
            got: s.len(),
        });
    }
    let all = s.iter().fold(we.clone(), |acc, sk| acc.add(sk));
    let mut xe = Vec::with_capacity(s.len());
    let mut xs = Vec::with_capacity(s.len());
    for (k, sk) in s.iter().enumerate() {
        // Σ_{i≠k} Sᵢ + Wₑ
        let others = all.sub(sk);
        xe.push(others.sub(&sk.scale(1.0 / targets.gamma_e()[k])));
        xs.push(sk.scale(1.0 / targets.gamma()[k]).sub(&others));
    }
    Ok((xe, xs))
}
