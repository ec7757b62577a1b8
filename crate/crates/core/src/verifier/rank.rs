//! Rank and sign structure of an optimal solution: positive multipliers,
//! non-degenerate shifted X matrices, rank-one covariances along the channel
//! estimates, and the K+1 rank ceiling.

use nalgebra::DMatrix;
use serde::Serialize;

use super::xmat::x_matrices_from;
use crate::beamformer::{BeamformingSolution, TargetSinrs};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{columns_to_matrix, eigenvalues, orthonormalize, ComplexVector, HermitianMatrix, C64};

/// Eigenvalues below `RANK_TOL · trace` count as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankCheck {
    pub name: &'static str,
    pub subject: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub info_ranks: Vec<usize>,
    pub an_rank: usize,
    pub checks: Vec<RankCheck>,
}

impl RankReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RankCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Multipliers attached to a covariance set; `None` where not defined.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    pub mu_s: Vec<Option<f64>>,
    pub mu_e: Vec<Option<f64>>,
}

impl Multipliers {
    pub fn from_solution(sol: &BeamformingSolution) -> Self {
        Self {
            mu_s: sol.multipliers_s().to_vec(),
            mu_e: sol.multipliers_e().to_vec(),
        }
    }
}

/// Rank of a PSD covariance, relative to its trace.
fn covariance_rank(m: &HermitianMatrix) -> Result<usize> {
    let tr = m.trace();
    if tr <= 0.0 {
        return Ok(0);
    }
    Ok(eigenvalues(m)?.iter().filter(|&&l| l > RANK_TOL * tr).count())
}

/// Rank of an indefinite matrix, relative to its largest eigenvalue magnitude.
fn general_rank(m: &HermitianMatrix) -> Result<usize> {
    let vals = eigenvalues(m)?;
    let top = vals.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    if top == 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|l| l.abs() > RANK_TOL * top).count())
}

/// `ĥᴴMĥ / tr M`: one for a rank-one covariance along `ĥ`.
fn alignment(m: &HermitianMatrix, h: &ComplexVector) -> f64 {
    let hn = h.normalized().expect("validated estimate");
    m.quad_form(&hn) / m.trace()
}

fn check(name: &'static str, subject: impl Into<String>, ok: bool, detail: String) -> RankCheck {
    RankCheck {
        name,
        subject: subject.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

pub fn check_rank_structure(
    channels: &ChannelSet,
    we: &HermitianMatrix,
    s: &[HermitianMatrix],
    multipliers: &Multipliers,
    targets: &TargetSinrs,
) -> Result<RankReport> {
    let k = channels.n_users();
    if s.len() != k || multipliers.mu_s.len() != k || multipliers.mu_e.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: s.len(),
        });
    }
    let mut checks = Vec::new();

    for (family, values) in [("mu_s", &multipliers.mu_s), ("mu_e", &multipliers.mu_e)] {
        for (i, m) in values.iter().enumerate() {
            let subject = format!("{family}[{i}]");
            checks.push(match m {
                Some(v) => check("positive_multiplier", subject, *v > 0.0, format!("{v}")),
                None => RankCheck {
                    name: "positive_multiplier",
                    subject,
                    status: CheckStatus::NotApplicable,
                    detail: "multiplier absent (zero error radius)".into(),
                },
            });
        }
    }

    let (xe, xs) = x_matrices_from(we, s, targets)?;
    for (family, xm, mus) in [("x_s", &xs, &multipliers.mu_s), ("x_e", &xe, &multipliers.mu_e)] {
        for i in 0..k {
            let subject = format!("{family}[{i}] + mu I");
            match mus[i] {
                Some(mu) => {
                    let r = general_rank(&xm[i].shifted(mu))?;
                    checks.push(check("shifted_x_nonzero", subject, r >= 1, format!("rank {r}")));
                }
                None => checks.push(RankCheck {
                    name: "shifted_x_nonzero",
                    subject,
                    status: CheckStatus::NotApplicable,
                    detail: "multiplier absent".into(),
                }),
            }
        }
    }

    let bound = k + 1;
    let an_rank = covariance_rank(we)?;
    checks.push(check("an_rank_at_most_one", "W_e", an_rank <= 1, format!("rank {an_rank}")));
    if an_rank > 0 {
        let a = alignment(we, channels.eve_estimate());
        checks.push(check(
            "an_along_eve_estimate",
            "W_e",
            a >= 1.0 - RANK_TOL,
            format!("alignment {a}"),
        ));
    }
    checks.push(check(
        "rank_ceiling",
        "W_e",
        an_rank <= bound,
        format!("rank {an_rank} vs K+1 = {bound}"),
    ));

    let mut info_ranks = Vec::with_capacity(k);
    for (i, si) in s.iter().enumerate() {
        let subject = format!("S[{i}] (user {i})");
        let r = covariance_rank(si)?;
        info_ranks.push(r);
        checks.push(check("info_rank_at_most_one", subject.clone(), r <= 1, format!("rank {r}")));
        if r > 0 {
            let a = alignment(si, &channels.estimates()[i]);
            checks.push(check(
                "info_along_estimate",
                subject.clone(),
                a >= 1.0 - RANK_TOL,
                format!("alignment {a}"),
            ));
        }
        checks.push(check("rank_ceiling", subject, r <= bound, format!("rank {r} vs K+1 = {bound}")));
    }

    Ok(RankReport {
        info_ranks,
        an_rank,
        checks,
    })
}

/// `check_rank_structure` on a solution's own covariances and multipliers.
pub fn check_solution_rank_structure(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    targets: &TargetSinrs,
) -> Result<RankReport> {
    let (we, s) = crate::beamformer::covariance_views(sol);
    check_rank_structure(channels, &we, &s, &Multipliers::from_solution(sol), targets)
}

/// Unitary `[ĥₑ, ĥ₁, …, ĥ_K, τ₁, …]` whose trailing columns complete the basis.
pub fn orthogonal_complement_basis(channels: &ChannelSet) -> Result<DMatrix<C64>> {
    let n = channels.n_antennas();
    let mut leading: Vec<ComplexVector> = vec![channels.eve_estimate().clone()];
    leading.extend(channels.estimates().iter().cloned());
    let q = orthonormalize(&leading, 1e-8);
    if q.len() < leading.len() {
        return Err(Error::RankDeficient(format!(
            "estimates span only {} of {} directions",
            q.len(),
            leading.len()
        )));
    }
    let mut all = q;
    all.extend((0..n).map(|i| ComplexVector::basis(n, i)));
    let full = orthonormalize(&all, 1e-8);
    Ok(columns_to_matrix(&full[..n]))
}
