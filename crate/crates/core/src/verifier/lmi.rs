//! S-procedure certificates for the robust constraints.
//!
//! Each constraint `(h̃+δ)ᴴX(h̃+δ) + c ≥ 0 ∀‖δ‖ ≤ ε` holds iff some `μ ≥ 0`
//! makes
//!
//! ```text
//! M(μ) = [ X + μI     X h̃              ]
//!        [ h̃ᴴX       h̃ᴴX h̃ + c − μ ε² ]
//! ```
//!
//! positive semidefinite, with `c = σₑ²` for Eve constraints and `c = −σₖ²`
//! for user constraints. `λ_min(M(μ))` is concave in `μ`, so the best
//! multiplier is found by golden-section search, checked against a log grid.
//!
//! `X` has range inside the span `V` of the active beams, which also contains
//! `X h̃`. In a basis adapted to `V ⊕ V⊥`, `M(μ)` splits into `μ·I` on `V⊥`
//! and a small block on `V ⊕ span{e_{N+1}}`; diagonalizing the compressed `X`
//! turns the small block into an arrowhead matrix whose smallest eigenvalue
//! is the root of a scalar secular equation.

use serde::Serialize;

use super::worst_case::{golden_max, worst_case_eve_sinr, worst_case_user_sinr, OracleMethod};
use super::xmat::build_x_matrices;
use crate::beamformer::{BeamformingSolution, TargetSinrs};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{
    columns_to_matrix, evd, generalized_schur, is_psd, orthonormalize, ComplexVector, HermitianMatrix,
    DEFAULT_RANK_TOL,
};

/// Relative slack on block margins and on oracle verdicts.
pub const VERDICT_TOL: f64 = 1e-9;
const GOLDEN_ITERATIONS: usize = 200;
const GRID_POINTS: usize = 1000;
/// Full blocks up to this dimension are checked directly; larger ones in reduced form.
const DIRECT_PSD_MAX_DIM: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    EveConstraint,
    UserConstraint,
}

/// The full `(N+1)`-dimensional certificate matrix at a given multiplier.
#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub matrix: HermitianMatrix,
    pub kind: ConstraintKind,
    pub user_index: usize,
    pub mu: f64,
}

impl LmiBlock {
    pub fn new(
        x: &HermitianMatrix,
        estimate: &ComplexVector,
        radius: f64,
        noise_var: f64,
        kind: ConstraintKind,
        user_index: usize,
        mu: f64,
    ) -> Self {
        let c = offset(kind, noise_var);
        let xh = x.mul_vec(estimate);
        let corner = estimate.dot(&xh).re + c - mu * radius * radius;
        Self {
            matrix: HermitianMatrix::bordered(&x.shifted(mu), &xh, corner),
            kind,
            user_index,
            mu,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn offset(kind: ConstraintKind, noise_var: f64) -> f64 {
    match kind {
        ConstraintKind::EveConstraint => noise_var,
        ConstraintKind::UserConstraint => -noise_var,
    }
}

/// `M(μ)` restricted to `V ⊕ span{e_{N+1}}`, diagonalized on `V`.
#[derive(Clone, Debug)]
pub(crate) struct ReducedLmi {
    x_reduced: HermitianMatrix,
    b_reduced: ComplexVector,
    eigs: Vec<f64>,
    z2: Vec<f64>,
    alpha0: f64,
    eps2: f64,
    has_complement: bool,
    scale: f64,
}

impl ReducedLmi {
    pub(crate) fn new(
        x: &HermitianMatrix,
        estimate: &ComplexVector,
        span: &[ComplexVector],
        radius: f64,
        c: f64,
    ) -> Result<Self> {
        let mut vectors = span.to_vec();
        vectors.push(estimate.clone());
        let basis_vecs = orthonormalize(&vectors, 1e-12);
        let basis = columns_to_matrix(&basis_vecs);
        let x_reduced = x.compress(&basis);
        let xh = x.mul_vec(estimate);
        let b_reduced = ComplexVector::from_inner(basis.adjoint() * xh.inner());
        let dec = evd(&x_reduced)?;
        let z2 = dec
            .eigenvectors()
            .iter()
            .map(|v| v.dot(&b_reduced).norm_sqr())
            .collect();
        let alpha0 = estimate.dot(&xh).re + c;
        let rho = dec.eigenvalues().iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let reach = estimate.norm() + radius;
        Ok(Self {
            has_complement: basis_vecs.len() < x.dim(),
            eigs: dec.eigenvalues().to_vec(),
            z2,
            alpha0,
            eps2: radius * radius,
            scale: c.abs().max(rho * reach * reach),
            x_reduced,
            b_reduced,
        })
    }

    /// `λ_min(M(μ))`.
    pub(crate) fn min_eig(&self, mu: f64) -> f64 {
        let alpha = self.alpha0 - mu * self.eps2;
        let d: Vec<f64> = self.eigs.iter().map(|l| l + mu).collect();
        let tiny = (1e-15 * self.scale.max(1.0)).powi(2);
        let mut deflated = f64::INFINITY;
        let mut active: Vec<(f64, f64)> = Vec::with_capacity(d.len());
        for (&di, &zi) in d.iter().zip(&self.z2) {
            if zi <= tiny {
                deflated = deflated.min(di);
            } else {
                active.push((di, zi));
            }
        }
        let arrow = if active.is_empty() {
            alpha
        } else {
            secular_min_root(alpha, &active)
        };
        let mut m = arrow.min(deflated);
        if self.has_complement {
            m = m.min(mu);
        }
        m
    }

    /// Verdict slack in eigenvalue units. The block's smallest eigenvalue is at
    /// most the worst-case constraint value divided by `1 + ε²`.
    pub(crate) fn tolerance(&self) -> f64 {
        VERDICT_TOL * self.scale / (1.0 + self.eps2)
    }

    pub(crate) fn reduced_block(&self, mu: f64) -> HermitianMatrix {
        HermitianMatrix::bordered(
            &self.x_reduced.shifted(mu),
            &self.b_reduced,
            self.alpha0 - mu * self.eps2,
        )
    }
}

/// Smallest root of `α − λ − Σ zᵢ/(dᵢ − λ) = 0`, which lies below `min dᵢ`.
fn secular_min_root(alpha: f64, active: &[(f64, f64)]) -> f64 {
    let f = |lam: f64| alpha - lam - active.iter().map(|&(d, z)| z / (d - lam)).sum::<f64>();
    let dmin = active.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let zsum: f64 = active.iter().map(|p| p.1.sqrt()).sum();
    let mut lo = alpha.min(dmin) - zsum - 1.0;
    while f(lo) <= 0.0 {
        lo -= 2.0 * (lo.abs() + 1.0);
    }
    let mut hi = dmin;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// How multipliers are chosen for the report.
#[derive(Clone, Debug, PartialEq)]
pub enum MuSearch {
    /// Evaluate each block at the given multipliers (one per user, per family).
    Fixed { users: Vec<f64>, eve: Vec<f64> },
    /// Search `μ ≥ 0` for the largest margin.
    Maximize,
}

impl MuSearch {
    /// The closed-form multipliers carried by a solution, zero where absent.
    pub fn from_solution(sol: &BeamformingSolution) -> Self {
        let pick = |v: &[Option<f64>]| v.iter().map(|m| m.unwrap_or(0.0)).collect();
        MuSearch::Fixed {
            users: pick(sol.multipliers_s()),
            eve: pick(sol.multipliers_e()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub kind: ConstraintKind,
    pub user_index: usize,
    /// Largest (or evaluated) `λ_min` of the certificate block.
    pub lmi_margin: f64,
    /// Multiplier attaining the margin; absent for a zero error radius.
    pub mu: Option<f64>,
    pub lmi_feasible: bool,
    /// Same verdict through the full or reduced block eigenvalues.
    pub direct_psd_feasible: bool,
    /// Same verdict through the generalized Schur complement conditions.
    pub schur_feasible: bool,
    pub worst_case_sinr: f64,
    /// `γₖ` for user constraints, `γ_{e,k}` for Eve constraints.
    pub sinr_bound: f64,
    pub witness: ComplexVector,
    pub oracle: OracleMethod,
    pub oracle_feasible: bool,
    /// `(μ, λ_min)` samples attached when no multiplier certifies the constraint.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mu_grid: Vec<(f64, f64)>,
}

impl ConstraintReport {
    pub fn satisfied(&self) -> bool {
        self.lmi_feasible
    }

    pub fn verdicts_agree(&self) -> bool {
        self.lmi_feasible == self.oracle_feasible
            && self.lmi_feasible == self.direct_psd_feasible
            && self.lmi_feasible == self.schur_feasible
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub user_constraints: Vec<ConstraintReport>,
    pub eve_constraints: Vec<ConstraintReport>,
}

impl FeasibilityReport {
    pub fn all_satisfied(&self) -> bool {
        self.constraints().all(ConstraintReport::satisfied)
    }

    pub fn all_agree(&self) -> bool {
        self.constraints().all(ConstraintReport::verdicts_agree)
    }

    pub fn constraints(&self) -> impl Iterator<Item = &ConstraintReport> {
        self.user_constraints.iter().chain(&self.eve_constraints)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Directions of all beams carrying power.
fn active_directions(sol: &BeamformingSolution) -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = (0..sol.n_users())
        .filter(|&i| sol.info_powers()[i] > 0.0)
        .map(|i| sol.info_directions()[i].clone())
        .collect();
    if let (Some(u), true) = (sol.an_direction(), sol.an_power() > 0.0) {
        out.push(u.clone());
    }
    out
}

struct MuResult {
    margin: f64,
    mu: Option<f64>,
    grid: Vec<(f64, f64)>,
}

fn log_grid(hi: f64) -> Vec<f64> {
    let lo = hi * 1e-12;
    let mut g = vec![0.0];
    g.extend((0..GRID_POINTS).map(|i| lo * (hi / lo).powf(i as f64 / (GRID_POINTS - 1) as f64)));
    g
}

fn maximize_margin(lmi: &ReducedLmi, noise_var: f64, radius: f64, total_power: f64) -> MuResult {
    let mu_hi = (noise_var / (radius * radius)).max(total_power) * 1e3;
    let golden = golden_max(|m| lmi.min_eig(m), 0.0, mu_hi, GOLDEN_ITERATIONS);
    let grid = log_grid(mu_hi);
    let mut best = (golden, lmi.min_eig(golden));
    let mut samples = Vec::with_capacity(grid.len());
    for &m in &grid {
        let v = lmi.min_eig(m);
        samples.push((m, v));
        if v > best.1 {
            best = (m, v);
        }
    }
    // refine around a grid winner in case the golden bracket drifted
    if best.0 != golden {
        let i = grid.iter().position(|&m| m == best.0).expect("grid point");
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let m = golden_max(|m| lmi.min_eig(m), lo, hi, GOLDEN_ITERATIONS);
        let v = lmi.min_eig(m);
        if v > best.1 {
            best = (m, v);
        }
    }
    let stride = (samples.len() / 25).max(1);
    MuResult {
        margin: best.1,
        mu: Some(best.0),
        grid: samples.into_iter().step_by(stride).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn check_constraint(
    x: &HermitianMatrix,
    estimate: &ComplexVector,
    radius: f64,
    noise_var: f64,
    kind: ConstraintKind,
    k: usize,
    span: &[ComplexVector],
    fixed_mu: Option<f64>,
    total_power: f64,
) -> Result<(f64, Option<f64>, bool, bool, bool, Vec<(f64, f64)>)> {
    let c = offset(kind, noise_var);
    let lmi = ReducedLmi::new(x, estimate, span, radius, c)?;
    let tol = lmi.tolerance();

    if radius == 0.0 {
        // no uncertainty: the constraint is the nominal one
        let margin = lmi.alpha0;
        let ok = margin >= -VERDICT_TOL * lmi.scale;
        return Ok((margin, None, ok, ok, ok, Vec::new()));
    }

    let found = match fixed_mu {
        Some(mu) => MuResult {
            margin: lmi.min_eig(mu),
            mu: Some(mu),
            grid: Vec::new(),
        },
        None => maximize_margin(&lmi, noise_var, radius, total_power),
    };
    let mu = found.mu.expect("positive radius");
    let feasible = found.margin >= -tol;

    let direct = if x.dim() + 1 <= DIRECT_PSD_MAX_DIM {
        let block = LmiBlock::new(x, estimate, radius, noise_var, kind, k, mu);
        is_psd(&block.matrix, tol)?.feasible
    } else {
        is_psd(&lmi.reduced_block(mu), tol)?.feasible && (!lmi.has_complement || mu >= -tol)
    };

    let schur = if x.dim() + 1 <= DIRECT_PSD_MAX_DIM {
        let a = x.shifted(mu);
        let b = x.mul_vec(estimate);
        let corner = estimate.dot(&b).re + c - mu * radius * radius;
        is_psd(&a, tol)?.feasible && generalized_schur(&a, &b, corner, DEFAULT_RANK_TOL)?.feasible()
    } else {
        let a = lmi.x_reduced.shifted(mu);
        let corner = lmi.alpha0 - mu * lmi.eps2;
        is_psd(&a, tol)?.feasible
            && generalized_schur(&a, &lmi.b_reduced, corner, DEFAULT_RANK_TOL)?.feasible()
            && (!lmi.has_complement || mu >= -tol)
    };
    let grid = if feasible { Vec::new() } else { found.grid };
    Ok((found.margin, Some(mu), feasible, direct, schur, grid))
}

/// Certificate search and worst-case oracles for every constraint of `sol`.
pub fn check_lmi_feasibility(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    targets: &TargetSinrs,
    mu_search: &MuSearch,
) -> Result<FeasibilityReport> {
    let k = channels.n_users();
    if sol.n_users() != k || targets.n_users() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: sol.n_users().min(targets.n_users()),
        });
    }
    if let MuSearch::Fixed { users, eve } = mu_search {
        if users.len() != k || eve.len() != k {
            return Err(Error::invalid("mu", format!("expected {k} multipliers per family")));
        }
        if users.iter().chain(eve).any(|m| !(*m >= 0.0)) {
            return Err(Error::invalid("mu", "multipliers must be non-negative"));
        }
    }
    let (xe, xs) = build_x_matrices(sol, targets)?;
    let span = active_directions(sol);
    let total = sol.total_power();

    let mut user_constraints = Vec::with_capacity(k);
    let mut eve_constraints = Vec::with_capacity(k);
    for i in 0..k {
        let fixed = match mu_search {
            MuSearch::Fixed { users, .. } => Some(users[i]),
            MuSearch::Maximize => None,
        };
        let (margin, mu, lmi_ok, direct, schur, grid) = check_constraint(
            &xs[i],
            &channels.estimates()[i],
            channels.error_radii()[i],
            channels.noise_vars()[i],
            ConstraintKind::UserConstraint,
            i,
            &span,
            fixed,
            total,
        )?;
        let wc = worst_case_user_sinr(channels, sol, i)?;
        let bound = targets.gamma()[i];
        user_constraints.push(ConstraintReport {
            kind: ConstraintKind::UserConstraint,
            user_index: i,
            lmi_margin: margin,
            mu,
            lmi_feasible: lmi_ok,
            direct_psd_feasible: direct,
            schur_feasible: schur,
            worst_case_sinr: wc.sinr,
            sinr_bound: bound,
            oracle_feasible: wc.sinr >= bound * (1.0 - VERDICT_TOL),
            witness: wc.witness,
            oracle: wc.method,
            mu_grid: grid,
        });

        let fixed = match mu_search {
            MuSearch::Fixed { eve, .. } => Some(eve[i]),
            MuSearch::Maximize => None,
        };
        let (margin, mu, lmi_ok, direct, schur, grid) = check_constraint(
            &xe[i],
            channels.eve_estimate(),
            channels.eve_error_radius(),
            channels.eve_noise_var(),
            ConstraintKind::EveConstraint,
            i,
            &span,
            fixed,
            total,
        )?;
        let wc = worst_case_eve_sinr(channels, sol, i)?;
        let bound = targets.gamma_e()[i];
        eve_constraints.push(ConstraintReport {
            kind: ConstraintKind::EveConstraint,
            user_index: i,
            lmi_margin: margin,
            mu,
            lmi_feasible: lmi_ok,
            direct_psd_feasible: direct,
            schur_feasible: schur,
            worst_case_sinr: wc.sinr,
            sinr_bound: bound,
            oracle_feasible: wc.sinr <= bound * (1.0 + VERDICT_TOL),
            witness: wc.witness,
            oracle: wc.method,
            mu_grid: grid,
        });
    }
    Ok(FeasibilityReport {
        user_constraints,
        eve_constraints,
    })
}
