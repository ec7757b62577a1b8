//! Optimality residuals of the decoupled power-allocation problem and an
//! independent numerical solver for it.
//!
//! Per user the problem is `min P` subject to
//! `φ(μ, P) = μP‖h̃‖²/(μγ + P) − σ² − με² ≥ 0` for some `μ > 0`.
//! Stationarity in the Lagrangian with multiplier `ξ` gives
//!
//! * in `μ`: `ξε² − ξP²‖h̃‖²/(μγ + P)² = 0`
//! * in `P`: `1 − ξμ²γ‖h̃‖²/(μγ + P)² = 0`
//!
//! with the constraint active and `ξ·φ = 0`. The Eve-side constraint at zero
//! AN power is `μₑPₑ‖h̃ₑ‖²/(μₑ + Pₑ) + σₑ² − μₑεₑ² = 0`.

use serde::Serialize;

use super::worst_case::golden_max;
use crate::beamformer::{BeamformingSolution, Method, TargetSinrs};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: &'static str,
    /// Signed sum of the terms.
    pub value: f64,
    pub absolute: f64,
    /// `|r| / max(1, largest term magnitude)`
    pub relative: f64,
}

fn residual(name: &'static str, terms: &[f64]) -> Residual {
    let r: f64 = terms.iter().sum();
    let scale = terms.iter().fold(1.0f64, |a, t| a.max(t.abs()));
    Residual {
        name,
        value: r,
        absolute: r.abs(),
        relative: r.abs() / scale,
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum UserKkt {
    Checked { residuals: Vec<Residual> },
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct KktReport {
    pub users: Vec<UserKkt>,
    /// Eve-side constraint residual per target, when `μₑ` exists.
    pub eve: Vec<Option<Residual>>,
    /// Conditions on the AN multipliers are not evaluated: the Lagrangian
    /// carries no multipliers for the sign constraints on the powers.
    pub unchecked: Vec<&'static str>,
}

impl KktReport {
    pub fn max_relative(&self) -> f64 {
        let users = self.users.iter().flat_map(|u| match u {
            UserKkt::Checked { residuals } => residuals.iter().map(|r| r.relative).collect(),
            UserKkt::NotApplicable { .. } => Vec::new(),
        });
        users
            .chain(self.eve.iter().flatten().map(|r| r.relative))
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, user: usize, name: &str) -> Option<&Residual> {
        match &self.users[user] {
            UserKkt::Checked { residuals } => residuals.iter().find(|r| r.name == name),
            UserKkt::NotApplicable { .. } => None,
        }
    }
}

/// Residuals of the power-allocation optimality system at the solution's
/// powers and multipliers.
pub fn kkt_residuals(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    targets: &TargetSinrs,
) -> Result<KktReport> {
    if sol.method() != Method::Robust {
        return Err(Error::invalid("method", "optimality residuals apply to the robust solution"));
    }
    let k = channels.n_users();
    if sol.n_users() != k || targets.n_users() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: sol.n_users(),
        });
    }
    let mut users = Vec::with_capacity(k);
    for i in 0..k {
        let (Some(mu), Some(xi)) = (sol.multipliers_s()[i], sol.dual_xi()[i]) else {
            users.push(UserKkt::NotApplicable {
                reason: "multiplier absent (zero error radius)".into(),
            });
            continue;
        };
        let h2 = channels.estimates()[i].norm_sqr();
        let h = h2.sqrt();
        let eps = channels.error_radii()[i];
        let s2 = channels.noise_vars()[i];
        let g = targets.gamma()[i];
        let p = sol.info_powers()[i];
        let d = mu * g + p;
        let binding = mu * p * h2 / d;
        let margin = h - eps;
        users.push(UserKkt::Checked {
            residuals: vec![
                residual("stationarity_mu", &[xi * eps * eps, -xi * p * p * h2 / (d * d)]),
                residual("stationarity_power", &[1.0, -xi * mu * mu * g * h2 / (d * d)]),
                residual("binding", &[binding, -s2, -mu * eps * eps]),
                residual("slackness", &[xi * binding, -xi * s2, -xi * mu * eps * eps]),
                residual("mu_closed_form", &[mu, -p * margin / (g * eps)]),
                residual("xi_closed_form", &[xi, -g / (margin * margin)]),
            ],
        });
    }
    let he2 = channels.eve_estimate().norm_sqr();
    let s2e = channels.eve_noise_var();
    let eps_e = channels.eve_error_radius();
    let pe = sol.an_power();
    let eve = sol
        .multipliers_e()
        .iter()
        .map(|m| {
            m.map(|mu| {
                let first = if pe > 0.0 { mu * pe * he2 / (mu + pe) } else { 0.0 };
                residual("eve_constraint", &[first, s2e, -mu * eps_e * eps_e])
            })
        })
        .collect();
    Ok(KktReport {
        users,
        eve,
        unchecked: vec!["stationarity_in_an_power", "stationarity_in_mu_e"],
    })
}

/// `φ(μ) = μP‖h̃‖²/(μγ + P) − σ² − με²`, concave in `μ`.
fn phi(mu: f64, p: f64, h2: f64, gamma: f64, sigma2: f64, eps2: f64) -> f64 {
    mu * p * h2 / (mu * gamma + p) - sigma2 - mu * eps2
}

fn best_phi(p: f64, h2: f64, gamma: f64, sigma2: f64, eps2: f64) -> f64 {
    let f = |m: f64| phi(m, p, h2, gamma, sigma2, eps2);
    let mut hi = p / gamma;
    while f(2.0 * hi) >= f(hi) && hi < 1e300 {
        hi *= 2.0;
    }
    let mu = golden_max(f, 0.0, 2.0 * hi, 300);
    f(mu)
}

/// Smallest power for which some `μ > 0` satisfies the per-user constraint,
/// by bisection on `P` around a concave maximization in `μ`.
pub fn p2_power_oracle(norm_h: f64, gamma: f64, sigma2: f64, eps: f64) -> Result<f64> {
    for (name, v) in [("norm_h", norm_h), ("gamma", gamma), ("sigma2", sigma2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("{v} must be positive")));
        }
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid("eps", "must be non-negative"));
    }
    if eps >= norm_h {
        return Err(Error::InfeasibleGeometry {
            who: "oracle".into(),
            radius: eps,
            norm: norm_h,
        });
    }
    let h2 = norm_h * norm_h;
    let eps2 = eps * eps;
    let feasible = |p: f64| best_phi(p, h2, gamma, sigma2, eps2) >= 0.0;
    let mut lo = gamma * sigma2 / h2;
    let mut hi = 2.0 * lo;
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
