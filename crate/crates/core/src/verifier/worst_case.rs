//! Exact worst-case SINRs over the error balls.
//!
//! When every beam points along a channel estimate (or along Eve's estimate
//! for AN) the SINR depends on the error only through its projections on
//! those orthonormal directions, and the optimum reduces to a split of the
//! error budget between the desired beam and one other direction. Any other
//! beam layout goes through Dinkelbach iterations over exact ball-constrained
//! quadratic minimizations.

use serde::Serialize;

use super::trs::solve_trs;
use super::lmi::VERDICT_TOL;
use crate::beamformer::{covariance_views, BeamformingSolution, TargetSinrs};
use crate::channel::{ChannelSet, Receiver};
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, HermitianMatrix, C64};
use crate::metrics::sinr_quotient;

/// Inner products below this count as orthogonal when detecting aligned beams.
const ALIGN_TOL: f64 = 1e-10;
const DINKELBACH_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Budget split along aligned beams; closed-form stationary point.
    Aligned,
    /// Dinkelbach iterations over ball-constrained quadratic minimizations.
    Dinkelbach,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    /// SINR at `estimate + witness`.
    pub sinr: f64,
    pub witness: ComplexVector,
    pub method: OracleMethod,
}

fn orthonormal(vs: &[&ComplexVector]) -> bool {
    for (i, a) in vs.iter().enumerate() {
        if (a.norm() - 1.0).abs() > ALIGN_TOL {
            return false;
        }
        for b in &vs[i + 1..] {
            if a.dot(b).norm() > ALIGN_TOL {
                return false;
            }
        }
    }
    true
}

/// Active beams other than user `k`'s info beam: (direction, power).
fn other_beams(sol: &BeamformingSolution, k: usize) -> Vec<(&ComplexVector, f64)> {
    let mut out: Vec<(&ComplexVector, f64)> = (0..sol.n_users())
        .filter(|&i| i != k && sol.info_powers()[i] > 0.0)
        .map(|i| (&sol.info_directions()[i], sol.info_powers()[i]))
        .collect();
    if let Some(u) = sol.an_direction() {
        if sol.an_power() > 0.0 {
            out.push((u, sol.an_power()));
        }
    }
    out
}

fn clamp_to_ball(delta: ComplexVector, radius: f64) -> ComplexVector {
    let n = delta.norm();
    if n > radius {
        delta.scale(radius / n)
    } else {
        delta
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        if b - a <= f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Minimum SINR of user `k` over its error ball.
pub fn worst_case_user_sinr(channels: &ChannelSet, sol: &BeamformingSolution, k: usize) -> Result<WorstCase> {
    user_worst_case(channels, sol, k, true)
}

fn user_worst_case(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    k: usize,
    allow_aligned: bool,
) -> Result<WorstCase> {
    check(channels, sol, k)?;
    let h = &channels.estimates()[k];
    let eps = channels.error_radii()[k];
    let sigma2 = channels.noise_vars()[k];
    let hk = h.normalized().expect("validated estimate");
    let uk = &sol.info_directions()[k];
    let others = other_beams(sol, k);

    let mut dirs: Vec<&ComplexVector> = vec![&hk];
    dirs.extend(others.iter().map(|(u, _)| *u));
    let aligned = allow_aligned && (uk.dot(&hk).norm() - 1.0).abs() <= ALIGN_TOL && orthonormal(&dirs);

    let witness = if eps == 0.0 {
        ComplexVector::zeros(h.dim())
    } else if aligned {
        let big_h = h.norm();
        let pk = sol.info_powers()[k];
        let strongest = others
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let t = match strongest {
            // f'(t) ∝ (H − t)(P_max·t·H − P_max·ε² − σ²)
            Some((_, pmax)) => ((pmax * eps * eps + sigma2) / (pmax * big_h)).min(eps),
            None => eps,
        };
        let f = |t: f64| {
            let pmax = strongest.map_or(0.0, |s| s.1);
            pk * (big_h - t).powi(2) / (pmax * (eps * eps - t * t) + sigma2)
        };
        let t = [0.0, eps, t]
            .into_iter()
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .expect("candidates");
        let mut delta = hk.scale(-t);
        if let Some((u, _)) = strongest {
            delta = delta.axpy(C64::new((eps * eps - t * t).max(0.0).sqrt(), 0.0), u);
        }
        delta
    } else {
        let (we, s) = covariance_views(sol);
        let interference = s
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .fold(we, |acc, (_, m)| acc.add(m));
        dinkelbach(&s[k], &interference, h, sigma2, eps, false)?
    };
    let witness = clamp_to_ball(witness, eps);
    let sinr = sinr_quotient(&h.add(&witness), sol, k, sigma2);
    Ok(WorstCase {
        sinr,
        witness,
        method: if aligned { OracleMethod::Aligned } else { OracleMethod::Dinkelbach },
    })
}

/// Maximum SINR Eve achieves on user `k`'s stream over her error ball.
pub fn worst_case_eve_sinr(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    target_user: usize,
) -> Result<WorstCase> {
    eve_worst_case(channels, sol, target_user, true)
}

fn eve_worst_case(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    k: usize,
    allow_aligned: bool,
) -> Result<WorstCase> {
    check(channels, sol, k)?;
    let h = channels.eve_estimate();
    let eps = channels.eve_error_radius();
    let sigma2 = channels.eve_noise_var();
    let he = h.normalized().expect("validated estimate");
    let uk = &sol.info_directions()[k];

    let mut dirs: Vec<&ComplexVector> = vec![&he];
    for i in 0..sol.n_users() {
        if i == k || sol.info_powers()[i] > 0.0 {
            dirs.push(&sol.info_directions()[i]);
        }
    }
    let an = sol.an_direction().filter(|_| sol.an_power() > 0.0);
    let aligned = allow_aligned
        && orthonormal(&dirs)
        && an.is_none_or(|u| (u.dot(&he).norm() - 1.0).abs() <= ALIGN_TOL);

    let witness = if eps == 0.0 {
        ComplexVector::zeros(h.dim())
    } else if aligned {
        let big_e = h.norm();
        let pk = sol.info_powers()[k];
        let pe = if an.is_some() { sol.an_power() } else { 0.0 };
        let g = |t: f64| pk * (eps * eps - t * t) / (pe * (big_e - t).powi(2) + sigma2);
        let t = if pe == 0.0 {
            0.0
        } else {
            best_on_interval(g, 0.0, eps.min(big_e))
        };
        let mut delta = uk.scale((eps * eps - t * t).max(0.0).sqrt());
        if let Some(u) = an {
            // reduce the AN the way it reaches Eve's estimate
            let phase = u.dot(&he) / u.dot(&he).norm();
            delta = delta.axpy(-phase * t, u);
        }
        delta
    } else {
        let (we, s) = covariance_views(sol);
        let interference = s
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .fold(we, |acc, (_, m)| acc.add(m));
        dinkelbach(&s[k], &interference, h, sigma2, eps, true)?
    };
    let witness = clamp_to_ball(witness, eps);
    let sinr = sinr_quotient(&h.add(&witness), sol, k, sigma2);
    Ok(WorstCase {
        sinr,
        witness,
        method: if aligned { OracleMethod::Aligned } else { OracleMethod::Dinkelbach },
    })
}

/// True when every user meets `γₖ` and Eve stays within `γₑₖ` on every
/// stream, at the exact worst case over the error balls.
pub fn worst_case_feasible(channels: &ChannelSet, sol: &BeamformingSolution, targets: &TargetSinrs) -> Result<bool> {
    if targets.n_users() != channels.n_users() {
        return Err(Error::DimensionMismatch {
            expected: channels.n_users(),
            got: targets.n_users(),
        });
    }
    for k in 0..channels.n_users() {
        let user = worst_case_user_sinr(channels, sol, k)?;
        if user.sinr < targets.gamma()[k] * (1.0 - VERDICT_TOL) {
            return Ok(false);
        }
        let eve = worst_case_eve_sinr(channels, sol, k)?;
        if eve.sinr > targets.gamma_e()[k] * (1.0 + VERDICT_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Global maximizer of a smooth `g` on `[a, b]`: dense grid, then golden refinement
/// inside the bracket around the best node.
fn best_on_interval(g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: usize = 4096;
    let step = (b - a) / NODES as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=NODES {
        let v = g(a + i as f64 * step);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = a + best.saturating_sub(1) as f64 * step;
    let hi = (a + (best + 1) as f64 * step).min(b);
    let t = golden_max(&g, lo, hi, 200);
    [t, a + best as f64 * step, a, b]
        .into_iter()
        .max_by(|x, y| g(*x).total_cmp(&g(*y)))
        .expect("candidates")
}

fn check(channels: &ChannelSet, sol: &BeamformingSolution, k: usize) -> Result<()> {
    channels.check_receiver(Receiver::User(k))?;
    if sol.n_users() != channels.n_users() {
        return Err(Error::DimensionMismatch {
            expected: channels.n_users(),
            got: sol.n_users(),
        });
    }
    if sol.n_antennas() != channels.n_antennas() {
        return Err(Error::DimensionMismatch {
            expected: channels.n_antennas(),
            got: sol.n_antennas(),
        });
    }
    Ok(())
}

/// Extremum of `hᴴSh / (hᴴBh + σ²)` over `‖h − center‖ ≤ radius`
/// (minimum, or maximum when `maximize`). Returns the optimal offset.
fn dinkelbach(
    s: &HermitianMatrix,
    b: &HermitianMatrix,
    center: &ComplexVector,
    sigma2: f64,
    radius: f64,
    maximize: bool,
) -> Result<ComplexVector> {
    let ratio = |d: &ComplexVector| {
        let h = center.add(d);
        s.quad_form(&h) / (b.quad_form(&h) + sigma2)
    };
    let mut delta = ComplexVector::zeros(center.dim());
    let mut lambda = ratio(&delta);
    for _ in 0..DINKELBACH_MAX_ITER {
        // min  hᴴ(S − λB)h − λσ²   or   min  hᴴ(λB − S)h + λσ²
        let (q, c) = if maximize {
            (b.scale(lambda).sub(s), lambda * sigma2)
        } else {
            (s.sub(&b.scale(lambda)), -lambda * sigma2)
        };
        let trs = solve_trs(&q, center, c, radius)?;
        let h = center.add(&trs.delta);
        let mag = s.quad_form(&h).abs() + lambda * (b.quad_form(&h) + sigma2);
        if trs.value >= -1e-14 * mag {
            break;
        }
        let next = ratio(&trs.delta);
        let improved = if maximize { next > lambda } else { next < lambda };
        if !improved {
            break;
        }
        lambda = next;
        delta = trs.delta;
    }
    Ok(delta)
}
