//! Global minimization of a Hermitian quadratic form over a ball,
//! `min ‖δ‖≤r (c₀+δ)ᴴQ(c₀+δ) + c`, through the eigendecomposition of `Q`
//! and a secular equation in the shift `ν`.

use crate::error::Result;
use crate::linalg::{evd, ComplexVector, HermitianMatrix, C64};

#[derive(Clone, Debug)]
pub struct TrsSolution {
    pub delta: ComplexVector,
    pub value: f64,
}

/// Objective at `center + delta`.
pub fn trs_objective(q: &HermitianMatrix, center: &ComplexVector, c: f64, delta: &ComplexVector) -> f64 {
    q.quad_form(&center.add(delta)) + c
}

pub fn solve_trs(q: &HermitianMatrix, center: &ComplexVector, c: f64, radius: f64) -> Result<TrsSolution> {
    let n = q.dim();
    if radius == 0.0 {
        let delta = ComplexVector::zeros(n);
        let value = trs_objective(q, center, c, &delta);
        return Ok(TrsSolution { delta, value });
    }
    let dec = evd(q)?;
    // ascending order from here on
    let lam: Vec<f64> = dec.eigenvalues().iter().rev().copied().collect();
    let vecs: Vec<&ComplexVector> = dec.eigenvectors().iter().rev().collect();
    // linear term of δ in the eigenbasis: g = Vᴴ Q c₀ = Λ Vᴴ c₀
    let g: Vec<C64> = vecs
        .iter()
        .zip(&lam)
        .map(|(v, &l)| v.dot(center) * l)
        .collect();
    let scale = lam.iter().fold(0.0f64, |a, l| a.max(l.abs())).max(f64::MIN_POSITIVE);
    // size of the linear term at full coupling, so rounding in Vᴴc₀ reads as zero
    let g_scale = (scale * center.norm()).max(f64::MIN_POSITIVE);

    let lmin = lam[0];
    let y_at = |nu: f64, skip: &dyn Fn(usize) -> bool| -> Vec<C64> {
        (0..n)
            .map(|i| if skip(i) { C64::new(0.0, 0.0) } else { -g[i] / (lam[i] + nu) })
            .collect()
    };
    let norm = |y: &[C64]| y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let assemble = |y: &[C64]| {
        let mut d = ComplexVector::zeros(n);
        for (v, &yi) in vecs.iter().zip(y) {
            d = d.axpy(yi, v);
        }
        d
    };
    let finish = |delta: ComplexVector| {
        let len = delta.norm();
        let delta = if len > radius { delta.scale(radius / len) } else { delta };
        let value = trs_objective(q, center, c, &delta);
        TrsSolution { delta, value }
    };

    // interior stationary point when Q is positive definite
    if lmin > 1e-12 * scale {
        let y = y_at(0.0, &|_| false);
        if norm(&y) <= radius {
            return Ok(finish(assemble(&y)));
        }
    }

    let nu_lo = (-lmin).max(0.0);
    // hard case: no linear term along the bottom eigenspace
    let bottom = |i: usize| lam[i] - lmin <= 1e-12 * scale;
    let bottom_weight: f64 = (0..n).filter(|&i| bottom(i)).map(|i| g[i].norm_sqr()).sum();
    if lmin <= 0.0 && bottom_weight.sqrt() <= 1e-12 * g_scale {
        let y = y_at(nu_lo, &bottom);
        let len = norm(&y);
        if len <= radius {
            let mut y = y;
            let i0 = (0..n).find(|&i| bottom(i)).expect("bottom eigenvalue");
            y[i0] = C64::new((radius * radius - len * len).max(0.0).sqrt(), 0.0);
            return Ok(finish(assemble(&y)));
        }
    }

    // boundary solution: ‖y(ν)‖ = r with ν > ν_lo, ‖y‖ decreasing in ν
    let g_norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut lo = nu_lo;
    let mut hi = nu_lo + g_norm / radius + scale;
    while norm(&y_at(hi, &|_| false)) > radius {
        hi = 2.0 * hi + 1.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let len = norm(&y_at(mid, &|_| false));
        if len > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = y_at(hi, &|_| false);
    if lmin <= 0.0 {
        // near-hard case: the pole at ν_lo is not resolved in floating point,
        // so top up along the bottom direction to reach the sphere
        let len = norm(&y);
        if len < radius {
            let mut y = y;
            let i0 = 0;
            let add = (radius * radius - len * len).max(0.0).sqrt();
            let phase = if y[i0].norm() > 0.0 { y[i0] / y[i0].norm() } else { C64::new(1.0, 0.0) };
            y[i0] += phase * add;
            return Ok(finish(assemble(&y)));
        }
    }
    Ok(finish(assemble(&y)))
}
