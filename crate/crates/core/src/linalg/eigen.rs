//! Hermitian eigendecomposition.
//!
//! Householder reduction to a real symmetric tridiagonal matrix followed by
//! implicit-shift QL iterations. Eigenvectors are accumulated in the complex
//! unitary produced by the reduction.

use nalgebra::DMatrix;

use super::{ComplexVector, HermitianMatrix, C64};
use crate::error::{Error, Result};

/// QL iterations allowed per eigenvalue before giving up.
pub const QL_MAX_ITERATIONS: usize = 60;

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<ComplexVector>,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[ComplexVector] {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Columns of `U`.
    pub fn unitary(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.eigenvectors[j].get(i))
    }

    /// `U Λ Uᴴ`
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|lambda| Some(lambda))
    }

    /// `U f(Λ) Uᴴ`, skipping eigenpairs where `f` returns `None`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Option<f64>) -> HermitianMatrix {
        let n = self.dim();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (lambda, u) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            if let Some(weight) = f(*lambda) {
                let col = u.inner();
                m += col * col.adjoint() * C64::new(weight, 0.0);
            }
        }
        HermitianMatrix::from_assembled(m)
    }

    /// Number of eigenvalues with `|λ| ≥ rank_tol · max(max|λ|, 1)`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let cutoff = rank_cutoff(&self.eigenvalues, rank_tol);
        self.eigenvalues.iter().filter(|l| l.abs() >= cutoff).count()
    }
}

pub(crate) fn rank_cutoff(eigenvalues: &[f64], rank_tol: f64) -> f64 {
    let scale = eigenvalues.iter().fold(1.0f64, |acc, l| acc.max(l.abs()));
    rank_tol * scale
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn evd(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let (mut d, mut e, mut z) = tridiagonalize(m.as_matrix(), true);
    tql(&mut d, &mut e, z.as_mut())?;
    let z = z.expect("eigenvectors requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| ComplexVector::from_inner(z.column(j).into_owned()))
        .collect();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    let (mut d, mut e, _) = tridiagonalize(m.as_matrix(), false);
    tql(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Reduces `a` to real tridiagonal form `T = Qᴴ a Q`. Returns the diagonal,
/// the sub-diagonal (with a trailing zero) and optionally `Q`.
fn tridiagonalize(a: &DMatrix<C64>, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<DMatrix<C64>>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut q = want_q.then(|| DMatrix::<C64>::identity(n, n));
    let zero = C64::new(0.0, 0.0);

    for k in 0..n.saturating_sub(2) {
        let tail: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = a[(k + 1, k)];
        let xnorm = (alpha.norm_sqr() + tail).sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let m = n - k - 1;
        let mut w: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        w[0] += phase * xnorm;
        let vnorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = std::f64::consts::SQRT_2 / vnorm;
        for wi in w.iter_mut() {
            *wi *= s;
        }

        let beta = -phase * xnorm;
        a[(k + 1, k)] = beta;
        a[(k, k + 1)] = beta.conj();
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        // trailing block: B <- (I - w wᴴ) B (I - w wᴴ)
        let mut p = vec![zero; m];
        for (c, wc) in w.iter().enumerate() {
            let col = k + 1 + c;
            for (r, pr) in p.iter_mut().enumerate() {
                *pr += a[(k + 1 + r, col)] * wc;
            }
        }
        let cw: f64 = w
            .iter()
            .zip(&p)
            .map(|(wi, pi)| (wi.conj() * pi).re)
            .sum();
        let qv: Vec<C64> = p
            .iter()
            .zip(&w)
            .map(|(pi, wi)| pi - wi * (0.5 * cw))
            .collect();
        for c in 0..m {
            for r in 0..m {
                a[(k + 1 + r, k + 1 + c)] -= w[r] * qv[c].conj() + qv[r] * w[c].conj();
            }
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let mut y = zero;
                for (c, wc) in w.iter().enumerate() {
                    y += q[(r, k + 1 + c)] * wc;
                }
                for (c, wc) in w.iter().enumerate() {
                    q[(r, k + 1 + c)] -= y * wc.conj();
                }
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut running = C64::new(1.0, 0.0);
    let mut phases = vec![running; n];
    for i in 0..n.saturating_sub(1) {
        let sub = a[(i + 1, i)];
        let mag = sub.norm();
        e[i] = mag;
        if mag > 0.0 {
            running *= sub / mag;
        }
        phases[i + 1] = running;
    }
    if let Some(q) = q.as_mut() {
        for (j, ph) in phases.iter().enumerate() {
            for r in 0..n {
                q[(r, j)] *= ph;
            }
        }
    }
    (d, e, q)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix. `e[i]` couples
/// `d[i]` and `d[i+1]`; `e[n-1]` is ignored.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<C64>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // couplings below ε‖T‖ are dropped (absolute test, as in tql2); the
    // relative test alone stalls on blocks of near-zero eigenvalues
    let floor = f64::EPSILON
        * d.iter().zip(e.iter()).fold(0.0f64, |a, (x, y)| a.max(x.abs() + y.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == QL_MAX_ITERATIONS {
                return Err(Error::EigenNonConvergence {
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            iter += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.nrows() {
                        let zf = z[(k, i + 1)];
                        let zi = z[(k, i)];
                        z[(k, i + 1)] = zi * s + zf * c;
                        z[(k, i)] = zi * c - zf * s;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            for i in 0..j {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    fn check_decomposition(m: &HermitianMatrix) {
        let dec = evd(m).unwrap();
        let rel = m.sub(&dec.reconstruct()).frobenius_norm() / m.frobenius_norm().max(1e-300);
        assert!(rel < 1e-10, "reconstruction error {rel}");
        let u = dec.unitary();
        let gram = u.adjoint() * &u;
        let n = m.dim();
        let dev = (gram - DMatrix::<C64>::identity(n, n)).norm();
        assert!(dev < 1e-10, "gram deviation {dev}");
        assert!(dec.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity_eigenvalues() {
        let dec = evd(&HermitianMatrix::identity(4)).unwrap();
        for l in dec.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-15);
        }
        check_decomposition(&HermitianMatrix::identity(4));
    }

    #[test]
    fn rank_one_outer_product() {
        let n = 128;
        let h = ComplexVector::from_fn(n, |i| C64::from_polar(1.0, 0.37 * i as f64));
        assert!((h.norm_sqr() - 128.0).abs() < 1e-10);
        let m = HermitianMatrix::outer(&h);
        let dec = evd(&m).unwrap();
        assert!((dec.max_eigenvalue() - 128.0).abs() < 1e-10);
        for l in &dec.eigenvalues()[1..] {
            assert!(l.abs() < 1e-10);
        }
        let top = &dec.eigenvectors()[0];
        let overlap = top.dot(&h).norm() / h.norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert_eq!(dec.rank(1e-9), 1);
    }

    #[test]
    fn random_reconstruction() {
        for (seed, n) in [(1u64, 1usize), (2, 2), (3, 3), (4, 7), (5, 16), (6, 40)] {
            check_decomposition(&random_hermitian(n, seed));
        }
    }

    #[test]
    fn eigenvalues_only_matches_full() {
        let m = random_hermitian(9, 11);
        let full = evd(&m).unwrap();
        let vals = eigenvalues(&m).unwrap();
        for (a, b) in full.eigenvalues().iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn already_tridiagonal_and_diagonal_inputs() {
        check_decomposition(&HermitianMatrix::from_diagonal(&[3.0, -1.0, 2.0, 0.0]));
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 1)] = C64::new(0.0, 2.0);
        m[(1, 0)] = C64::new(0.0, -2.0);
        m[(1, 2)] = C64::new(1.0, 1.0);
        m[(2, 1)] = C64::new(1.0, -1.0);
        check_decomposition(&HermitianMatrix::new(m).unwrap());
    }
}
