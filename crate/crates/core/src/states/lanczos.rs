//! Lanczos iteration with full reorthogonalization for the bottom of a spectrum.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};

const START_SEED: u64 = 0x1a2b_3c4d_5e6f_7081;
const CHECK_EVERY: usize = 8;

pub struct LanczosResult {
    /// Lowest `k` Ritz values, ascending.
    pub values: Vec<f64>,
    /// Ritz vector of the lowest value, unit norm.
    pub ground: Vec<C64>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest `k` eigenvalues of the Hermitian map `apply` on a `dim`-dimensional
/// space. `scale` is an upper bound on the operator norm, used for the
/// convergence threshold.
pub fn lowest<F>(dim: usize, k: usize, scale: f64, apply: F) -> Result<LanczosResult>
where
    F: Fn(&[C64], &mut [C64]),
{
    if dim == 0 {
        return Err(Error::Shape("empty space".into()));
    }
    let max_m = dim.min(400);
    let tol = 1e-12 * scale.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v0: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    let n0 = norm(&v0);
    v0.iter_mut().for_each(|z| *z /= n0);

    let mut basis: Vec<Vec<C64>> = vec![v0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; dim];

    loop {
        let j = basis.len() - 1;
        w.iter_mut().for_each(|z| *z = ZERO);
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let p = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= p * vi;
                }
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let exhausted = b <= tol || m >= max_m;
        if exhausted || m.is_multiple_of(CHECK_EVERY) {
            let (theta, y) = tridiagonal_eigen(&alpha, &beta)?;
            let kk = k.min(m);
            let converged = (0..kk).all(|i| (b * y[[m - 1, i]]).abs() <= tol);
            if converged || exhausted {
                if !converged && m < dim {
                    return Err(Error::NumericIntegrity(format!(
                        "Lanczos did not converge in {m} steps"
                    )));
                }
                let mut ground = vec![ZERO; dim];
                for (i, v) in basis.iter().enumerate() {
                    let coef = y[[i, 0]];
                    for (g, x) in ground.iter_mut().zip(v) {
                        *g += x * coef;
                    }
                }
                let gn = norm(&ground);
                ground.iter_mut().for_each(|z| *z /= gn);
                return Ok(LanczosResult {
                    values: theta[..kk].to_vec(),
                    ground,
                });
            }
        }
        beta.push(b);
        let next: Vec<C64> = w.iter().map(|z| z / b).collect();
        basis.push(next);
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let m = alpha.len();
    let mut t = Array2::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alpha[i];
        if i + 1 < m {
            t[[i + 1, i]] = beta[i];
            t[[i, i + 1]] = beta[i];
        }
    }
    linalg::eigh_real(&t)
}
