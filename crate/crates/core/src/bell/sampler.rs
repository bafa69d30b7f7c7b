use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bound::bipartitions;
use crate::error::{Error, Result};
use crate::linalg::{Vector, ZERO};
use crate::operators::gather_bits;
use crate::seesaw::derive_seed;
use crate::states::{random_unit_vector, QuantumState};

/// `Σ_k p_k |a_k⟩⟨a_k| ⊗ |b_k⟩⟨b_k|`, one term per bipartition in the order of
/// [`bipartitions`], with Haar-random block vectors. Party `p` is site `p`.
/// Block vectors depend only on `(seed, k)`, so zero weights do not shift the
/// other terms.
pub fn random_biseparable_state(n: usize, weights: &[f64], seed: u64) -> Result<QuantumState> {
    if n < 3 {
        return Err(Error::Arity(format!(
            "biseparable sampler needs n ≥ 3, got {n}"
        )));
    }
    if n > 10 {
        return Err(Error::Resource(format!(
            "{n}-party density matrix is too large"
        )));
    }
    let parts = bipartitions(n);
    if weights.len() != parts.len() {
        return Err(Error::Config(format!(
            "{} weights for {} bipartitions",
            weights.len(),
            parts.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Config(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("weights sum to {total}, not 1")));
    }
    let dim = 1usize << n;
    let mut rho = Array2::from_elem((dim, dim), ZERO);
    for (k, (bp, &w)) in parts.iter().zip(weights).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
        let a = random_unit_vector(1 << bp.first.len(), &mut rng);
        let b = random_unit_vector(1 << bp.second.len(), &mut rng);
        if w == 0.0 {
            continue;
        }
        let psi: Vector = (0..dim)
            .map(|i| a[gather_bits(i, &bp.first, n)] * b[gather_bits(i, &bp.second, n)])
            .collect();
        for i in 0..dim {
            let pi = psi[i] * w;
            if pi == ZERO {
                continue;
            }
            for j in 0..dim {
                rho[[i, j]] += pi * psi[j].conj();
            }
        }
    }
    QuantumState::mixed(rho, n)
}
