//! Reduced state on a list of parties and contractions against local operators.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lattice::{ensure_disjoint, Region};
use crate::linalg::{Matrix, C64, ZERO};
use crate::states::{reduce_ordered, QuantumState};

/// Largest union support (in sites) for which a marginal is materialized.
pub const MAX_MARGINAL_SITES: usize = 12;

/// Reduced density matrix on the concatenation `X_1 X_2 … X_n` of party
/// regions, party 1 most significant.
#[derive(Debug, Clone)]
pub struct PartyMarginal {
    rho: Matrix,
    dims: Vec<usize>,
    /// `digits[I][p]`: local index of party `p` inside joint index `I`.
    digits: Vec<Vec<usize>>,
}

impl PartyMarginal {
    pub fn new(state: &QuantumState, regions: &[Region]) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Arity("no parties given".into()));
        }
        ensure_disjoint(regions)?;
        let sites: Vec<usize> = regions
            .iter()
            .flat_map(|r| r.sites().iter().copied())
            .collect();
        if sites.len() > MAX_MARGINAL_SITES {
            return Err(Error::Resource(format!(
                "parties span {} sites; marginals are limited to {MAX_MARGINAL_SITES}",
                sites.len()
            )));
        }
        let rho = reduce_ordered(state, &sites)?;
        let dims: Vec<usize> = regions.iter().map(|r| 1usize << r.len()).collect();
        Ok(Self::from_parts(rho, dims))
    }

    /// Wrap a joint density matrix with explicit party dimensions.
    pub fn from_parts(rho: Matrix, dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        assert_eq!(rho.dim(), (total, total), "marginal shape mismatch");
        let digits = (0..total)
            .map(|mut idx| {
                let mut d = vec![0; dims.len()];
                for p in (0..dims.len()).rev() {
                    d[p] = idx % dims[p];
                    idx /= dims[p];
                }
                d
            })
            .collect();
        Self { rho, dims, digits }
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    /// `tr(ρ ⊗_p O_p)`, `None` meaning the identity on that party.
    pub fn expectation(&self, ops: &[Option<&Matrix>]) -> C64 {
        debug_assert_eq!(ops.len(), self.dims.len());
        let active: Vec<usize> = (0..ops.len()).filter(|&p| ops[p].is_some()).collect();
        if active.is_empty() {
            return (0..self.rho.nrows()).map(|i| self.rho[[i, i]]).sum();
        }
        let n = self.rho.nrows();
        let mut acc = ZERO;
        for i in 0..n {
            let di = &self.digits[i];
            'col: for j in 0..n {
                let r = self.rho[[i, j]];
                if r == ZERO {
                    continue;
                }
                let dj = &self.digits[j];
                let mut w = r;
                for p in 0..ops.len() {
                    match ops[p] {
                        Some(o) => {
                            let v = o[[dj[p], di[p]]];
                            if v == ZERO {
                                continue 'col;
                            }
                            w *= v;
                        }
                        None => {
                            if di[p] != dj[p] {
                                continue 'col;
                            }
                        }
                    }
                }
                acc += w;
            }
        }
        acc
    }

    /// `F = tr_{¬open}[ρ (1_open ⊗ ⊗_{p≠open} O_p)]`, so that replacing the
    /// open party's operator by `E` gives `tr(E F)`. `F` is Hermitian when
    /// the other operators are.
    pub fn effective_operator(&self, open: usize, ops: &[Option<&Matrix>]) -> Matrix {
        let d = self.dims[open];
        let mut f = Array2::from_elem((d, d), ZERO);
        let n = self.rho.nrows();
        for i in 0..n {
            let di = &self.digits[i];
            'col: for j in 0..n {
                let r = self.rho[[i, j]];
                if r == ZERO {
                    continue;
                }
                let dj = &self.digits[j];
                let mut w = r;
                for p in 0..ops.len() {
                    if p == open {
                        continue;
                    }
                    match ops[p] {
                        Some(o) => {
                            let v = o[[dj[p], di[p]]];
                            if v == ZERO {
                                continue 'col;
                            }
                            w *= v;
                        }
                        None => {
                            if di[p] != dj[p] {
                                continue 'col;
                            }
                        }
                    }
                }
                f[[di[open], dj[open]]] += w;
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg;
    use crate::operators::embed_matrix;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        use rand::Rng;
        let a = Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&a + &linalg::dagger(&a)).mapv(|z| z * 0.5)
    }

    #[test]
    fn ghz_xxx_is_one() {
        let ghz = QuantumState::ghz(3);
        let lat = Lattice::chain(3).unwrap();
        let regions: Vec<Region> = (0..3).map(|s| lat.region([s]).unwrap()).collect();
        let m = PartyMarginal::new(&ghz, &regions).unwrap();
        let x = linalg::pauli_x();
        let v = m.expectation(&[Some(&x), Some(&x), Some(&x)]);
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.expectation(&[None, None, None]).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn overlapping_parties_rejected() {
        let lat = Lattice::chain(3).unwrap();
        let r = [lat.region([0, 1]).unwrap(), lat.region([1]).unwrap()];
        assert!(matches!(
            PartyMarginal::new(&QuantumState::ghz(3), &r),
            Err(Error::Disjointness(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Party order need not follow site order; compare with a full-space trace.
        #[test]
        fn contraction_matches_full_trace(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = QuantumState::random_pure(5, &mut rng);
            let lat = Lattice::chain(5).unwrap();
            let regions = vec![lat.region([3]).unwrap(), lat.region([0, 4]).unwrap(), lat.region([1]).unwrap()];
            let m = PartyMarginal::new(&state, &regions).unwrap();
            let ops: Vec<Matrix> = regions.iter().map(|r| random_hermitian(1 << r.len(), &mut rng)).collect();
            let fast = m.expectation(&[Some(&ops[0]), Some(&ops[1]), Some(&ops[2])]);
            let mut full = linalg::identity(32);
            for (o, r) in ops.iter().zip(&regions) {
                full = linalg::matmul(&full, &embed_matrix(o, r.sites(), 5));
            }
            let oracle = state.expectation_matrix(&full);
            prop_assert!((fast - oracle).norm() < 1e-12);

            // effective operator reproduces the value and is Hermitian
            for open in 0..3 {
                let others: Vec<Option<&Matrix>> = (0..3).map(|p| if p == open { None } else { Some(&ops[p]) }).collect();
                let f = m.effective_operator(open, &others);
                prop_assert!(linalg::is_hermitian(&f, 1e-12));
                let v = linalg::trace(&linalg::matmul(&ops[open], &f));
                prop_assert!((v - oracle).norm() < 1e-12);
            }
        }
    }
}
