//! Coordinate ascent over local observables for multilinear correlation
//! functionals.
//!
//! A functional is a sum of monomials `c · Π_g ⟨⊗_{(p,k)∈g} E_{p,k}⟩`, where
//! every party appears at most once per monomial. With all other observables
//! fixed the value is linear in each `E_{p,k}`, `tr(E_{p,k} F_{p,k})`. On a
//! single site the observable is a dichotomic `n̂·σ` and the optimum points
//! `n̂` along the Bloch vector of `F`; on larger regions the optimum under
//! `‖E‖ ≤ 1` is `sign(F)`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64, ZERO};
use crate::marginal::PartyMarginal;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent sub-seed for stream `stream` of a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master ^ mix(stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub party: usize,
    pub input: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub groups: Vec<Vec<Slot>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    inputs: Vec<usize>,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(inputs: Vec<usize>, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            let mut seen = vec![false; inputs.len()];
            for s in m.groups.iter().flatten() {
                if s.party >= inputs.len() || s.input >= inputs[s.party] {
                    return Err(Error::Config(format!(
                        "slot (party {}, input {}) out of range",
                        s.party + 1,
                        s.input
                    )));
                }
                if seen[s.party] {
                    return Err(Error::Config(format!(
                        "party {} appears twice in one term",
                        s.party + 1
                    )));
                }
                seen[s.party] = true;
            }
        }
        Ok(Self { inputs, monomials })
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn negated(&self) -> Self {
        Self {
            inputs: self.inputs.clone(),
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    coeff: -m.coeff,
                    groups: m.groups.clone(),
                })
                .collect(),
        }
    }

    /// `Σ |c|`, the largest value reachable with norm-one observables.
    pub fn l1_norm(&self) -> f64 {
        self.monomials.iter().map(|m| m.coeff.abs()).sum()
    }
}

/// `assignment[party][input]`: Hermitian local matrices.
pub type Assignment = Vec<Vec<Matrix>>;

fn group_value(marg: &PartyMarginal, group: &[Slot], asg: &Assignment) -> C64 {
    let mut ops: Vec<Option<&Matrix>> = vec![None; marg.parties()];
    for s in group {
        ops[s.party] = Some(&asg[s.party][s.input]);
    }
    marg.expectation(&ops)
}

/// Value of the functional; errors when the imaginary part is not negligible.
pub fn evaluate(marg: &PartyMarginal, poly: &Polynomial, asg: &Assignment) -> Result<f64> {
    let mut acc = ZERO;
    for m in &poly.monomials {
        let mut term = C64::new(m.coeff, 0.0);
        for g in &m.groups {
            term *= group_value(marg, g, asg);
        }
        acc += term;
    }
    if acc.im.abs() >= crate::correlators::IMAG_ERROR_TOL {
        return Err(Error::NumericIntegrity(format!(
            "functional has imaginary part {}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// `F_{p,k}` for every input `k` of party `p`.
fn effective_operators(
    marg: &PartyMarginal,
    poly: &Polynomial,
    asg: &Assignment,
    party: usize,
) -> Vec<Matrix> {
    let d = marg.dims()[party];
    let mut out = vec![Array2::from_elem((d, d), ZERO); poly.inputs[party]];
    for m in &poly.monomials {
        let Some((gi, slot)) = m
            .groups
            .iter()
            .enumerate()
            .find_map(|(gi, g)| g.iter().find(|s| s.party == party).map(|s| (gi, *s)))
        else {
            continue;
        };
        let mut scale = C64::new(m.coeff, 0.0);
        for (gj, g) in m.groups.iter().enumerate() {
            if gj != gi {
                scale *= group_value(marg, g, asg);
            }
        }
        if scale == ZERO {
            continue;
        }
        let mut ops: Vec<Option<&Matrix>> = vec![None; marg.parties()];
        for s in &m.groups[gi] {
            if s.party != party {
                ops[s.party] = Some(&asg[s.party][s.input]);
            }
        }
        let f = marg.effective_operator(party, &ops);
        out[slot.input].zip_mut_with(&f, |o, x| *o += scale * x);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_iter: 500,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub value: f64,
    pub assignment: Assignment,
    pub iterations: usize,
    pub converged: bool,
    /// Some effective operator vanished and was replaced by the identity.
    pub zero_effective: bool,
    /// Value before the first sweep and after every sweep.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SeesawOutcome {
    pub best: RestartOutcome,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
}

fn random_assignment(
    marg: &PartyMarginal,
    inputs: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Assignment> {
    let mut asg = Vec::with_capacity(inputs.len());
    for (p, &k) in inputs.iter().enumerate() {
        let d = marg.dims()[p];
        let mut row = Vec::with_capacity(k);
        for _ in 0..k {
            if d == 2 {
                let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                row.push(bloch_observable(v).0);
                continue;
            }
            let a = Array2::from_shape_fn((d, d), |_| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let h = (&a + &linalg::dagger(&a)).mapv(|z| z * 0.5);
            row.push(linalg::hermitian_sign(&h)?.0);
        }
        asg.push(row);
    }
    Ok(asg)
}

/// `n̂·σ` along `v`; `σ_z` with the flag set when `v` vanishes.
fn bloch_observable(v: [f64; 3]) -> (Matrix, bool) {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm <= 1e-14 {
        return (linalg::pauli_z(), true);
    }
    let [x, y, z] = v.map(|c| c / norm);
    let m = ndarray::arr2(&[
        [C64::new(z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(-z, 0.0)],
    ]);
    (m, false)
}

/// Maximizer of `tr(E F)` over the admissible observables of one party.
fn local_optimum(f: &Matrix) -> Result<(Matrix, bool)> {
    if f.nrows() == 2 {
        // F = f0 + f·σ, so tr((n̂·σ) F) = 2 n̂·f
        let fx = 0.5 * (f[[0, 1]].re + f[[1, 0]].re);
        let fy = 0.5 * (f[[1, 0]].im - f[[0, 1]].im);
        let fz = 0.5 * (f[[0, 0]].re - f[[1, 1]].re);
        let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let (m, _) = bloch_observable([fx / scale, fy / scale, fz / scale]);
        let zero = (fx * fx + fy * fy + fz * fz).sqrt() <= 1e-13 * scale.max(1.0);
        return Ok(if zero {
            (linalg::pauli_z(), true)
        } else {
            (m, false)
        });
    }
    linalg::hermitian_sign(f)
}

/// One see-saw run from a given starting assignment.
pub fn ascend(
    marg: &PartyMarginal,
    poly: &Polynomial,
    mut asg: Assignment,
    max_iter: usize,
    tol: f64,
) -> Result<RestartOutcome> {
    let mut value = evaluate(marg, poly, &asg)?;
    let mut history = vec![value];
    let mut converged = false;
    let mut zero_effective = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for p in 0..poly.parties() {
            let fs = effective_operators(marg, poly, &asg, p);
            for (k, f) in fs.iter().enumerate() {
                let (e, zero) = local_optimum(f)?;
                zero_effective |= zero;
                asg[p][k] = e;
            }
        }
        let next = evaluate(marg, poly, &asg)?;
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < tol {
            converged = true;
            break;
        }
    }
    Ok(RestartOutcome {
        value,
        assignment: asg,
        iterations,
        converged,
        zero_effective,
        history,
    })
}

/// Best of `opts.restarts` see-saw runs. Restart `r` starts from a random
/// assignment seeded by `derive_seed(opts.seed, r)`; ties go to the lowest
/// restart index, so the result does not depend on the thread count.
pub fn maximize(
    marg: &PartyMarginal,
    poly: &Polynomial,
    opts: &SeesawOptions,
) -> Result<SeesawOutcome> {
    if opts.restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    if poly.parties() != marg.parties() {
        return Err(Error::Arity(format!(
            "functional has {} parties, state marginal has {}",
            poly.parties(),
            marg.parties()
        )));
    }
    let runs: Vec<Result<RestartOutcome>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
            let start = random_assignment(marg, poly.inputs(), &mut rng)?;
            ascend(marg, poly, start, opts.max_iter, opts.tol)
        })
        .collect();
    let mut best: Option<(usize, RestartOutcome)> = None;
    let mut restart_values = Vec::with_capacity(runs.len());
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        restart_values.push(run.value);
        let better = match &best {
            None => true,
            Some((_, b)) => run.value > b.value,
        };
        if better {
            best = Some((r, run));
        }
    }
    let (best_restart, best) = best.expect("at least one restart");
    Ok(SeesawOutcome {
        best,
        best_restart,
        restart_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, Region};
    use crate::states::QuantumState;
    use proptest::prelude::*;

    fn chsh() -> Polynomial {
        let s = |party, input| Slot { party, input };
        let m = |c: f64, a, b| Monomial {
            coeff: c,
            groups: vec![vec![s(0, a), s(1, b)]],
        };
        Polynomial::new(
            vec![2, 2],
            vec![m(1.0, 0, 0), m(1.0, 0, 1), m(1.0, 1, 0), m(-1.0, 1, 1)],
        )
        .unwrap()
    }

    fn singles(n: usize) -> Vec<Region> {
        let lat = Lattice::chain(n).unwrap();
        (0..n).map(|s| lat.region([s]).unwrap()).collect()
    }

    #[test]
    fn chsh_on_bell_pair_reaches_tsirelson() {
        let bell = QuantumState::ghz(2);
        let marg = PartyMarginal::new(&bell, &singles(2)).unwrap();
        let out = maximize(
            &marg,
            &chsh(),
            &SeesawOptions {
                restarts: 5,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (out.best.value - 2.0 * 2f64.sqrt()).abs() < 1e-6,
            "{}",
            out.best.value
        );
    }

    #[test]
    fn repeated_party_rejected() {
        let s = Slot { party: 0, input: 0 };
        let m = Monomial {
            coeff: 1.0,
            groups: vec![vec![s], vec![s]],
        };
        assert!(Polynomial::new(vec![1], vec![m]).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|r| derive_seed(7, r)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn sweeps_never_decrease(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = QuantumState::random_pure(2, &mut rng);
            let marg = PartyMarginal::new(&state, &singles(2)).unwrap();
            let start = random_assignment(&marg, &[2, 2], &mut rng).unwrap();
            let run = ascend(&marg, &chsh(), start, 100, 0.0).unwrap();
            for w in run.history.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            prop_assert!(run.value <= chsh().l1_norm() + 1e-9);
        }

        #[test]
        fn seed_determinism(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = QuantumState::random_pure(2, &mut rng);
            let marg = PartyMarginal::new(&state, &singles(2)).unwrap();
            let opts = SeesawOptions { restarts: 3, seed, ..Default::default() };
            let a = maximize(&marg, &chsh(), &opts).unwrap();
            let b = maximize(&marg, &chsh(), &opts).unwrap();
            prop_assert_eq!(a.best.value.to_bits(), b.best.value.to_bits());
            prop_assert_eq!(a.best_restart, b.best_restart);
        }
    }
}
