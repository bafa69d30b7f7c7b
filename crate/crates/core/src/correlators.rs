//! Multi-region expectation values and clustering defects.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ensure_disjoint, Region};
use crate::linalg::{Matrix, C64, ZERO};
use crate::marginal::PartyMarginal;
use crate::operators::{embed_matrix, gather_bits, scatter_bits, Observable};
use crate::seesaw::{self, Monomial, Polynomial, SeesawOptions, Slot};
use crate::states::{QuantumState, StateData};

/// Union supports up to this many sites go through a reduced density matrix.
pub const REDUCED_PATH_MAX_SITES: usize = 8;
/// Imaginary parts at or above this are reported as errors.
pub const IMAG_ERROR_TOL: f64 = 1e-8;
/// Slack allowed in the telescoping chain inequality.
pub const CHAIN_SLACK: f64 = 1e-9;

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() >= IMAG_ERROR_TOL {
        return Err(Error::NumericIntegrity(format!(
            "expectation has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn regions_of(obs: &[&Observable]) -> Vec<Region> {
    obs.iter().map(|o| o.region().clone()).collect()
}

fn check_sites(state: &QuantumState, regions: &[Region]) -> Result<()> {
    for r in regions {
        if r.max_site() >= state.n_sites() {
            return Err(Error::InvalidRegion(format!(
                "region {r} outside a {}-site state",
                state.n_sites()
            )));
        }
    }
    Ok(())
}

/// `⟨⊗_i E_i⟩` over disjoint regions.
pub fn expectation(state: &QuantumState, obs: &[Observable]) -> Result<f64> {
    let refs: Vec<&Observable> = obs.iter().collect();
    expectation_refs(state, &refs)
}

fn expectation_refs(state: &QuantumState, obs: &[&Observable]) -> Result<f64> {
    if obs.is_empty() {
        return Ok(1.0);
    }
    let regions = regions_of(obs);
    check_sites(state, &regions)?;
    ensure_disjoint(&regions)?;
    let union: usize = regions.iter().map(Region::len).sum();
    if union <= REDUCED_PATH_MAX_SITES {
        let marg = PartyMarginal::new(state, &regions)?;
        let ops: Vec<Option<&Matrix>> = obs.iter().map(|o| Some(o.matrix())).collect();
        real_part(marg.expectation(&ops))
    } else {
        real_part(direct_expectation(state, obs))
    }
}

/// Contract the product operator against the state without materializing it
/// on the full space: only the union sites are summed over.
fn direct_expectation(state: &QuantumState, obs: &[&Observable]) -> C64 {
    let n = state.n_sites();
    let sites: Vec<usize> = obs
        .iter()
        .flat_map(|o| o.region().sites().iter().copied())
        .collect();
    let mut local = crate::linalg::identity(1);
    for o in obs {
        local = crate::linalg::kron(&local, o.matrix());
    }
    let mut mask = 0usize;
    for &s in &sites {
        mask |= 1 << (n - 1 - s);
    }
    let kd = local.nrows();
    let offsets: Vec<usize> = (0..kd).map(|l| scatter_bits(l, &sites, n)).collect();
    let mut acc = ZERO;
    match state.data() {
        StateData::Pure(psi) => {
            for (c, &pc) in psi.iter().enumerate() {
                if pc == ZERO {
                    continue;
                }
                let lc = gather_bits(c, &sites, n);
                let rest = c & !mask;
                let mut row = ZERO;
                for (l, &off) in offsets.iter().enumerate() {
                    row += local[[lc, l]] * psi[rest | off];
                }
                acc += pc.conj() * row;
            }
        }
        StateData::Mixed(rho) => {
            for c in 0..rho.nrows() {
                let lc = gather_bits(c, &sites, n);
                let rest = c & !mask;
                for (l, &off) in offsets.iter().enumerate() {
                    acc += local[[lc, l]] * rho[[rest | off, c]];
                }
            }
        }
    }
    acc
}

/// Test oracle: embed every observable on the full space, multiply, trace.
pub fn expectation_full_trace(state: &QuantumState, obs: &[Observable]) -> Result<f64> {
    let regions: Vec<Region> = obs.iter().map(|o| o.region().clone()).collect();
    check_sites(state, &regions)?;
    ensure_disjoint(&regions)?;
    let n = state.n_sites();
    let mut full = crate::linalg::identity(1 << n);
    for o in obs {
        full = crate::linalg::matmul(&full, &embed_matrix(o.matrix(), o.region().sites(), n));
    }
    real_part(state.expectation_matrix(&full))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// `⟨E_1⟩⋯⟨E_{s-2}⟩⟨E_{s-1}E_s⟩`.
    Sequential,
    /// `⟨Π_{i∈A} E_i⟩⟨Π_{i∉A} E_i⟩`, `A` given by 0-based indices.
    Bipartition(Vec<usize>),
}

impl Partition {
    /// Blocks of observable indices whose expectations are multiplied.
    pub fn blocks(&self, s: usize) -> Vec<Vec<usize>> {
        match self {
            Partition::Sequential => {
                let mut b: Vec<Vec<usize>> = (0..s - 2).map(|i| vec![i]).collect();
                b.push(vec![s - 2, s - 1]);
                b
            }
            Partition::Bipartition(first) => {
                let rest = (0..s).filter(|i| !first.contains(i)).collect();
                vec![first.clone(), rest]
            }
        }
    }

    /// `seq`, or 1-based blocks such as `1+2|3+4`.
    pub fn label(&self, s: usize) -> String {
        match self {
            Partition::Sequential => "seq".into(),
            Partition::Bipartition(_) => self
                .blocks(s)
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|i| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join("+")
                })
                .collect::<Vec<_>>()
                .join("|"),
        }
    }

    pub fn parse(label: &str, s: usize) -> Result<Self> {
        if label == "seq" {
            return Ok(Partition::Sequential);
        }
        let (a, _) = label
            .split_once('|')
            .ok_or_else(|| Error::Partition(format!("cannot parse partition `{label}`")))?;
        let first: Result<Vec<usize>> = a
            .split('+')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1)
                    .map(|i| i - 1)
                    .ok_or_else(|| Error::Partition(format!("bad party `{t}` in `{label}`")))
            })
            .collect();
        let p = Partition::Bipartition(first?);
        p.validate(s)?;
        Ok(p)
    }

    fn validate(&self, s: usize) -> Result<()> {
        match self {
            Partition::Sequential => {
                if s < 3 {
                    return Err(Error::Arity(format!(
                        "sequential factorization needs at least 3 observables, got {s}"
                    )));
                }
            }
            Partition::Bipartition(first) => {
                let mut sorted = first.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != first.len() || sorted.iter().any(|&i| i >= s) {
                    return Err(Error::Partition(format!(
                        "invalid split {first:?} of {s} observables"
                    )));
                }
                if first.is_empty() || first.len() == s {
                    return Err(Error::Partition(
                        "split must be a nonempty proper subset".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Sequential => f.write_str("seq"),
            Partition::Bipartition(a) => write!(f, "split{a:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectRecord {
    pub partition: Partition,
    pub joint: f64,
    pub factored: f64,
    pub defect: f64,
    pub tau: Option<usize>,
    pub region_sizes: Vec<usize>,
}

impl DefectRecord {
    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn max_region_size(&self) -> usize {
        self.region_sizes.iter().copied().max().unwrap_or(0)
    }
}

fn product_expectation(state: &QuantumState, obs: &[&Observable], idx: &[usize]) -> Result<f64> {
    let sub: Vec<&Observable> = idx.iter().map(|&i| obs[i]).collect();
    expectation_refs(state, &sub)
}

fn defect_for(
    state: &QuantumState,
    obs: &[Observable],
    partition: Partition,
) -> Result<DefectRecord> {
    let s = obs.len();
    partition.validate(s)?;
    let refs: Vec<&Observable> = obs.iter().collect();
    let regions = regions_of(&refs);
    check_sites(state, &regions)?;
    ensure_disjoint(&regions)?;
    let all: Vec<usize> = (0..s).collect();
    let joint = product_expectation(state, &refs, &all)?;
    let mut factored = 1.0;
    for b in partition.blocks(s) {
        factored *= product_expectation(state, &refs, &b)?;
    }
    Ok(DefectRecord {
        partition,
        joint,
        factored,
        defect: (joint - factored).abs(),
        tau: None,
        region_sizes: regions.iter().map(Region::len).collect(),
    })
}

/// `|⟨E_1⋯E_s⟩ − ⟨E_1⟩⋯⟨E_{s−2}⟩⟨E_{s−1}E_s⟩|`.
pub fn defect_sequential(state: &QuantumState, obs: &[Observable]) -> Result<DefectRecord> {
    defect_for(state, obs, Partition::Sequential)
}

/// `|⟨E_1⋯E_s⟩ − ⟨Π_{i∈A}E_i⟩⟨Π_{i∉A}E_i⟩|` with `A = split` (0-based).
pub fn defect_bipartition(
    state: &QuantumState,
    obs: &[Observable],
    split: &[usize],
) -> Result<DefectRecord> {
    defect_for(state, obs, Partition::Bipartition(split.to_vec()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    /// The sequential defect.
    pub lhs: f64,
    /// `D_3, …, D_s` with `D_m = |⟨E_{s−m+1}⋯E_s⟩ − ⟨E_{s−m+1}⟩⟨E_{s−m+2}⋯E_s⟩|`.
    pub steps: Vec<f64>,
    pub rhs: f64,
    pub holds: bool,
}

/// Telescoping bound: the sequential defect is at most the sum of the
/// one-versus-rest defects peeled off from the left.
pub fn defect_chain_bound_check(state: &QuantumState, obs: &[Observable]) -> Result<ChainCheck> {
    let s = obs.len();
    let lhs = defect_sequential(state, obs)?.defect;
    let refs: Vec<&Observable> = obs.iter().collect();
    let mut steps = Vec::with_capacity(s - 2);
    for m in 3..=s {
        let start = s - m;
        let tail: Vec<usize> = (start..s).collect();
        let joint = product_expectation(state, &refs, &tail)?;
        let head = product_expectation(state, &refs, &[start])?;
        let rest = product_expectation(state, &refs, &tail[1..])?;
        steps.push((joint - head * rest).abs());
    }
    let rhs: f64 = steps.iter().sum();
    Ok(ChainCheck {
        lhs,
        holds: lhs <= rhs + CHAIN_SLACK,
        steps,
        rhs,
    })
}

/// Signed defect `joint − factored` as a see-saw functional, one input per party.
pub fn defect_polynomial(s: usize, partition: &Partition) -> Result<Polynomial> {
    partition.validate(s)?;
    let slot = |p| Slot { party: p, input: 0 };
    let joint = Monomial {
        coeff: 1.0,
        groups: vec![(0..s).map(slot).collect()],
    };
    let factored = Monomial {
        coeff: -1.0,
        groups: partition
            .blocks(s)
            .into_iter()
            .map(|b| b.into_iter().map(slot).collect())
            .collect(),
    };
    Polynomial::new(vec![1; s], vec![joint, factored])
}

#[derive(Debug, Clone)]
pub struct MaxDefect {
    pub record: DefectRecord,
    pub observables: Vec<Observable>,
}

/// Largest defect over all norm-one observables on the given regions, found
/// by see-saw on `±(joint − factored)`.
pub fn max_defect(
    state: &QuantumState,
    regions: &[Region],
    partition: Partition,
    opts: &SeesawOptions,
) -> Result<MaxDefect> {
    let s = regions.len();
    check_sites(state, regions)?;
    let poly = defect_polynomial(s, &partition)?;
    let marg = PartyMarginal::new(state, regions)?;
    let plus = seesaw::maximize(&marg, &poly, opts)?;
    let minus_opts = SeesawOptions {
        seed: seesaw::derive_seed(opts.seed, u64::MAX),
        ..*opts
    };
    let minus = seesaw::maximize(&marg, &poly.negated(), &minus_opts)?;
    let best = if minus.best.value > plus.best.value {
        minus.best
    } else {
        plus.best
    };
    let observables: Vec<Observable> = best
        .assignment
        .into_iter()
        .zip(regions)
        .map(|(mut ops, r)| Observable::new_unchecked(ops.remove(0), r.clone(), 1.0))
        .collect();
    let record = defect_for(state, &observables, partition)?;
    Ok(MaxDefect {
        record,
        observables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg;
    use crate::operators::Pauli;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(pauli: Pauli, site: usize) -> Observable {
        Observable::pauli(pauli, site)
    }

    fn random_observable(region: Region, rng: &mut ChaCha8Rng) -> Observable {
        let d = 1 << region.len();
        let a = ndarray::Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = (&a + &linalg::dagger(&a)).mapv(|z| z * 0.5);
        let norm = crate::operators::matrix_norm(&h, true).unwrap();
        Observable::new(h.mapv(|z| z / norm.max(1.0)), region).unwrap()
    }

    /// Random disjoint regions of sizes 1..=2 on an n-site chain.
    fn random_regions(n: usize, parties: usize, rng: &mut ChaCha8Rng) -> Vec<Region> {
        let mut sites: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            sites.swap(i, rng.random_range(0..=i));
        }
        let mut out = Vec::new();
        let mut at = 0;
        for _ in 0..parties {
            let k = if at + 2 <= n - (parties - out.len() - 1) && rng.random::<bool>() {
                2
            } else {
                1
            };
            out.push(Region::from_sorted_unchecked({
                let mut v = sites[at..at + k].to_vec();
                v.sort_unstable();
                v
            }));
            at += k;
        }
        out
    }

    #[test]
    fn basic_expectations() {
        let zero = QuantumState::basis(&[false, false, false]);
        assert_abs_diff_eq!(expectation(&zero, &[p(Pauli::Z, 0)]).unwrap(), 1.0);
        let ghz = QuantumState::ghz(3);
        let xxx = [p(Pauli::X, 0), p(Pauli::X, 1), p(Pauli::X, 2)];
        assert_abs_diff_eq!(expectation(&ghz, &xxx).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            expectation_full_trace(&ghz, &xxx).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let mm = QuantumState::maximally_mixed(3);
        let s = [p(Pauli::X, 0), p(Pauli::Y, 1), p(Pauli::Z, 2)];
        assert_abs_diff_eq!(expectation(&mm, &s).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(
            expectation(&ghz, &[p(Pauli::X, 0), p(Pauli::Z, 0)]),
            Err(Error::Disjointness(_))
        ));
    }

    #[test]
    fn imaginary_residue_is_an_error() {
        // A non-Hermitian "observable" smuggled past the constructor.
        let raise = ndarray::arr2(&[[ZERO, C64::new(1.0, 0.0)], [ZERO, ZERO]]);
        let o = Observable::new_unchecked(
            raise.mapv(|z| z * C64::new(0.0, 1.0)),
            Region::from_sorted_unchecked(vec![0]),
            1.0,
        );
        let plus =
            crate::states::product_state(&[crate::operators::bloch_density([1.0, 0.0, 0.0])])
                .unwrap();
        assert!(matches!(
            expectation(&plus, &[o]),
            Err(Error::NumericIntegrity(_))
        ));
    }

    #[test]
    fn sequential_defects() {
        let ghz = QuantumState::ghz(3);
        let xxx = [p(Pauli::X, 0), p(Pauli::X, 1), p(Pauli::X, 2)];
        let d = defect_sequential(&ghz, &xxx).unwrap();
        assert_abs_diff_eq!(d.joint, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.factored, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.defect, 1.0, epsilon = 1e-14);

        let mm = QuantumState::maximally_mixed(3);
        let zzz = [p(Pauli::Z, 0), p(Pauli::Z, 1), p(Pauli::Z, 2)];
        let d = defect_sequential(&mm, &zzz).unwrap();
        assert_eq!((d.joint, d.factored, d.defect), (0.0, 0.0, 0.0));

        assert!(matches!(
            defect_sequential(&ghz, &xxx[..2]),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn bipartition_defects() {
        let ghz = QuantumState::ghz(4);
        let x4: Vec<_> = (0..4).map(|s| p(Pauli::X, s)).collect();
        let d = defect_bipartition(&ghz, &x4, &[0, 1]).unwrap();
        assert_abs_diff_eq!(d.joint, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.factored, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.defect, 1.0, epsilon = 1e-14);
        assert_eq!(d.partition.label(4), "1+2|3+4");
        assert!(matches!(
            defect_bipartition(&ghz, &x4, &[]),
            Err(Error::Partition(_))
        ));
        assert!(matches!(
            defect_bipartition(&ghz, &x4, &[0, 1, 2, 3]),
            Err(Error::Partition(_))
        ));

        // two observables: covariance
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = QuantumState::random_pure(2, &mut rng);
        let a = p(Pauli::X, 0);
        let b = p(Pauli::Z, 1);
        let d = defect_bipartition(&psi, &[a.clone(), b.clone()], &[0]).unwrap();
        let cov = expectation(&psi, &[a.clone(), b.clone()]).unwrap()
            - expectation(&psi, &[a]).unwrap() * expectation(&psi, &[b]).unwrap();
        assert_abs_diff_eq!(d.defect, cov.abs(), epsilon = 1e-14);
    }

    #[test]
    fn three_party_shapes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = QuantumState::random_pure(3, &mut rng);
        let obs = [p(Pauli::X, 0), p(Pauli::Y, 1), p(Pauli::Z, 2)];
        let a = defect_sequential(&psi, &obs).unwrap();
        let b = defect_bipartition(&psi, &obs, &[0]).unwrap();
        assert_eq!(a.defect.to_bits(), b.defect.to_bits());
    }

    #[test]
    fn partition_labels_round_trip() {
        for (label, s) in [("seq", 3), ("1|2+3", 3), ("1+3|2+4", 4)] {
            assert_eq!(Partition::parse(label, s).unwrap().label(s), label);
        }
        assert!(Partition::parse("1+5|2", 4).is_err());
    }

    #[test]
    fn chain_check_cases() {
        let zero = QuantumState::basis(&[false; 4]);
        let obs: Vec<_> = (0..4).map(|s| p(Pauli::Z, s)).collect();
        let c = defect_chain_bound_check(&zero, &obs).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, 0.0);
        assert!(c.steps.iter().all(|&d| d == 0.0));

        let ghz = QuantumState::ghz(4);
        let x4: Vec<_> = (0..4).map(|s| p(Pauli::X, s)).collect();
        let c = defect_chain_bound_check(&ghz, &x4).unwrap();
        assert_abs_diff_eq!(c.lhs, 1.0, epsilon = 1e-14);
        assert!(c.rhs >= 1.0 - 1e-12 && c.holds);
    }

    #[test]
    fn max_defect_on_ghz_is_one() {
        let ghz = QuantumState::ghz(3);
        let lat = Lattice::chain(3).unwrap();
        let regions: Vec<Region> = (0..3).map(|s| lat.region([s]).unwrap()).collect();
        let opts = SeesawOptions {
            restarts: 6,
            seed: 3,
            ..Default::default()
        };
        let m = max_defect(&ghz, &regions, Partition::Sequential, &opts).unwrap();
        assert!(m.record.defect >= 1.0 - 1e-9, "{}", m.record.defect);
        assert!(m.record.defect <= 2.0 + 1e-12);
    }

    #[test]
    fn large_union_uses_direct_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let psi = QuantumState::random_pure(10, &mut rng);
        let lat = Lattice::chain(10).unwrap();
        let obs = vec![
            random_observable(lat.region([0, 1, 2]).unwrap(), &mut rng),
            random_observable(lat.region([4, 5, 6]).unwrap(), &mut rng),
            random_observable(lat.region([8, 9, 3]).unwrap(), &mut rng),
        ];
        let fast = expectation(&psi, &obs).unwrap();
        let oracle = expectation_full_trace(&psi, &obs).unwrap();
        assert_abs_diff_eq!(fast, oracle, epsilon = 1e-10);
        let rho = QuantumState::mixed(psi.density_matrix().into_owned(), 10).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &obs).unwrap(), oracle, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reduced_matches_full_trace(seed in 0u64..100_000, mixed in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5;
            let psi = QuantumState::random_pure(n, &mut rng);
            let state = if mixed {
                let other = QuantumState::random_pure(n, &mut rng);
                let w: f64 = rng.random();
                let rho = psi.density_matrix().mapv(|z| z * w) + other.density_matrix().mapv(|z| z * (1.0 - w));
                QuantumState::mixed(rho, n).unwrap()
            } else {
                psi
            };
            let regions = random_regions(n, 3, &mut rng);
            let obs: Vec<Observable> = regions.into_iter().map(|r| random_observable(r, &mut rng)).collect();
            let a = expectation(&state, &obs).unwrap();
            let b = expectation_full_trace(&state, &obs).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
            prop_assert!(a.abs() <= 1.0 + 1e-10);
        }

        #[test]
        fn product_states_factorize(seed in 0u64..100_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let locals: Vec<Matrix> = (0..4).map(|_| {
                let v: [f64; 3] = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
                crate::operators::bloch_density(v)
            }).collect();
            let state = crate::states::product_state(&locals).unwrap();
            let lat = Lattice::chain(4).unwrap();
            let obs: Vec<Observable> = (0..4).map(|s| random_observable(lat.region([s]).unwrap(), &mut rng)).collect();
            prop_assert!(defect_sequential(&state, &obs).unwrap().defect <= 1e-10);
            for split in [vec![0], vec![0, 1], vec![0, 2], vec![1, 3]] {
                let d = defect_bipartition(&state, &obs, &split).unwrap();
                prop_assert!(d.defect <= 1e-10);
                prop_assert!(d.defect <= 2.0);
            }
        }

        #[test]
        fn telescoping_holds(seed in 0u64..100_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = QuantumState::random_pure(3, &mut rng);
            let lat = Lattice::chain(3).unwrap();
            let obs: Vec<Observable> = (0..3).map(|s| random_observable(lat.region([s]).unwrap(), &mut rng)).collect();
            let c = defect_chain_bound_check(&state, &obs).unwrap();
            prop_assert!(c.holds);
        }
    }
}
