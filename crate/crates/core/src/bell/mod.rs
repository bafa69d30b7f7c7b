//! Bell functionals: catalog, evaluation, see-saw optimization, hybrid-model
//! bounds and a biseparable state sampler.

mod bound;
mod catalog;
mod sampler;

use serde::{Deserialize, Serialize};

pub use bound::{
    bipartitions, biseparable_bound, Bipartition, ENUMERATION_MAX_INPUTS, ENUMERATION_MAX_PARTIES,
};
pub use catalog::{catalog, seevinck_svetlichny, svetlichny3, svetlichny4, Sign, CATALOG_NAMES};
pub use sampler::random_biseparable_state;

use crate::correlators;
use crate::error::{Error, Result};
use crate::lattice::{ensure_disjoint, Region};
use crate::marginal::PartyMarginal;
use crate::operators::Observable;
use crate::seesaw::{self, Monomial, Polynomial, SeesawOptions, Slot};
use crate::states::QuantumState;

/// One correlator `ψ ⟨E^{(i_1)}_{k_1} ⋯ E^{(i_s)}_{k_s}⟩`, parties and inputs 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub parties: Vec<usize>,
    pub inputs: Vec<usize>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum InputsSpec {
    Uniform(usize),
    PerParty(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInequality {
    name: String,
    n: usize,
    inputs: InputsSpec,
    terms: Vec<Term>,
    #[serde(default)]
    delta_loc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInequality")]
pub struct BellInequality {
    name: String,
    n: usize,
    inputs: Vec<usize>,
    terms: Vec<Term>,
    delta_loc: Option<f64>,
}

impl TryFrom<RawInequality> for BellInequality {
    type Error = Error;

    fn try_from(raw: RawInequality) -> Result<Self> {
        let inputs = match raw.inputs {
            InputsSpec::Uniform(k) => vec![k; raw.n],
            InputsSpec::PerParty(v) => v,
        };
        BellInequality::new(raw.name, inputs, raw.terms, raw.delta_loc)
    }
}

impl BellInequality {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<usize>,
        terms: Vec<Term>,
        delta_loc: Option<f64>,
    ) -> Result<Self> {
        let n = inputs.len();
        if n == 0 {
            return Err(Error::Arity("inequality needs at least one party".into()));
        }
        if inputs.contains(&0) {
            return Err(Error::Config("every party needs at least one input".into()));
        }
        for (t, term) in terms.iter().enumerate() {
            if term.parties.is_empty() || term.parties.len() != term.inputs.len() {
                return Err(Error::Config(format!(
                    "term {t}: {} parties but {} inputs",
                    term.parties.len(),
                    term.inputs.len()
                )));
            }
            if term.parties.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "term {t}: parties must be strictly increasing"
                )));
            }
            for (&p, &k) in term.parties.iter().zip(&term.inputs) {
                if p >= n || k >= inputs[p] {
                    return Err(Error::Config(format!(
                        "term {t}: party {p} input {k} out of range"
                    )));
                }
            }
            if !term.coeff.is_finite() {
                return Err(Error::Config(format!(
                    "term {t}: coefficient is not finite"
                )));
            }
        }
        if let Some(d) = delta_loc {
            if !d.is_finite() {
                return Err(Error::Config("delta_loc is not finite".into()));
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            inputs,
            terms,
            delta_loc,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn delta_loc(&self) -> Option<f64> {
        self.delta_loc
    }

    /// `Σ|ψ|`.
    pub fn eta(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Coefficient of a term, zero when absent.
    pub fn coefficient(&self, parties: &[usize], inputs: &[usize]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.parties == parties && t.inputs == inputs)
            .map(|t| t.coeff)
            .sum()
    }

    /// Reorder parties: new party `i` is old party `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..self.n).collect::<Vec<_>>() {
            return Err(Error::Config(format!(
                "{perm:?} is not a permutation of the parties"
            )));
        }
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut pairs: Vec<(usize, usize)> = t
                    .parties
                    .iter()
                    .map(|&p| inv[p])
                    .zip(t.inputs.iter().copied())
                    .collect();
                pairs.sort_unstable();
                Term {
                    parties: pairs.iter().map(|p| p.0).collect(),
                    inputs: pairs.iter().map(|p| p.1).collect(),
                    coeff: t.coeff,
                }
            })
            .collect();
        let inputs = perm.iter().map(|&p| self.inputs[p]).collect();
        Self::new(
            format!("{}-permuted", self.name),
            inputs,
            terms,
            self.delta_loc,
        )
    }

    /// The functional as a see-saw polynomial: one joint expectation per term.
    pub fn polynomial(&self) -> Result<Polynomial> {
        let monomials = self
            .terms
            .iter()
            .map(|t| Monomial {
                coeff: t.coeff,
                groups: vec![t
                    .parties
                    .iter()
                    .zip(&t.inputs)
                    .map(|(&party, &input)| Slot { party, input })
                    .collect()],
            })
            .collect();
        Polynomial::new(self.inputs.clone(), monomials)
    }
}

/// Per party, per input: an observable on the party's region.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssignment {
    regions: Vec<Region>,
    observables: Vec<Vec<Observable>>,
}

impl MeasurementAssignment {
    pub fn new(observables: Vec<Vec<Observable>>) -> Result<Self> {
        let mut regions = Vec::with_capacity(observables.len());
        for (p, row) in observables.iter().enumerate() {
            let first = row
                .first()
                .ok_or_else(|| Error::Config(format!("party {p} has no observables")))?;
            if row.iter().any(|o| o.region() != first.region()) {
                return Err(Error::InvalidRegion(format!(
                    "party {p} observables act on different regions"
                )));
            }
            regions.push(first.region().clone());
        }
        ensure_disjoint(&regions)?;
        Ok(Self {
            regions,
            observables,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn observables(&self) -> &[Vec<Observable>] {
        &self.observables
    }

    pub fn get(&self, party: usize, input: usize) -> &Observable {
        &self.observables[party][input]
    }

    fn matrices(&self) -> seesaw::Assignment {
        self.observables
            .iter()
            .map(|row| row.iter().map(|o| o.matrix().clone()).collect())
            .collect()
    }
}

/// `Σ ψ ⟨⊗ E⟩`, every correlator through `correlators::expectation`.
pub fn evaluate(
    state: &QuantumState,
    ineq: &BellInequality,
    asg: &MeasurementAssignment,
) -> Result<f64> {
    check_assignment(ineq, asg)?;
    let mut value = 0.0;
    for t in &ineq.terms {
        if t.coeff == 0.0 {
            continue;
        }
        let obs: Vec<Observable> = t
            .parties
            .iter()
            .zip(&t.inputs)
            .map(|(&p, &k)| asg.get(p, k).clone())
            .collect();
        value += t.coeff * correlators::expectation(state, &obs)?;
    }
    Ok(value)
}

fn check_assignment(ineq: &BellInequality, asg: &MeasurementAssignment) -> Result<()> {
    if asg.observables.len() != ineq.n {
        return Err(Error::Arity(format!(
            "assignment has {} parties, inequality {}",
            asg.observables.len(),
            ineq.n
        )));
    }
    for (p, row) in asg.observables.iter().enumerate() {
        if row.len() != ineq.inputs[p] {
            return Err(Error::Arity(format!(
                "party {p}: {} observables for {} inputs",
                row.len(),
                ineq.inputs[p]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BellResult {
    pub value: f64,
    #[serde(skip)]
    pub assignment: MeasurementAssignment,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// An effective operator vanished and was replaced by `+1`.
    pub zero_effective: bool,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
}

/// Maximize the functional over norm-one observables on `regions` by see-saw.
pub fn optimize(
    state: &QuantumState,
    ineq: &BellInequality,
    regions: &[Region],
    opts: &SeesawOptions,
) -> Result<BellResult> {
    if regions.len() != ineq.n {
        return Err(Error::Arity(format!(
            "{} regions for a {}-party inequality",
            regions.len(),
            ineq.n
        )));
    }
    for r in regions {
        if r.is_empty() {
            return Err(Error::InvalidRegion("empty region".into()));
        }
        if r.max_site() >= state.n_sites() {
            return Err(Error::InvalidRegion(format!(
                "region {r} outside the state"
            )));
        }
    }
    ensure_disjoint(regions)?;
    let marg = PartyMarginal::new(state, regions)?;
    let poly = ineq.polynomial()?;
    let out = seesaw::maximize(&marg, &poly, opts)?;
    let observables = out
        .best
        .assignment
        .into_iter()
        .zip(regions)
        .map(|(row, r)| {
            row.into_iter()
                .map(|m| Observable::new_unchecked(m, r.clone(), 1.0))
                .collect()
        })
        .collect();
    let assignment = MeasurementAssignment::new(observables)?;
    debug_assert!(out.best.value <= ineq.eta() + 1e-9);
    Ok(BellResult {
        value: out.best.value,
        assignment,
        iterations: out.best.iterations,
        restarts_used: opts.restarts,
        converged: out.best.converged,
        zero_effective: out.best.zero_effective,
        best_restart: out.best_restart,
        restart_values: out.restart_values,
    })
}

/// Re-evaluate an assignment on the reduced state, bypassing per-term traces.
pub fn evaluate_fast(
    state: &QuantumState,
    ineq: &BellInequality,
    asg: &MeasurementAssignment,
) -> Result<f64> {
    check_assignment(ineq, asg)?;
    let marg = PartyMarginal::new(state, asg.regions())?;
    seesaw::evaluate(&marg, &ineq.polynomial()?, &asg.matrices())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSums {
    /// `Σ|ψ|`.
    pub eta: f64,
    /// `Σ (s−2)|ψ|`, strata with `s < 2` weighted zero.
    pub gamma: f64,
    /// `Σ|ψ|` over the same strata as the bipartition bound.
    pub gamma_hat: f64,
    /// `Σ α|ψ|`, `α = Σ_{i=1}^{s−2} Π_{j=i}^{s} |X_j|` over the term's parties.
    pub mu: f64,
    /// `Σ ξ|ψ|`, `ξ = Π|X_j|` over the term's parties.
    pub mu_hat: f64,
}

pub fn coefficient_sums(ineq: &BellInequality, region_sizes: &[usize]) -> Result<CoefficientSums> {
    if region_sizes.len() != ineq.n {
        return Err(Error::Arity(format!(
            "{} region sizes for {} parties",
            region_sizes.len(),
            ineq.n
        )));
    }
    let mut sums = CoefficientSums {
        eta: 0.0,
        gamma: 0.0,
        gamma_hat: 0.0,
        mu: 0.0,
        mu_hat: 0.0,
    };
    for t in &ineq.terms {
        let a = t.coeff.abs();
        let s = t.parties.len();
        let sizes: Vec<f64> = t.parties.iter().map(|&p| region_sizes[p] as f64).collect();
        let alpha: f64 = (0..s.saturating_sub(2))
            .map(|i| sizes[i..].iter().product::<f64>())
            .sum();
        let xi: f64 = sizes.iter().product();
        sums.eta += a;
        sums.gamma += s.saturating_sub(2) as f64 * a;
        sums.gamma_hat += a;
        sums.mu += alpha * a;
        sums.mu_hat += xi * a;
    }
    Ok(sums)
}
