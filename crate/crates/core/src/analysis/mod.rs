//! Separation sweeps, decay fits, empirical ε and certification.

mod epsilon;
mod fit;

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use epsilon::{
    epsilon_bound, tau_star, EpsilonReport, EpsilonVariant, StateFamily, DEFAULT_DELTA,
};
pub use fit::{fit_decay, fit_light_cone, DecayFit, LightConeFit, Normalization, DEFECT_FLOOR};

use crate::bell::{self, BellInequality};
use crate::correlators::{self, max_defect, Partition};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Region};
use crate::operators::{Observable, Pauli};
use crate::seesaw::{derive_seed, SeesawOptions};
use crate::states::{EigenSystem, QuantumState, SpectralData};

/// Largest `τ` for which `parties` runs of `width` sites fit on a line of `len` sites.
pub fn max_feasible_tau(len: usize, parties: usize, width: usize) -> usize {
    if parties < 2 || width == 0 || parties * width > len {
        return 0;
    }
    (len - width) / (parties - 1) + 1 - width
}

/// Leftmost packing: the first region starts at site 1, each later region
/// starts `τ` sites beyond the end of the previous one. On grids the regions
/// run along the first row.
pub fn leftmost_regions(
    lat: &Lattice,
    parties: usize,
    width: usize,
    tau: usize,
) -> Result<Vec<Region>> {
    if parties == 0 || width == 0 {
        return Err(Error::Schedule(
            "need at least one party of positive width".into(),
        ));
    }
    let line = *lat.dims().last().expect("lattice has a dimension");
    let max = max_feasible_tau(line, parties, width);
    if tau == 0 || (parties > 1 && tau > max) {
        return Err(Error::Schedule(format!(
            "τ = {tau} cannot be realized by {parties} regions of width {width} on a line of {line} sites; max feasible τ is {max}"
        )));
    }
    if parties == 1 && width > line {
        return Err(Error::Schedule(format!(
            "a region of width {width} does not fit in {line} sites"
        )));
    }
    (0..parties)
        .map(|p| {
            let start = p * (width - 1 + tau);
            lat.region(start..start + width)
        })
        .collect()
}

/// How the defect at each sweep point is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectObservables {
    /// See-saw maximum of `|joint − factored|` over norm-one observables.
    Optimized,
    /// Fixed Pauli strings, one per party, one letter per site (e.g. `"ZX"`).
    Paulis(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub parties: usize,
    pub width: usize,
    pub taus: Vec<usize>,
    pub times: Vec<f64>,
    pub partition: Partition,
    pub observables: DefectObservables,
    pub seesaw: SeesawOptions,
    /// When set, every point also records the optimized Bell value.
    pub inequality: Option<BellInequality>,
}

/// A state ready for measurement, possibly parametrized by time.
#[derive(Debug, Clone)]
pub enum Prepared {
    Static {
        state: QuantumState,
        family: StateFamily,
        spectral: Option<SpectralData>,
    },
    Evolving {
        eig: Box<EigenSystem>,
        initial: QuantumState,
        /// The time the state is certified at.
        t: f64,
    },
}

impl Prepared {
    pub fn family(&self) -> StateFamily {
        match self {
            Prepared::Static { family, .. } => *family,
            Prepared::Evolving { t, .. } => StateFamily::Evolved { t: *t },
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Prepared::Static { state, .. } => state.n_sites(),
            Prepared::Evolving { initial, .. } => initial.n_sites(),
        }
    }

    pub fn spectral(&self) -> Option<&SpectralData> {
        match self {
            Prepared::Static { spectral, .. } => spectral.as_ref(),
            Prepared::Evolving { .. } => None,
        }
    }

    /// The state at time `t`; static states only exist at `t = 0`.
    pub fn at(&self, t: f64) -> Result<Cow<'_, QuantumState>> {
        match self {
            Prepared::Static { state, .. } => {
                if t != 0.0 {
                    return Err(Error::Config(format!(
                        "a static state has no time dependence (t = {t})"
                    )));
                }
                Ok(Cow::Borrowed(state))
            }
            Prepared::Evolving { eig, initial, .. } => Ok(Cow::Owned(eig.evolve(initial, t)?)),
        }
    }

    /// The state being certified.
    pub fn target(&self) -> Result<Cow<'_, QuantumState>> {
        match self {
            Prepared::Static { state, .. } => Ok(Cow::Borrowed(state)),
            Prepared::Evolving { t, .. } => self.at(*t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: usize,
    pub t: f64,
    pub s: usize,
    pub partition: String,
    pub joint: f64,
    pub factored: f64,
    pub defect: f64,
    pub max_region_size: usize,
    pub bell_value: Option<f64>,
    #[serde(skip)]
    pub regions: Vec<Region>,
}

fn pauli_observables(letters: &[String], regions: &[Region]) -> Result<Vec<Observable>> {
    if letters.len() != regions.len() {
        return Err(Error::Config(format!(
            "{} Pauli strings for {} regions",
            letters.len(),
            regions.len()
        )));
    }
    letters
        .iter()
        .zip(regions)
        .map(|(word, r)| {
            let ps: Option<Vec<Pauli>> = word.chars().map(Pauli::from_char).collect();
            let ps = ps.ok_or_else(|| Error::Config(format!("`{word}` is not a Pauli string")))?;
            Observable::pauli_string(&ps, r)
        })
        .collect()
}

/// Measure the defect (and optionally the Bell value) at every `(τ, t)` of
/// the plan, ordered by `τ` then `t`. Point `i` uses see-saw seed
/// `derive_seed(seed, i)`, so rows do not depend on the worker count.
pub fn sweep(prep: &Prepared, lat: &Lattice, plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    if lat.len() != prep.n_sites() {
        return Err(Error::Geometry(format!(
            "lattice has {} sites, state {}",
            lat.len(),
            prep.n_sites()
        )));
    }
    if plan.taus.is_empty() {
        return Err(Error::Schedule("empty τ schedule".into()));
    }
    let times: Vec<f64> = if plan.times.is_empty() {
        vec![0.0]
    } else {
        plan.times.clone()
    };
    if let Some(ineq) = &plan.inequality {
        if ineq.n() != plan.parties {
            return Err(Error::Arity(format!(
                "inequality has {} parties, schedule {}",
                ineq.n(),
                plan.parties
            )));
        }
    }
    let placements: Vec<Vec<Region>> = plan
        .taus
        .iter()
        .map(|&tau| leftmost_regions(lat, plan.parties, plan.width, tau))
        .collect::<Result<_>>()?;
    let states: Vec<QuantumState> = times
        .par_iter()
        .map(|&t| prep.at(t).map(Cow::into_owned))
        .collect::<Result<_>>()?;
    let points: Vec<(usize, usize)> = (0..plan.taus.len())
        .flat_map(|i| (0..times.len()).map(move |j| (i, j)))
        .collect();
    points
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let regions = &placements[i];
            let state = &states[j];
            let opts = SeesawOptions {
                seed: derive_seed(plan.seesaw.seed, idx as u64),
                ..plan.seesaw
            };
            let record = match &plan.observables {
                DefectObservables::Optimized => {
                    max_defect(state, regions, plan.partition.clone(), &opts)?.record
                }
                DefectObservables::Paulis(words) => {
                    let obs = pauli_observables(words, regions)?;
                    match &plan.partition {
                        Partition::Sequential => correlators::defect_sequential(state, &obs)?,
                        Partition::Bipartition(a) => {
                            correlators::defect_bipartition(state, &obs, a)?
                        }
                    }
                }
            };
            let bell_value = match &plan.inequality {
                Some(ineq) => {
                    let bopts = SeesawOptions {
                        seed: derive_seed(plan.seesaw.seed, (1 << 32) | idx as u64),
                        ..plan.seesaw
                    };
                    Some(bell::optimize(state, ineq, regions, &bopts)?.value)
                }
                None => None,
            };
            Ok(SweepRow {
                tau: plan.taus[i],
                t: times[j],
                s: regions.len(),
                partition: record.partition.label(regions.len()),
                joint: record.joint,
                factored: record.factored,
                defect: record.defect,
                max_region_size: record.max_region_size(),
                bell_value,
                regions: regions.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// The lowest level is degenerate, so the ground-state clustering premise fails.
    pub gap_degenerate: bool,
    /// Decay was not established at the requested β.
    pub beta_star_unknown: bool,
    /// No usable fit; ε was set to zero.
    pub no_valid_fit: bool,
    /// The see-saw met a vanishing effective operator.
    pub zero_effective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub engine_version: String,
    pub seed: u64,
    pub inequality: String,
    /// 1-based site numbers per region.
    pub regions: Vec<Vec<usize>>,
    pub tau: usize,
    pub family: StateFamily,
    pub delta_loc: f64,
    pub value: f64,
    pub fit: Option<DecayFit>,
    /// The other normalization, when regions have more than one site.
    pub fit_alternate: Option<DecayFit>,
    pub light_cone: Option<LightConeFit>,
    pub fit_error: Option<String>,
    pub epsilon: Option<EpsilonReport>,
    pub epsilon_min: f64,
    pub epsilon_variant: String,
    pub tau_star: Option<f64>,
    pub gap: Option<f64>,
    pub epsilon_local: bool,
    pub flags: HypothesisFlags,
    pub note: String,
}

impl CertificationReport {
    /// `S ≤ Δ_loc + ε_min` from the stored fields.
    pub fn recompute_verdict(&self) -> bool {
        self.value <= self.delta_loc + self.epsilon_min
    }
}

pub struct CertifyRequest<'a> {
    pub prepared: &'a Prepared,
    pub lattice: &'a Lattice,
    pub inequality: &'a BellInequality,
    pub regions: Vec<Region>,
    /// Schedule used to fit the decay constants.
    pub plan: SweepPlan,
    pub delta: f64,
    pub seed: u64,
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(Error::at(stage))
}

fn soft_fit<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::InsufficientData(_) | Error::NoDecay(_))) => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Sweep, fit, optimize at the requested regions, and compare with `Δ_loc + ε`.
pub fn certify(req: CertifyRequest<'_>) -> Result<CertificationReport> {
    let ineq = req.inequality;
    let lat = req.lattice;
    if req.regions.len() != ineq.n() {
        return Err(Error::Arity(format!(
            "{} regions for a {}-party inequality",
            req.regions.len(),
            ineq.n()
        )));
    }
    let tau = staged("regions", lat.min_separation(&req.regions))?;
    let family = req.prepared.family();
    let sizes: Vec<usize> = req.regions.iter().map(Region::len).collect();

    let rows = staged("sweep", sweep(req.prepared, lat, &req.plan))?;
    let (mut fit, mut fit_alternate, mut light_cone, mut fit_error) = (None, None, None, None);
    match family {
        StateFamily::Evolved { .. } => {
            let pts: Vec<(f64, f64, f64)> =
                rows.iter().map(|r| (r.tau as f64, r.t, r.defect)).collect();
            match staged("fit", soft_fit(fit_light_cone(&pts)))? {
                Ok(lc) => light_cone = Some(lc),
                Err(msg) => fit_error = Some(msg),
            }
        }
        _ => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau as f64, r.defect)).collect();
            let sweep_region = rows.iter().map(|r| r.max_region_size).max().unwrap_or(1);
            let (primary, other) = match family {
                StateFamily::Gibbs { .. } => (Normalization::Raw, Normalization::PerMaxregion),
                _ => (Normalization::PerMaxregion, Normalization::Raw),
            };
            match staged("fit", soft_fit(fit_decay(&pts, primary, sweep_region)))? {
                Ok(f) => fit = Some(f),
                Err(msg) => fit_error = Some(msg),
            }
            if sweep_region > 1 {
                fit_alternate = staged("fit", soft_fit(fit_decay(&pts, other, sweep_region)))?.ok();
            }
        }
    }

    let target = staged("state", req.prepared.target())?;
    let opts = SeesawOptions {
        seed: derive_seed(req.seed, u64::MAX - 1),
        ..req.plan.seesaw
    };
    let bell = staged("bell", bell::optimize(&target, ineq, &req.regions, &opts))?;
    let delta_loc = match ineq.delta_loc() {
        Some(d) => d,
        None => staged("bound", bell::biseparable_bound(ineq))?,
    };
    let sums = bell::coefficient_sums(ineq, &sizes)?;
    let no_valid_fit = fit.is_none() && light_cone.is_none();
    let epsilon = if no_valid_fit {
        None
    } else {
        Some(staged(
            "epsilon",
            epsilon_bound(
                family,
                fit.as_ref(),
                light_cone.as_ref(),
                &sums,
                &sizes,
                tau as f64,
            ),
        )?)
    };
    let (epsilon_min, epsilon_variant) = match &epsilon {
        Some(e) => (e.min, e.min_label.clone()),
        None => (0.0, "none".to_string()),
    };
    let tau_star = match (&family, &fit) {
        (StateFamily::Gibbs { .. }, Some(f)) => tau_star(f, req.delta, sums.eta).ok(),
        _ => None,
    };
    let decays = fit.as_ref().is_some_and(|f| f.kappa_est > 0.0);
    let spectral = req.prepared.spectral();
    let flags = HypothesisFlags {
        gap_degenerate: matches!(family, StateFamily::Ground)
            && spectral.is_some_and(|s| s.degenerate),
        beta_star_unknown: matches!(family, StateFamily::Gibbs { .. }) && !decays,
        no_valid_fit,
        zero_effective: bell.zero_effective,
    };
    let mut report = CertificationReport {
        engine_version: crate::ENGINE_VERSION.to_string(),
        seed: req.seed,
        inequality: ineq.name().to_string(),
        regions: req.regions.iter().map(Region::numbers).collect(),
        tau,
        family,
        delta_loc,
        value: bell.value,
        fit,
        fit_alternate,
        light_cone,
        fit_error,
        epsilon,
        epsilon_min,
        epsilon_variant,
        tau_star,
        gap: spectral.map(|s| s.gap),
        epsilon_local: false,
        flags,
        note: "ε is empirical: computed from constants fitted to the sweep, not proven bounds"
            .into(),
    };
    report.epsilon_local = report.recompute_verdict();
    Ok(report)
}
