//! JSON experiment configuration.
//!
//! Parsing is strict: unknown fields are rejected and every diagnostic
//! carries the path of the offending field (`schedule.tau[2]`).

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::analysis::{leftmost_regions, DefectObservables, Prepared, StateFamily, SweepPlan};
use crate::bell::{catalog, BellInequality, Sign};
use crate::correlators::Partition;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Region};
use crate::operators::{bloch_density, grid_hamiltonian, xy_chain_hamiltonian, Operator};
use crate::seesaw::SeesawOptions;
use crate::states::{self, EigenSystem, QuantumState, SpectralData, DENSE_CAP_DIM};

pub const DEFAULT_MAX_SITES: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    pub state: StateSpec,
    /// 1-based site numbers, one list per party.
    #[serde(default)]
    pub regions: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub defect: DefectSpec,
    #[serde(default)]
    pub inequality: Option<InequalitySpec>,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub certify: CertifySpec,
    #[serde(default)]
    pub spectrum: SpectrumMode,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Chain,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Chain(usize),
    Grid([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    #[serde(rename = "L")]
    pub extent: Extent,
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
}

fn default_max_sites() -> usize {
    DEFAULT_MAX_SITES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianFamily {
    XyChain,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fields {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl Default for Fields {
    fn default() -> Self {
        Fields::Uniform(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub family: HamiltonianFamily,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub coupling: Option<[f64; 3]>,
    #[serde(default)]
    pub fields: Fields,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    /// `all_zero`, `all_one` or `all_plus`.
    Preset(String),
    /// One Bloch vector per site.
    Bloch(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Ground,
    Gibbs { beta: f64 },
    Evolved { t: f64, initial: InitialSpec },
    Ghz,
    Product { initial: InitialSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "default_parties")]
    pub parties: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    pub tau: Vec<usize>,
    #[serde(default = "default_times")]
    pub t: Vec<f64>,
}

fn default_parties() -> usize {
    3
}

fn default_width() -> usize {
    1
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservablesSpec {
    /// `"optimized"`.
    Named(String),
    Paulis(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    #[serde(default = "default_partition")]
    pub partition: String,
    #[serde(default = "default_observables")]
    pub observables: ObservablesSpec,
}

fn default_partition() -> String {
    "seq".into()
}

fn default_observables() -> ObservablesSpec {
    ObservablesSpec::Named("optimized".into())
}

impl Default for DefectSpec {
    fn default() -> Self {
        Self {
            partition: default_partition(),
            observables: default_observables(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRef {
    pub name: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub sign: Option<Sign>,
}

/// A catalog reference, or an inline inequality (recognized by `terms`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InequalitySpec {
    Catalog(CatalogRef),
    Inline(BellInequality),
}

impl<'de> Deserialize<'de> for InequalitySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        let inline = v.as_object().is_some_and(|m| m.contains_key("terms"));
        if inline {
            serde_json::from_value(v)
                .map(InequalitySpec::Inline)
                .map_err(D::Error::custom)
        } else {
            serde_json::from_value(v)
                .map(InequalitySpec::Catalog)
                .map_err(D::Error::custom)
        }
    }
}

impl InequalitySpec {
    pub fn build(&self) -> Result<BellInequality> {
        match self {
            InequalitySpec::Catalog(c) => catalog(&c.name, c.n, c.sign),
            InequalitySpec::Inline(b) => Ok(b.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_restarts() -> usize {
    SeesawOptions::default().restarts
}

fn default_tol() -> f64 {
    SeesawOptions::default().tol
}

fn default_max_iter() -> usize {
    SeesawOptions::default().max_iter
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            restarts: default_restarts(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Separation of the certified regions when `regions` is not given.
    #[serde(default)]
    pub tau: Option<usize>,
}

fn default_delta() -> f64 {
    crate::analysis::DEFAULT_DELTA
}

impl Default for CertifySpec {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            tau: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    None,
    #[default]
    Head,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
}

/// A Hamiltonian together with its bookkeeping for summaries.
#[derive(Debug, Clone)]
pub struct BuiltHamiltonian {
    pub operator: Operator,
    pub bonds: usize,
    pub field_terms: usize,
    pub all_to_all: bool,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(Error::from_path_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Checks that need more than one field.
    fn validate(&self) -> Result<()> {
        match (&self.lattice.kind, &self.lattice.extent) {
            (LatticeKind::Chain, Extent::Chain(_)) | (LatticeKind::Grid, Extent::Grid(_)) => {}
            (LatticeKind::Chain, Extent::Grid(_)) => {
                return Err(Error::Config(
                    "lattice.L: a chain takes a single length".into(),
                ))
            }
            (LatticeKind::Grid, Extent::Chain(_)) => {
                return Err(Error::Config("lattice.L: a grid takes [L1, L2]".into()))
            }
        }
        let needs_h = matches!(
            self.state,
            StateSpec::Ground | StateSpec::Gibbs { .. } | StateSpec::Evolved { .. }
        );
        if needs_h && self.hamiltonian.is_none() {
            return Err(Error::Config(
                "state: this kind needs a `hamiltonian` section".into(),
            ));
        }
        if let Some(h) = &self.hamiltonian {
            match h.family {
                HamiltonianFamily::XyChain => {
                    if h.gamma.is_none() {
                        return Err(Error::Config(
                            "hamiltonian.gamma: required for xy_chain".into(),
                        ));
                    }
                    if h.k.is_some() || h.coupling.is_some() {
                        return Err(Error::Config(
                            "hamiltonian: `k` and `coupling` belong to the grid family".into(),
                        ));
                    }
                }
                HamiltonianFamily::Grid => {
                    if h.k.is_none() || h.coupling.is_none() {
                        return Err(Error::Config(
                            "hamiltonian: the grid family needs `k` and `coupling`".into(),
                        ));
                    }
                    if h.gamma.is_some() {
                        return Err(Error::Config(
                            "hamiltonian.gamma: belongs to the xy_chain family".into(),
                        ));
                    }
                }
            }
        }
        if let ObservablesSpec::Named(name) = &self.defect.observables {
            if name != "optimized" {
                return Err(Error::Config(format!(
                    "defect.observables: expected \"optimized\" or a list of Pauli strings, got \"{name}\""
                )));
            }
        }
        if self.optimizer.restarts == 0 {
            return Err(Error::Config(
                "optimizer.restarts: must be at least 1".into(),
            ));
        }
        if let Some(s) = &self.schedule {
            if s.tau.is_empty() {
                return Err(Error::Config("schedule.tau: must not be empty".into()));
            }
            if s.t.is_empty() {
                return Err(Error::Config("schedule.t: must not be empty".into()));
            }
            if let Some(t) = s.t.iter().find(|t| !t.is_finite()) {
                return Err(Error::Config(format!("schedule.t: {t} is not finite")));
            }
        }
        Ok(())
    }

    /// The lattice, refused with a resource error above `max_sites`.
    pub fn lattice(&self) -> Result<Lattice> {
        let lat = match self.lattice.extent {
            Extent::Chain(l) => Lattice::chain(l),
            Extent::Grid([a, b]) => Lattice::grid(a, b),
        };
        let sites = match self.lattice.extent {
            Extent::Chain(l) => l,
            Extent::Grid([a, b]) => a.saturating_mul(b),
        };
        if sites > self.lattice.max_sites {
            return Err(Error::Resource(format!(
                "{sites} sites exceed the configured maximum of {}",
                self.lattice.max_sites
            )));
        }
        lat
    }

    pub fn hamiltonian(&self, lat: &Lattice) -> Result<Option<BuiltHamiltonian>> {
        let Some(h) = &self.hamiltonian else {
            return Ok(None);
        };
        let n = lat.len();
        let fields = match &h.fields {
            Fields::Uniform(c) => vec![*c; n],
            Fields::PerSite(v) => v.clone(),
        };
        let field_terms = fields.len();
        let built = match h.family {
            HamiltonianFamily::XyChain => BuiltHamiltonian {
                operator: xy_chain_hamiltonian(lat, h.gamma.unwrap_or(0.0), &fields)?,
                bonds: n.saturating_sub(1),
                field_terms,
                all_to_all: false,
            },
            HamiltonianFamily::Grid => {
                let g = grid_hamiltonian(
                    lat,
                    h.k.unwrap_or(1),
                    h.coupling.unwrap_or([0.0; 3]),
                    &fields,
                )?;
                BuiltHamiltonian {
                    operator: g.operator,
                    bonds: g.bonds,
                    field_terms,
                    all_to_all: g.all_to_all,
                }
            }
        };
        Ok(Some(built))
    }

    fn initial_state(spec: &InitialSpec, n: usize) -> Result<QuantumState> {
        let blochs: Vec<[f64; 3]> = match spec {
            InitialSpec::Preset(name) => {
                let r = match name.as_str() {
                    "all_zero" => [0.0, 0.0, 1.0],
                    "all_one" => [0.0, 0.0, -1.0],
                    "all_plus" => [1.0, 0.0, 0.0],
                    other => return Err(Error::Config(format!(
                        "state.initial: unknown preset \"{other}\" (all_zero, all_one, all_plus)"
                    ))),
                };
                vec![r; n]
            }
            InitialSpec::Bloch(v) => {
                if v.len() != n {
                    return Err(Error::Config(format!(
                        "state.initial: {} Bloch vectors for {n} sites",
                        v.len()
                    )));
                }
                if let Some(i) = v
                    .iter()
                    .position(|r| r.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-12)
                {
                    return Err(Error::Config(format!(
                        "state.initial[{i}]: Bloch vector longer than 1"
                    )));
                }
                v.clone()
            }
        };
        let locals: Vec<_> = blochs.into_iter().map(bloch_density).collect();
        states::product_state(&locals)
    }

    pub fn prepare(&self, lat: &Lattice, h: Option<&BuiltHamiltonian>) -> Result<Prepared> {
        let n = lat.len();
        let need_h = || {
            h.map(|b| &b.operator)
                .ok_or_else(|| Error::Config("state: needs a hamiltonian".into()))
        };
        Ok(match &self.state {
            StateSpec::Ground => {
                let (state, spectral) = states::ground_state(need_h()?)?;
                Prepared::Static {
                    state,
                    family: StateFamily::Ground,
                    spectral: Some(spectral),
                }
            }
            StateSpec::Gibbs { beta } => {
                let op = need_h()?;
                let state = states::gibbs_state(op, *beta)?;
                Prepared::Static {
                    state,
                    family: StateFamily::Gibbs { beta: *beta },
                    spectral: None,
                }
            }
            StateSpec::Evolved { t, initial } => {
                if !t.is_finite() {
                    return Err(Error::Config(format!("state.t: {t} is not finite")));
                }
                let eig = EigenSystem::new(need_h()?)?;
                Prepared::Evolving {
                    eig: Box::new(eig),
                    initial: Self::initial_state(initial, n)?,
                    t: *t,
                }
            }
            StateSpec::Ghz => Prepared::Static {
                state: QuantumState::ghz(n),
                family: StateFamily::Other,
                spectral: None,
            },
            StateSpec::Product { initial } => Prepared::Static {
                state: Self::initial_state(initial, n)?,
                family: StateFamily::Other,
                spectral: None,
            },
        })
    }

    /// Spectrum for the build summary, following `spectrum`.
    pub fn spectrum(&self, h: &Operator) -> Result<Option<SpectralData>> {
        let dim = 1usize.checked_shl(h.n_sites() as u32).unwrap_or(usize::MAX);
        match self.spectrum {
            SpectrumMode::None => Ok(None),
            SpectrumMode::Head if dim > DENSE_CAP_DIM => Ok(None),
            SpectrumMode::Head => states::spectrum(h).map(Some),
            SpectrumMode::Full if dim > DENSE_CAP_DIM => Err(Error::Resource(format!(
                "a full spectrum of dimension {dim} exceeds the dense cap {DENSE_CAP_DIM}"
            ))),
            SpectrumMode::Full => states::spectrum(h).map(Some),
        }
    }

    pub fn inequality(&self) -> Result<BellInequality> {
        self.inequality
            .as_ref()
            .ok_or_else(|| {
                Error::Config("inequality: missing; give a catalog `name` or inline `terms`".into())
            })?
            .build()
    }

    pub fn seesaw(&self, seed: u64) -> SeesawOptions {
        SeesawOptions {
            restarts: self.optimizer.restarts,
            seed,
            max_iter: self.optimizer.max_iter,
            tol: self.optimizer.tol,
        }
    }

    pub fn sweep_plan(&self, seed: u64) -> Result<SweepPlan> {
        let s = self.schedule.as_ref().ok_or_else(|| {
            Error::Config("schedule: missing; sweeps need `tau` (and optionally `t`)".into())
        })?;
        let partition = Partition::parse(&self.defect.partition, s.parties)?;
        let observables = match &self.defect.observables {
            ObservablesSpec::Named(_) => DefectObservables::Optimized,
            ObservablesSpec::Paulis(p) => DefectObservables::Paulis(p.clone()),
        };
        Ok(SweepPlan {
            parties: s.parties,
            width: s.width,
            taus: s.tau.clone(),
            times: s.t.clone(),
            partition,
            observables,
            seesaw: self.seesaw(seed),
            inequality: None,
        })
    }

    /// Regions to measure: explicit `regions`, or leftmost packing at
    /// `certify.tau` with the schedule's party count and width.
    pub fn target_regions(&self, lat: &Lattice) -> Result<Vec<Region>> {
        if let Some(r) = &self.regions {
            return r.iter().map(|nums| lat.region_from_numbers(nums)).collect();
        }
        let tau = self.certify.tau.ok_or_else(|| {
            Error::Config("regions: missing; give `regions` or `certify.tau`".into())
        })?;
        let (parties, width) = match &self.schedule {
            Some(s) => (s.parties, s.width),
            None => (self.inequality()?.n(), 1),
        };
        leftmost_regions(lat, parties, width, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XY4: &str = r#"{
        "lattice": {"kind": "chain", "L": 4},
        "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
        "state": {"kind": "ground"}
    }"#;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::from_json_str(XY4).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.lattice.max_sites, DEFAULT_MAX_SITES);
        let lat = cfg.lattice().unwrap();
        let h = cfg.hamiltonian(&lat).unwrap().unwrap();
        assert_eq!((h.bonds, h.field_terms), (3, 4));
        assert_eq!(h.operator.terms().unwrap().len(), 10);
        assert!(matches!(
            cfg.prepare(&lat, Some(&h)).unwrap(),
            Prepared::Static { .. }
        ));
    }

    #[test]
    fn unknown_field_has_path() {
        let bad = XY4.replace("\"gamma\"", "\"gama\"");
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Json { path, message }) => {
                assert_eq!(path, "hamiltonian.gama");
                assert!(message.contains("gama"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_path() {
        let bad = XY4.replace(
            "\"state\": {\"kind\": \"ground\"}",
            "\"state\": {\"kind\": \"ground\"}, \"schedule\": {\"tau\": [1, \"two\"]}",
        );
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Json { path, .. }) => assert_eq!(path, "schedule.tau[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oversized_lattice_is_resource() {
        let big = XY4.replace("\"L\": 4", "\"L\": 30");
        let cfg = ExperimentConfig::from_json_str(&big).unwrap();
        let e = cfg.lattice().unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn inequality_forms() {
        let cat: InequalitySpec =
            serde_json::from_str(r#"{"name": "seevinck_svetlichny", "n": 4, "sign": "minus"}"#)
                .unwrap();
        assert_eq!(cat.build().unwrap().name(), "seevinck_svetlichny4-");
        let inline: InequalitySpec = serde_json::from_str(
            r#"{"name": "chsh", "n": 2, "inputs": 2, "terms": [
                {"parties": [0, 1], "inputs": [0, 0], "coeff": 1},
                {"parties": [0, 1], "inputs": [0, 1], "coeff": 1},
                {"parties": [0, 1], "inputs": [1, 0], "coeff": 1},
                {"parties": [0, 1], "inputs": [1, 1], "coeff": -1}]}"#,
        )
        .unwrap();
        assert_eq!(inline.build().unwrap().n(), 2);
        assert!(serde_json::from_str::<InequalitySpec>(r#"{"n": 3}"#).is_err());
    }

    #[test]
    fn state_kinds() {
        let evolved = XY4.replace(
            "{\"kind\": \"ground\"}",
            "{\"kind\": \"evolved\", \"t\": 0.5, \"initial\": \"all_zero\"}",
        );
        let cfg = ExperimentConfig::from_json_str(&evolved).unwrap();
        let lat = cfg.lattice().unwrap();
        let h = cfg.hamiltonian(&lat).unwrap();
        let prep = cfg.prepare(&lat, h.as_ref()).unwrap();
        assert_eq!(prep.family(), StateFamily::Evolved { t: 0.5 });
        let bad = XY4.replace("{\"kind\": \"ground\"}", "{\"kind\": \"gibbs\"}");
        assert!(ExperimentConfig::from_json_str(&bad).is_err());
        let no_h = r#"{"lattice": {"kind": "chain", "L": 3}, "state": {"kind": "ground"}}"#;
        assert!(matches!(
            ExperimentConfig::from_json_str(no_h),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn regions_from_certify_tau() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"lattice": {"kind": "chain", "L": 7}, "state": {"kind": "ghz"},
                "schedule": {"tau": [1, 2]}, "certify": {"tau": 3}}"#,
        )
        .unwrap();
        let lat = cfg.lattice().unwrap();
        let r = cfg.target_regions(&lat).unwrap();
        let nums: Vec<Vec<usize>> = r.iter().map(Region::numbers).collect();
        assert_eq!(nums, vec![vec![1], vec![4], vec![7]]);
    }
}
