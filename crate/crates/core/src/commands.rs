//! The pipeline stages behind each subcommand.
//!
//! Every command returns the text it would print and the exit code; the
//! binary only parses flags, sizes the worker pool and prints.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{
    self, fit_decay, fit_light_cone, CertifyRequest, DecayFit, LightConeFit, Normalization,
};
use crate::bell::{self, BellInequality};
use crate::config::{ExperimentConfig, InequalitySpec};
use crate::error::{Error, Result};
use crate::io::{self, CsvRow};
use crate::lattice::{Lattice, Region};
use crate::states::SpectralData;

/// Exit code for a certified-local verdict.
pub const EXIT_LOCAL: i32 = 0;
/// Exit code for a detected violation.
pub const EXIT_VIOLATION: i32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Replaces the config's `seed`.
    pub seed: Option<u64>,
    pub dump_state: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Printed to standard output; empty when the artifact went to a file.
    pub stdout: String,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    fn new(exit_code: i32) -> Self {
        Self {
            exit_code,
            stdout: String::new(),
            written: Vec::new(),
        }
    }

    /// Sends `text` to `dest` when given, otherwise to standard output.
    fn emit(&mut self, text: String, dest: Option<PathBuf>) -> Result<()> {
        match dest {
            Some(p) => {
                std::fs::write(&p, text)?;
                self.written.push(p);
            }
            None => self.stdout = text,
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn destination(opts: &RunOptions, configured: Option<&String>) -> Option<PathBuf> {
    opts.out.clone().or_else(|| configured.map(PathBuf::from))
}

/// `<out stem>.state.bin`, or `spinbell-state.bin` without `--out`.
fn dump_path(opts: &RunOptions, suffix: &str) -> PathBuf {
    match &opts.out {
        Some(p) => p.with_extension(format!("{suffix}.bin")),
        None => PathBuf::from(format!("spinbell-{suffix}.bin")),
    }
}

struct Loaded {
    cfg: ExperimentConfig,
    lattice: Lattice,
    prepared: analysis::Prepared,
    seed: u64,
}

fn load(config: &Path, opts: &RunOptions) -> Result<Loaded> {
    let cfg = ExperimentConfig::load(config)?;
    let lattice = cfg.lattice()?;
    let h = cfg.hamiltonian(&lattice)?;
    let prepared = cfg
        .prepare(&lattice, h.as_ref())
        .map_err(Error::at("state"))?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    Ok(Loaded {
        cfg,
        lattice,
        prepared,
        seed,
    })
}

fn dump_target(loaded: &Loaded, opts: &RunOptions, out: &mut Outcome) -> Result<()> {
    if opts.dump_state {
        let bin = dump_path(opts, "state");
        let side = io::write_state(&bin, &*loaded.prepared.target()?, &loaded.lattice)?;
        out.written.extend([bin, side]);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    ground_energy: f64,
    gap: f64,
    degenerate: bool,
    head: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct BuildSummary {
    lattice: String,
    sites: usize,
    dimension: usize,
    hamiltonian: Option<HamiltonianSummary>,
    state: String,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct HamiltonianSummary {
    bonds: usize,
    field_terms: usize,
    pauli_terms: usize,
    hermitian: bool,
    parity_conserving: bool,
    spectrum: Option<SpectrumSummary>,
}

const SPECTRUM_HEAD: usize = 8;

fn summarize_spectrum(s: SpectralData, full: bool) -> SpectrumSummary {
    let mut head = s.eigenvalues;
    if !full {
        head.truncate(SPECTRUM_HEAD);
    }
    SpectrumSummary {
        ground_energy: s.ground_energy,
        gap: s.gap,
        degenerate: s.degenerate,
        head,
    }
}

/// Lattice and Hamiltonian summary as JSON.
pub fn cmd_build(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let cfg = ExperimentConfig::load(config)?;
    let lattice = cfg.lattice()?;
    let built = cfg.hamiltonian(&lattice)?;
    let mut warnings = Vec::new();
    let hamiltonian = match &built {
        Some(b) => {
            if b.all_to_all {
                warnings.push(format!(
                    "interaction range exceeds the lattice diameter {}; every pair interacts",
                    lattice.diameter()
                ));
            }
            let spectrum = cfg.spectrum(&b.operator)?;
            let full = matches!(cfg.spectrum, crate::config::SpectrumMode::Full);
            Some(HamiltonianSummary {
                bonds: b.bonds,
                field_terms: b.field_terms,
                pauli_terms: b.operator.terms().map_or(0, <[_]>::len),
                hermitian: b.operator.is_hermitian(),
                parity_conserving: b.operator.conserves_parity(),
                spectrum: spectrum.map(|s| summarize_spectrum(s, full)),
            })
        }
        None => None,
    };
    let summary = BuildSummary {
        lattice: lattice.describe(),
        sites: lattice.len(),
        dimension: 1 << lattice.len(),
        hamiltonian,
        state: serde_json::to_value(&cfg.state)?["kind"]
            .as_str()
            .unwrap_or("")
            .to_string(),
        warnings,
    };
    let mut out = Outcome::new(0);
    if opts.dump_state {
        let prepared = cfg
            .prepare(&lattice, built.as_ref())
            .map_err(Error::at("state"))?;
        let bin = dump_path(opts, "state");
        let side = io::write_state(&bin, &*prepared.target()?, &lattice)?;
        out.written.extend([bin, side]);
    }
    out.emit(to_json(&summary)?, opts.out.clone())?;
    Ok(out)
}

/// Defect sweep over the schedule, written as CSV.
pub fn cmd_sweep(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = load(config, opts)?;
    let plan = loaded.cfg.sweep_plan(loaded.seed)?;
    let rows =
        analysis::sweep(&loaded.prepared, &loaded.lattice, &plan).map_err(Error::at("sweep"))?;
    let csv_rows: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    let mut out = Outcome::new(0);
    dump_target(&loaded, opts, &mut out)?;
    out.emit(
        io::csv_string(&csv_rows)?,
        destination(opts, loaded.cfg.output.csv.as_ref()),
    )?;
    Ok(out)
}

/// Certification report; exit 1 when the Bell value exceeds `Δ_loc + ε`.
pub fn cmd_certify(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = load(config, opts)?;
    let ineq = loaded.cfg.inequality()?;
    let regions = loaded.cfg.target_regions(&loaded.lattice)?;
    let plan = loaded.cfg.sweep_plan(loaded.seed)?;
    let report = analysis::certify(CertifyRequest {
        prepared: &loaded.prepared,
        lattice: &loaded.lattice,
        inequality: &ineq,
        regions,
        plan,
        delta: loaded.cfg.certify.delta,
        seed: loaded.seed,
    })?;
    let code = if report.epsilon_local {
        EXIT_LOCAL
    } else {
        EXIT_VIOLATION
    };
    let mut out = Outcome::new(code);
    dump_target(&loaded, opts, &mut out)?;
    out.emit(
        to_json(&report)?,
        destination(opts, loaded.cfg.output.report.as_ref()),
    )?;
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    /// Defaults to per-maximum-region-size scaling.
    pub normalization: Option<Normalization>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitOutput {
    Decay(DecayFit),
    LightCone(LightConeFit),
}

/// Decay fit of a sweep CSV; the light-cone form when both `τ` and `t` vary.
pub fn fit_rows(rows: &[CsvRow], fopts: &FitOptions) -> Result<FitOutput> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("the CSV has no rows".into()));
    }
    let taus: BTreeSet<usize> = rows.iter().map(|r| r.tau).collect();
    let times: BTreeSet<u64> = rows.iter().map(|r| r.t.to_bits()).collect();
    if taus.len() > 1 && times.len() > 1 {
        let pts: Vec<(f64, f64, f64)> =
            rows.iter().map(|r| (r.tau as f64, r.t, r.defect)).collect();
        return Ok(FitOutput::LightCone(fit_light_cone(&pts)?));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau as f64, r.defect)).collect();
    let max_region = rows.iter().map(|r| r.max_region_size).max().unwrap_or(1);
    let norm = fopts.normalization.unwrap_or(Normalization::PerMaxregion);
    Ok(FitOutput::Decay(fit_decay(&pts, norm, max_region)?))
}

pub fn cmd_fit(csv: &Path, fopts: &FitOptions, opts: &RunOptions) -> Result<Outcome> {
    let rows = io::read_csv_file(csv)?;
    let fit = fit_rows(&rows, fopts)?;
    let mut out = Outcome::new(0);
    out.emit(to_json(&fit)?, opts.out.clone())?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BoundSummary {
    inequality: String,
    parties: usize,
    biseparable_bound: f64,
    catalog_delta_loc: Option<f64>,
}

/// The inequality from an experiment config, or from a file holding only
/// an inequality.
fn load_inequality(path: &Path) -> Result<BellInequality> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("lattice").is_some() {
        return ExperimentConfig::from_json_str(&text)?.inequality();
    }
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: InequalitySpec =
        serde_path_to_error::deserialize(de).map_err(Error::from_path_error)?;
    spec.build()
}

/// Biseparable bound by enumeration.
pub fn cmd_bound(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let ineq = load_inequality(config)?;
    let bound = bell::biseparable_bound(&ineq)?;
    let summary = BoundSummary {
        inequality: ineq.name().to_string(),
        parties: ineq.n(),
        biseparable_bound: bound,
        catalog_delta_loc: ineq.delta_loc(),
    };
    let mut out = Outcome::new(0);
    out.emit(to_json(&summary)?, opts.out.clone())?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BellSummary {
    inequality: String,
    regions: Vec<Vec<usize>>,
    seed: u64,
    #[serde(flatten)]
    result: bell::BellResult,
}

/// One see-saw optimization at the configured regions.
pub fn cmd_bell(config: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = load(config, opts)?;
    let ineq = loaded.cfg.inequality()?;
    let regions = loaded.cfg.target_regions(&loaded.lattice)?;
    let state = loaded.prepared.target()?;
    let result = bell::optimize(&state, &ineq, &regions, &loaded.cfg.seesaw(loaded.seed))
        .map_err(Error::at("bell"))?;
    let mut out = Outcome::new(0);
    if opts.dump_state {
        dump_target(&loaded, opts, &mut out)?;
        let bin = dump_path(opts, "assignment");
        let side = io::write_assignment(&bin, &result.assignment)?;
        out.written.extend([bin, side]);
    }
    let summary = BellSummary {
        inequality: ineq.name().to_string(),
        regions: regions.iter().map(Region::numbers).collect(),
        seed: loaded.seed,
        result,
    };
    out.emit(to_json(&summary)?, opts.out.clone())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn build_counts_terms() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "c.json",
            r#"{"lattice": {"kind": "chain", "L": 4},
                "hamiltonian": {"family": "xy_chain", "gamma": 0.5, "fields": 1.0},
                "state": {"kind": "ground"}}"#,
        );
        let out = cmd_build(&cfg, &RunOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["sites"], 4);
        assert_eq!(v["hamiltonian"]["bonds"], 3);
        assert_eq!(v["hamiltonian"]["field_terms"], 4);
        assert_eq!(v["hamiltonian"]["hermitian"], true);
        assert_eq!(
            v["hamiltonian"]["spectrum"]["head"]
                .as_array()
                .unwrap()
                .len(),
            8
        );
    }

    #[test]
    fn fit_dispatch() {
        let mk = |tau: usize, t: f64, d: f64| CsvRow {
            tau,
            t,
            s: 3,
            partition: "seq".into(),
            joint: d,
            factored: 0.0,
            defect: d,
            max_region_size: 1,
        };
        let decay: Vec<CsvRow> = (1..=5)
            .map(|k| mk(k, 0.0, 2.0 * (-0.7 * k as f64).exp()))
            .collect();
        match fit_rows(&decay, &FitOptions::default()).unwrap() {
            FitOutput::Decay(f) => {
                assert_relative_eq!(f.kappa_est, 0.7, max_relative = 1e-10);
                assert_relative_eq!(f.r_squared, 1.0, max_relative = 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let (v, k, c) = (1.5, 0.8, 0.3);
        let grid: Vec<CsvRow> = (1..=4)
            .flat_map(|tau| {
                (1..=4).map(move |j| {
                    let t = 0.5 * j as f64;
                    mk(tau, t, c * (-k * tau as f64).exp() * (k * v * t).exp_m1())
                })
            })
            .collect();
        assert!(matches!(
            fit_rows(&grid, &FitOptions::default()).unwrap(),
            FitOutput::LightCone(_)
        ));
        let e = fit_rows(&decay[..2], &FitOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn bound_from_bare_inequality() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "i.json", r#"{"name": "svetlichny3"}"#);
        let out = cmd_bound(&p, &RunOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["biseparable_bound"], 4.0);
    }

    #[test]
    fn certify_without_inequality_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "c.json",
            r#"{"lattice": {"kind": "chain", "L": 3}, "state": {"kind": "ghz"},
                "regions": [[1], [2], [3]], "schedule": {"tau": [1]}}"#,
        );
        let e = cmd_certify(&cfg, &RunOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
