//! Sweep CSV and binary state dumps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::analysis::SweepRow;
use crate::bell::MeasurementAssignment;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Matrix, C64};
use crate::states::{QuantumState, StateData};

pub const CSV_HEADER: [&str; 8] = [
    "tau",
    "t",
    "s",
    "partition",
    "joint",
    "factored",
    "defect",
    "max_region_size",
];

/// One CSV line of a defect sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub tau: usize,
    pub t: f64,
    pub s: usize,
    pub partition: String,
    pub joint: f64,
    pub factored: f64,
    pub defect: f64,
    pub max_region_size: usize,
}

impl From<&SweepRow> for CsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            tau: r.tau,
            t: r.t,
            s: r.s,
            partition: r.partition.clone(),
            joint: r.joint,
            factored: r.factored,
            defect: r.defect,
            max_region_size: r.max_region_size,
        }
    }
}

/// Ten significant digits in scientific notation.
fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.tau.to_string(),
            sig10(r.t),
            r.s.to_string(),
            r.partition.clone(),
            sig10(r.joint),
            sig10(r.factored),
            sig10(r.defect),
            r.max_region_size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Parses a sweep CSV, rejecting any header other than the published one.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InsufficientData(format!(
            "CSV header `{}` does not match `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_HEADER.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let f = File::open(path)
        .map_err(|e| Error::InsufficientData(format!("cannot open {}: {e}", path.display())))?;
    read_csv(BufReader::new(f))
}

/// Sidecar describing a binary dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub dimension: usize,
    pub n_sites: usize,
    pub lattice: String,
    /// `pure` (a vector) or `mixed` (a row-major matrix).
    pub kind: String,
    pub shape: Vec<usize>,
    pub encoding: String,
    pub ordering: String,
}

const ENCODING: &str = "little-endian f64 (re, im) pairs";
const ORDERING: &str =
    "computational basis, site 1 is the most significant bit; matrices row-major";

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

fn write_complex<W: Write>(w: &mut W, values: impl Iterator<Item = C64>) -> Result<()> {
    for z in values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_complex(bytes: &[u8]) -> Vec<C64> {
    bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect()
}

/// Writes `bin` and its `.json` sidecar; returns the sidecar path.
pub fn write_state(bin: impl AsRef<Path>, state: &QuantumState, lat: &Lattice) -> Result<PathBuf> {
    let bin = bin.as_ref();
    let mut w = BufWriter::new(File::create(bin)?);
    let shape = match state.data() {
        StateData::Pure(v) => {
            write_complex(&mut w, v.iter().copied())?;
            vec![v.len()]
        }
        StateData::Mixed(m) => {
            write_complex(&mut w, m.iter().copied())?;
            vec![m.nrows(), m.ncols()]
        }
    };
    w.flush()?;
    let meta = StateSidecar {
        dimension: state.dim(),
        n_sites: state.n_sites(),
        lattice: lat.describe(),
        kind: state.kind().to_string(),
        shape,
        encoding: ENCODING.into(),
        ordering: ORDERING.into(),
    };
    let side = sidecar_path(bin);
    std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(side)
}

pub fn read_state(bin: impl AsRef<Path>) -> Result<QuantumState> {
    let bin = bin.as_ref();
    let meta: StateSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(bin))?)?;
    let bytes = std::fs::read(bin)?;
    let values = read_complex(&bytes);
    let expected: usize = meta.shape.iter().product();
    if values.len() != expected || bytes.len() % 16 != 0 {
        return Err(Error::Shape(format!(
            "{} holds {} bytes, expected {} complex values",
            bin.display(),
            bytes.len(),
            expected
        )));
    }
    match meta.shape.as_slice() {
        [_] => QuantumState::pure(Array1::from(values), meta.n_sites),
        &[r, c] => {
            let m =
                Array2::from_shape_vec((r, c), values).map_err(|e| Error::Shape(e.to_string()))?;
            QuantumState::mixed(m, meta.n_sites)
        }
        other => Err(Error::Shape(format!("unsupported shape {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSidecar {
    pub parties: Vec<PartyEntry>,
    pub encoding: String,
    pub ordering: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyEntry {
    /// 1-based site numbers.
    pub region: Vec<usize>,
    pub inputs: usize,
    pub dimension: usize,
}

/// Observables party-major then input-major, each a row-major matrix.
pub fn write_assignment(bin: impl AsRef<Path>, asg: &MeasurementAssignment) -> Result<PathBuf> {
    let bin = bin.as_ref();
    let mut w = BufWriter::new(File::create(bin)?);
    let mut parties = Vec::new();
    for (row, region) in asg.observables().iter().zip(asg.regions()) {
        for o in row {
            write_complex(&mut w, o.matrix().iter().copied())?;
        }
        parties.push(PartyEntry {
            region: region.numbers(),
            inputs: row.len(),
            dimension: 1 << region.len(),
        });
    }
    w.flush()?;
    let meta = AssignmentSidecar {
        parties,
        encoding: ENCODING.into(),
        ordering: "party-major, then input; each matrix row-major".into(),
    };
    let side = sidecar_path(bin);
    std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(side)
}

/// Reads the matrices back, `[party][input]`.
pub fn read_assignment(bin: impl AsRef<Path>) -> Result<Vec<Vec<Matrix>>> {
    let bin = bin.as_ref();
    let meta: AssignmentSidecar =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(bin))?)?;
    let values = read_complex(&std::fs::read(bin)?);
    let mut at = 0;
    let mut out = Vec::new();
    for p in &meta.parties {
        let d = p.dimension;
        let mut row = Vec::new();
        for _ in 0..p.inputs {
            let chunk = values
                .get(at..at + d * d)
                .ok_or_else(|| Error::Shape(format!("{} is truncated", bin.display())))?;
            row.push(
                Array2::from_shape_vec((d, d), chunk.to_vec())
                    .map_err(|e| Error::Shape(e.to_string()))?,
            );
            at += d * d;
        }
        out.push(row);
    }
    if at != values.len() {
        return Err(Error::Shape(format!("{} has trailing data", bin.display())));
    }
    Ok(out)
}
