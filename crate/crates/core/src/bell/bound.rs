use rayon::prelude::*;
use serde::Serialize;

use super::BellInequality;
use crate::error::{Error, Result};

pub const ENUMERATION_MAX_PARTIES: usize = 4;
pub const ENUMERATION_MAX_INPUTS: usize = 2;

/// Split of the parties into two nonempty blocks; `first` holds party 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Bipartition {
    /// `AB|C` style label.
    pub fn label(&self) -> String {
        let name = |p: &usize| {
            if *p < 26 {
                ((b'A' + *p as u8) as char).to_string()
            } else {
                format!("P{}", p + 1)
            }
        };
        let a: String = self.first.iter().map(name).collect();
        let b: String = self.second.iter().map(name).collect();
        format!("{a}|{b}")
    }
}

/// All `2^{n−1} − 1` bipartitions. Mask `m` puts party `n−1−j` in the
/// second block when bit `j` is set, so for three parties the order is
/// `AB|C, AC|B, A|BC`.
pub fn bipartitions(n: usize) -> Vec<Bipartition> {
    if n < 2 {
        return Vec::new();
    }
    (1..1usize << (n - 1))
        .map(|m| {
            let in_second = |p: usize| p > 0 && (m >> (n - 1 - p)) & 1 == 1;
            Bipartition {
                first: (0..n).filter(|&p| !in_second(p)).collect(),
                second: (0..n).filter(|&p| in_second(p)).collect(),
            }
        })
        .collect()
}

/// Input tuple of `block` for a term; block parties absent from the term read input 0.
fn block_inputs(
    ineq: &BellInequality,
    block: &[usize],
    parties: &[usize],
    inputs: &[usize],
) -> usize {
    let mut idx = 0;
    for &p in block {
        let k = parties
            .iter()
            .position(|&q| q == p)
            .map_or(0, |i| inputs[i]);
        idx = idx * ineq.inputs()[p] + k;
    }
    idx
}

/// Best value when `small` plays a fixed deterministic strategy and `large`
/// answers optimally. Output of `small[j]` on block input `x` is bit
/// `j * m + x` of `strategy`, set meaning −1.
fn best_response(
    ineq: &BellInequality,
    large: &[usize],
    strategy: u64,
    m: usize,
    tables: &[TermTable],
) -> f64 {
    let ml: usize = large.iter().map(|&p| ineq.inputs()[p]).product();
    let mut per_tuple = vec![vec![0.0; 1 << large.len()]; ml.max(1)];
    for t in tables {
        let mut sign = 1.0;
        for &j in &t.small_members {
            if strategy >> (j * m + t.small_x) & 1 == 1 {
                sign = -sign;
            }
        }
        let row = &mut per_tuple[t.large_x];
        for (out, v) in row.iter_mut().enumerate() {
            let flips = (out & t.large_mask).count_ones();
            *v += if flips % 2 == 0 {
                sign * t.coeff
            } else {
                -sign * t.coeff
            };
        }
    }
    per_tuple
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

struct TermTable {
    coeff: f64,
    small_x: usize,
    large_x: usize,
    /// Positions in `small` of the term's parties.
    small_members: Vec<usize>,
    /// Bit `j` set when `large[j]` is in the term.
    large_mask: usize,
}

fn block_optimum(ineq: &BellInequality, a: &[usize], b: &[usize]) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let m: usize = small.iter().map(|&p| ineq.inputs()[p]).product();
    let tables: Vec<TermTable> = ineq
        .terms()
        .iter()
        .filter(|t| t.coeff != 0.0)
        .map(|t| TermTable {
            coeff: t.coeff,
            small_x: block_inputs(ineq, small, &t.parties, &t.inputs),
            large_x: block_inputs(ineq, large, &t.parties, &t.inputs),
            small_members: (0..small.len())
                .filter(|&j| t.parties.contains(&small[j]))
                .collect(),
            large_mask: (0..large.len())
                .filter(|&j| t.parties.contains(&large[j]))
                .fold(0, |acc, j| acc | 1 << j),
        })
        .collect();
    let strategies = 1u64 << (m * small.len());
    (0..strategies)
        .into_par_iter()
        .map(|s| best_response(ineq, large, s, m, &tables))
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum of the functional over deterministic hybrid strategies: for some
/// bipartition, each block's outputs are arbitrary functions of that block's
/// inputs. Exact for up to four parties with two inputs each.
pub fn biseparable_bound(ineq: &BellInequality) -> Result<f64> {
    let n = ineq.n();
    if n > ENUMERATION_MAX_PARTIES || ineq.inputs().iter().any(|&k| k > ENUMERATION_MAX_INPUTS) {
        let hint = ineq
            .delta_loc()
            .map(|d| format!("; the catalog bound for `{}` is {d}", ineq.name()))
            .unwrap_or_default();
        return Err(Error::Feasibility(format!(
            "enumeration is limited to {ENUMERATION_MAX_PARTIES} parties with {ENUMERATION_MAX_INPUTS} inputs{hint}"
        )));
    }
    if n == 1 {
        return Ok(block_optimum(ineq, &[0], &[]));
    }
    let parts = bipartitions(n);
    let values: Vec<f64> = parts
        .par_iter()
        .map(|bp| block_optimum(ineq, &bp.first, &bp.second))
        .collect();
    Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
