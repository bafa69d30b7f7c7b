use serde::{Deserialize, Serialize};

use super::{BellInequality, Term};
use crate::error::{Error, Result};

pub const CATALOG_NAMES: &[&str] = &["svetlichny3", "svetlichny4", "seevinck_svetlichny"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// `ν^±_k = (−1)^{k(k±1)/2}`.
fn nu(k: usize, sign: Sign) -> f64 {
    let e = match sign {
        Sign::Plus => k * (k + 1) / 2,
        Sign::Minus => k * k.saturating_sub(1) / 2,
    };
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn full_correlators(n: usize, coeff: impl Fn(&[usize]) -> f64) -> Vec<Term> {
    (0..1usize << n)
        .map(|mask| {
            let inputs: Vec<usize> = (0..n).map(|p| (mask >> (n - 1 - p)) & 1).collect();
            Term {
                parties: (0..n).collect(),
                coeff: coeff(&inputs),
                inputs,
            }
        })
        .collect()
}

/// Tripartite Svetlichny functional, biseparable bound 4.
pub fn svetlichny3() -> BellInequality {
    let table = |i: &[usize]| match (i[0], i[1], i[2]) {
        (0, 0, 0) | (1, 0, 0) | (0, 1, 0) | (0, 0, 1) => 1.0,
        _ => -1.0,
    };
    BellInequality::new(
        "svetlichny3",
        vec![2; 3],
        full_correlators(3, table),
        Some(4.0),
    )
    .expect("catalog entry is well formed")
}

/// Four-party Svetlichny functional in its explicit term-list form, bound 8.
pub fn svetlichny4() -> BellInequality {
    let table = |i: &[usize]| match i.iter().sum::<usize>() {
        0 | 3 | 4 => 1.0,
        _ => -1.0,
    };
    BellInequality::new(
        "svetlichny4",
        vec![2; 4],
        full_correlators(4, table),
        Some(8.0),
    )
    .expect("catalog entry is well formed")
}

/// `S_n^± = Σ_I ν^±_{t(I)} E_{k_1}⋯E_{k_n}`, `t(I)` the number of inputs equal to 1.
pub fn seevinck_svetlichny(n: usize, sign: Sign) -> Result<BellInequality> {
    if n < 3 {
        return Err(Error::Arity(format!(
            "seevinck_svetlichny needs n ≥ 3, got {n}"
        )));
    }
    if n > 20 {
        return Err(Error::Resource(format!("{n} parties means 2^{n} terms")));
    }
    let name = match sign {
        Sign::Plus => format!("seevinck_svetlichny{n}+"),
        Sign::Minus => format!("seevinck_svetlichny{n}-"),
    };
    let terms = full_correlators(n, |i| nu(i.iter().sum(), sign));
    BellInequality::new(name, vec![2; n], terms, Some((1u64 << (n - 1)) as f64))
}

/// Look up a catalog entry; `n` and `sign` only matter for the family.
pub fn catalog(name: &str, n: Option<usize>, sign: Option<Sign>) -> Result<BellInequality> {
    match name {
        "svetlichny3" => Ok(svetlichny3()),
        "svetlichny4" => Ok(svetlichny4()),
        "seevinck_svetlichny" => {
            let n = n.ok_or_else(|| Error::Config("seevinck_svetlichny needs `n`".into()))?;
            seevinck_svetlichny(n, sign.unwrap_or(Sign::Plus))
        }
        other => Err(Error::Config(format!(
            "unknown inequality `{other}`; known: {}",
            CATALOG_NAMES.join(", ")
        ))),
    }
}
