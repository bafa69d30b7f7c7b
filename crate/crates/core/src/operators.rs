//! Pauli-string operators, the lattice Hamiltonian families and bounded observables.
//!
//! Basis convention: site 0 (site "1" in 1-based numbering) is the most
//! significant tensor factor, so for `n` sites the computational basis index
//! of a bit string has site `s` at bit `n - 1 - s`.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Region};
use crate::linalg::{self, c, Matrix, Vector, C64, I, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-10;

/// Operators whose norm falls below this are treated as the zero operator.
const ZERO_NORM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::X => linalg::pauli_x(),
            Pauli::Y => linalg::pauli_y(),
            Pauli::Z => linalg::pauli_z(),
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// `coeff · ⊗_s P_s`, identity on unlisted sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub factors: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coeff: impl Into<C64>, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        Self {
            coeff: coeff.into(),
            factors: factors.into_iter().collect(),
        }
    }

    pub fn identity(coeff: impl Into<C64>) -> Self {
        Self::new(coeff, [])
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Bit-level form on an `n`-site register.
    pub fn compile(&self, n: usize) -> CompiledTerm {
        let mut flip = 0u64;
        let mut sign = 0u64;
        let mut ny = 0u32;
        for (&s, &p) in &self.factors {
            let bit = 1u64 << (n - 1 - s);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ny += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        let phase = match ny % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        CompiledTerm {
            flip,
            sign,
            factor: self.coeff * phase,
        }
    }

    fn key(&self) -> Vec<(usize, Pauli)> {
        self.factors.iter().map(|(&s, &p)| (s, p)).collect()
    }
}

/// `P|b⟩ = factor · (-1)^{popcount(b & sign)} |b ^ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompiledTerm {
    pub flip: u64,
    pub sign: u64,
    pub factor: C64,
}

impl CompiledTerm {
    #[inline]
    pub fn amplitude(&self, b: u64) -> C64 {
        if (b & self.sign).count_ones().is_multiple_of(2) {
            self.factor
        } else {
            -self.factor
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Terms(Vec<PauliTerm>),
    /// Matrix over the support sites in ascending order.
    Dense(Matrix),
}

/// An operator on an `n`-site register, as a Pauli sum or a dense block.
#[derive(Debug, Clone)]
pub struct Operator {
    n_sites: usize,
    repr: Repr,
    support: Vec<usize>,
    hermitian: bool,
}

impl Operator {
    pub fn from_terms(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut support = Vec::new();
        for t in &terms {
            for &s in t.factors.keys() {
                if s >= n_sites {
                    return Err(Error::InvalidRegion(format!(
                        "Pauli factor on site {} outside {} sites",
                        s + 1,
                        n_sites
                    )));
                }
                support.push(s);
            }
        }
        support.sort_unstable();
        support.dedup();
        let hermitian = terms_hermitian(&terms);
        Ok(Self {
            n_sites,
            repr: Repr::Terms(terms),
            support,
            hermitian,
        })
    }

    pub fn dense(n_sites: usize, matrix: Matrix, support: &Region) -> Result<Self> {
        if support.max_site() >= n_sites {
            return Err(Error::InvalidRegion(format!(
                "support {support} outside {n_sites} sites"
            )));
        }
        let dim = 1usize << support.len();
        if matrix.dim() != (dim, dim) {
            return Err(Error::Shape(format!(
                "{:?} matrix does not act on {} sites",
                matrix.dim(),
                support.len()
            )));
        }
        let hermitian = linalg::is_hermitian(&matrix, HERMITIAN_TOL);
        Ok(Self {
            n_sites,
            repr: Repr::Dense(matrix),
            support: support.sites().to_vec(),
            hermitian,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Sites the operator acts on nontrivially (ascending). Empty for a
    /// multiple of the identity given as a Pauli sum.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn terms(&self) -> Option<&[PauliTerm]> {
        match &self.repr {
            Repr::Terms(t) => Some(t),
            Repr::Dense(_) => None,
        }
    }

    pub fn compiled(&self) -> Option<Vec<CompiledTerm>> {
        self.terms().map(|ts| {
            ts.iter()
                .map(|t| t.compile(self.n_sites))
                .filter(|t| t.factor != ZERO)
                .collect()
        })
    }

    /// True when every term flips an even number of spins, so the operator
    /// commutes with the global Z-parity.
    pub fn conserves_parity(&self) -> bool {
        match self.compiled() {
            Some(ct) => ct.iter().all(|t| t.flip.count_ones() % 2 == 0),
            None => false,
        }
    }

    /// Matrix on the support sites (ascending order).
    pub fn local_matrix(&self) -> Matrix {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Terms(ts) => {
                let k = self.support.len();
                let dim = 1usize << k;
                let mut m = Array2::from_elem((dim, dim), ZERO);
                let local: Vec<PauliTerm> = ts
                    .iter()
                    .map(|t| PauliTerm {
                        coeff: t.coeff,
                        factors: t
                            .factors
                            .iter()
                            .map(|(s, p)| (self.support.binary_search(s).unwrap(), *p))
                            .collect(),
                    })
                    .collect();
                for t in &local {
                    let ct = t.compile(k);
                    if ct.factor == ZERO {
                        continue;
                    }
                    for b in 0..dim as u64 {
                        m[[(b ^ ct.flip) as usize, b as usize]] += ct.amplitude(b);
                    }
                }
                m
            }
        }
    }

    /// Dense matrix on the full `2^n` space.
    pub fn full_matrix(&self) -> Matrix {
        match &self.repr {
            Repr::Terms(_) => {
                let dim = 1usize << self.n_sites;
                let mut m = Array2::from_elem((dim, dim), ZERO);
                for ct in self.compiled().unwrap() {
                    for b in 0..dim as u64 {
                        m[[(b ^ ct.flip) as usize, b as usize]] += ct.amplitude(b);
                    }
                }
                m
            }
            Repr::Dense(local) => embed_matrix(local, &self.support, self.n_sites),
        }
    }

    /// `y = A x` on the full space.
    pub fn apply(&self, x: &Vector) -> Vector {
        let mut y = Vector::from_elem(x.len(), ZERO);
        match self.compiled() {
            Some(ct) => {
                for t in &ct {
                    for (b, &xb) in x.iter().enumerate() {
                        if xb != ZERO {
                            y[(b as u64 ^ t.flip) as usize] += t.amplitude(b as u64) * xb;
                        }
                    }
                }
            }
            None => {
                y = self.full_matrix().dot(x);
            }
        }
        y
    }

    /// Quick upper bound `Σ |coeff|` for Pauli sums, exact norm otherwise.
    pub fn norm_upper_bound(&self) -> f64 {
        match &self.repr {
            Repr::Terms(ts) => ts.iter().map(|t| t.coeff.norm()).sum(),
            Repr::Dense(_) => operator_norm(self).unwrap_or(f64::INFINITY),
        }
    }

    pub fn scaled(&self, s: f64) -> Operator {
        let repr = match &self.repr {
            Repr::Terms(ts) => Repr::Terms(
                ts.iter()
                    .map(|t| PauliTerm {
                        coeff: t.coeff * s,
                        factors: t.factors.clone(),
                    })
                    .collect(),
            ),
            Repr::Dense(m) => Repr::Dense(m.mapv(|z| z * s)),
        };
        Operator {
            n_sites: self.n_sites,
            repr,
            support: self.support.clone(),
            hermitian: self.hermitian,
        }
    }
}

/// A Pauli sum is Hermitian iff, after merging equal strings, every
/// coefficient is real (Pauli strings are Hermitian and linearly independent).
fn terms_hermitian(terms: &[PauliTerm]) -> bool {
    let mut merged: BTreeMap<Vec<(usize, Pauli)>, C64> = BTreeMap::new();
    for t in terms {
        *merged.entry(t.key()).or_insert(ZERO) += t.coeff;
    }
    merged.values().all(|z| z.im.abs() <= HERMITIAN_TOL)
}

/// Basis index restricted to `sites` (ascending, MSB first) on an `n`-site register.
#[inline]
pub fn gather_bits(b: usize, sites: &[usize], n: usize) -> usize {
    let mut out = 0usize;
    for &s in sites {
        out = (out << 1) | ((b >> (n - 1 - s)) & 1);
    }
    out
}

/// Inverse of [`gather_bits`]: spread a local index onto the given sites.
#[inline]
pub fn scatter_bits(local: usize, sites: &[usize], n: usize) -> usize {
    let k = sites.len();
    let mut out = 0usize;
    for (i, &s) in sites.iter().enumerate() {
        let bit = (local >> (k - 1 - i)) & 1;
        out |= bit << (n - 1 - s);
    }
    out
}

/// Tensor-extend a local matrix on `sites` by the identity on the rest.
pub fn embed_matrix(local: &Matrix, sites: &[usize], n: usize) -> Matrix {
    let dim = 1usize << n;
    let mut mask = 0usize;
    for &s in sites {
        mask |= 1 << (n - 1 - s);
    }
    let kdim = 1usize << sites.len();
    let mut out = Array2::from_elem((dim, dim), ZERO);
    for i in 0..dim {
        let li = gather_bits(i, sites, n);
        let rest = i & !mask;
        for lj in 0..kdim {
            let v = local[[li, lj]];
            if v != ZERO {
                out[[i, rest | scatter_bits(lj, sites, n)]] = v;
            }
        }
    }
    out
}

/// `embed(A)`: the operator as a dense matrix on the whole lattice.
pub fn embed(a: &Operator, lat: &Lattice) -> Result<Matrix> {
    if a.n_sites() != lat.len() {
        return Err(Error::InvalidRegion(format!(
            "operator on {} sites does not fit a {}-site lattice",
            a.n_sites(),
            lat.len()
        )));
    }
    Ok(a.full_matrix())
}

/// Largest singular value. Hermitian inputs use `max |λ|`; general inputs
/// use `sqrt(λ_max(A†A))`.
pub fn operator_norm(a: &Operator) -> Result<f64> {
    let m = a.local_matrix();
    matrix_norm(&m, a.is_hermitian())
}

pub fn matrix_norm(m: &Matrix, hermitian: bool) -> Result<f64> {
    let (r, cdim) = m.dim();
    if r != cdim {
        return Err(Error::Shape(format!("{r}x{cdim} matrix is not square")));
    }
    if r == 0 {
        return Ok(0.0);
    }
    if hermitian {
        let w = linalg::eigvalsh(m)?;
        Ok(w[0].abs().max(w[w.len() - 1].abs()))
    } else {
        let g = linalg::matmul(&linalg::dagger(m), m);
        let w = linalg::eigvalsh(&g)?;
        Ok(w[w.len() - 1].max(0.0).sqrt())
    }
}

/// A Hermitian operator on a region with operator norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: Matrix,
    region: Region,
    norm: f64,
}

impl Observable {
    /// Wrap a local matrix; it must be Hermitian with norm ≤ 1.
    pub fn new(matrix: Matrix, region: Region) -> Result<Self> {
        let dim = 1usize << region.len();
        if matrix.dim() != (dim, dim) {
            return Err(Error::Shape(format!(
                "{:?} matrix does not act on region {region}",
                matrix.dim()
            )));
        }
        if !linalg::is_hermitian(&matrix, HERMITIAN_TOL) {
            return Err(Error::NotHermitian(format!("observable on {region}")));
        }
        let norm = matrix_norm(&matrix, true)?;
        if norm > 1.0 + HERMITIAN_TOL {
            return Err(Error::Domain(format!(
                "observable on {region} has norm {norm} > 1"
            )));
        }
        Ok(Self {
            matrix,
            region,
            norm,
        })
    }

    pub(crate) fn new_unchecked(matrix: Matrix, region: Region, norm: f64) -> Self {
        Self {
            matrix,
            region,
            norm,
        }
    }

    pub fn pauli(p: Pauli, site: usize) -> Self {
        Self::new_unchecked(p.matrix(), Region::from_sorted_unchecked(vec![site]), 1.0)
    }

    /// Tensor product of Paulis on the sites of `region`, one letter per site.
    pub fn pauli_string(letters: &[Pauli], region: &Region) -> Result<Self> {
        if letters.len() != region.len() {
            return Err(Error::Shape(format!(
                "{} Pauli letters for a {}-site region",
                letters.len(),
                region.len()
            )));
        }
        let mut m = linalg::identity(1);
        for p in letters {
            m = linalg::kron(&m, &p.matrix());
        }
        Ok(Self::new_unchecked(m, region.clone(), 1.0))
    }

    pub fn identity(region: &Region) -> Self {
        Self::new_unchecked(linalg::identity(1 << region.len()), region.clone(), 1.0)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn to_operator(&self, n_sites: usize) -> Result<Operator> {
        Operator::dense(n_sites, self.matrix.clone(), &self.region)
    }
}

/// `A / max(1, ‖A‖)`.
pub fn normalize_observable(a: &Operator) -> Result<Observable> {
    if !a.is_hermitian() {
        return Err(Error::NotHermitian(
            "cannot normalize a non-Hermitian operator".into(),
        ));
    }
    let norm = operator_norm(a)?;
    if norm <= ZERO_NORM_TOL {
        return Err(Error::DegenerateObservable("operator is zero".into()));
    }
    if a.support().is_empty() {
        return Err(Error::DegenerateObservable(
            "operator is a multiple of the identity with empty support".into(),
        ));
    }
    let scale = norm.max(1.0);
    let m = a.local_matrix().mapv(|z| z / scale);
    let region = Region::from_sorted_unchecked(a.support().to_vec());
    Ok(Observable::new_unchecked(m, region, norm / scale))
}

/// `H = Σ_j [-(1+γ) X_j X_{j+1} - (1-γ) Y_j Y_{j+1}] + Σ_j c_j Z_j` on a chain.
pub fn xy_chain_hamiltonian(lat: &Lattice, gamma: f64, fields: &[f64]) -> Result<Operator> {
    if !lat.is_chain() {
        return Err(Error::Geometry(format!(
            "the XY chain needs a chain lattice, got {}",
            lat.describe()
        )));
    }
    let n = lat.len();
    if fields.len() != n {
        return Err(Error::Config(format!(
            "{} field values for {} sites",
            fields.len(),
            n
        )));
    }
    let mut terms = Vec::with_capacity(3 * n);
    for j in 0..n.saturating_sub(1) {
        terms.push(PauliTerm::new(
            -(1.0 + gamma),
            [(j, Pauli::X), (j + 1, Pauli::X)],
        ));
        terms.push(PauliTerm::new(
            -(1.0 - gamma),
            [(j, Pauli::Y), (j + 1, Pauli::Y)],
        ));
    }
    for (j, &cj) in fields.iter().enumerate() {
        terms.push(PauliTerm::new(cj, [(j, Pauli::Z)]));
    }
    Operator::from_terms(n, terms)
}

#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub operator: Operator,
    pub bonds: usize,
    /// Set when `k` exceeds the lattice diameter (every pair interacts).
    pub all_to_all: bool,
}

/// `H = Σ_{d(x,y)≤k} [Jx XX + Jy YY + Jz ZZ] + Σ_x c_x Z_x`.
pub fn grid_hamiltonian(
    lat: &Lattice,
    k: usize,
    coupling: [f64; 3],
    fields: &[f64],
) -> Result<GridHamiltonian> {
    if k == 0 {
        return Err(Error::Config(
            "interaction range k must be at least 1".into(),
        ));
    }
    let n = lat.len();
    if fields.len() != n {
        return Err(Error::Config(format!(
            "{} field values for {} sites",
            fields.len(),
            n
        )));
    }
    let pairs = lat.pairs_within(k);
    let mut terms = Vec::with_capacity(3 * pairs.len() + n);
    let [jx, jy, jz] = coupling;
    for &(x, y) in &pairs {
        terms.push(PauliTerm::new(jx, [(x, Pauli::X), (y, Pauli::X)]));
        terms.push(PauliTerm::new(jy, [(x, Pauli::Y), (y, Pauli::Y)]));
        terms.push(PauliTerm::new(jz, [(x, Pauli::Z), (y, Pauli::Z)]));
    }
    for (x, &cx) in fields.iter().enumerate() {
        terms.push(PauliTerm::new(cx, [(x, Pauli::Z)]));
    }
    Ok(GridHamiltonian {
        operator: Operator::from_terms(n, terms)?,
        bonds: pairs.len(),
        all_to_all: k > lat.diameter(),
    })
}

/// Single-site density matrix from a Bloch vector `r` (|r| ≤ 1).
pub fn bloch_density(r: [f64; 3]) -> Matrix {
    let [x, y, z] = r;
    ndarray::arr2(&[
        [c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0)],
        [c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Independent oracle: Kronecker products of 2×2 matrices, site 0 leftmost.
    fn kron_string(n: usize, factors: &[(usize, Pauli)]) -> Matrix {
        let mut m = linalg::identity(1);
        for s in 0..n {
            let f = factors
                .iter()
                .find(|(t, _)| *t == s)
                .map(|(_, p)| p.matrix())
                .unwrap_or_else(|| linalg::identity(2));
            m = kron(&m, &f);
        }
        m
    }

    fn oracle_dense(n: usize, terms: &[PauliTerm]) -> Matrix {
        let dim = 1 << n;
        let mut m = Array2::from_elem((dim, dim), ZERO);
        for t in terms {
            let f: Vec<_> = t.factors.iter().map(|(&s, &p)| (s, p)).collect();
            m = m + kron_string(n, &f).mapv(|z| z * t.coeff);
        }
        m
    }

    #[test]
    fn xy_two_site_spectrum() {
        let lat = Lattice::chain(2).unwrap();
        let h = xy_chain_hamiltonian(&lat, 0.0, &[0.0, 0.0]).unwrap();
        assert!(h.is_hermitian());
        let xx = kron(&linalg::pauli_x(), &linalg::pauli_x());
        let yy = kron(&linalg::pauli_y(), &linalg::pauli_y());
        let oracle = (xx + yy).mapv(|z| -z);
        assert!(max_abs_diff(&h.full_matrix(), &oracle) < 1e-14);
        let w = linalg::eigvalsh(&oracle).unwrap();
        let expect = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in w.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_site_chain_is_field_only() {
        let lat = Lattice::chain(1).unwrap();
        let h = xy_chain_hamiltonian(&lat, 0.7, &[1.5]).unwrap();
        let expect = linalg::pauli_z().mapv(|z| z * 1.5);
        assert!(max_abs_diff(&h.full_matrix(), &expect) < 1e-15);
    }

    #[test]
    fn xy_support_and_hermiticity() {
        let lat = Lattice::chain(3).unwrap();
        let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 3]).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.support(), &[0, 1, 2]);
        assert!(h.conserves_parity());
    }

    #[test]
    fn xy_errors() {
        let g = Lattice::grid(2, 2).unwrap();
        assert!(matches!(
            xy_chain_hamiltonian(&g, 0.0, &[0.0; 4]),
            Err(Error::Geometry(_))
        ));
        let lat = Lattice::chain(3).unwrap();
        assert!(matches!(
            xy_chain_hamiltonian(&lat, 0.0, &[0.0; 2]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn grid_bond_counts() {
        let g = Lattice::grid(2, 2).unwrap();
        let h = grid_hamiltonian(&g, 1, [1.0, 1.0, 1.0], &[0.0; 4]).unwrap();
        assert_eq!(h.bonds, 4);
        assert!(!h.all_to_all);
        let one = Lattice::grid(1, 1).unwrap();
        let h1 = grid_hamiltonian(&one, 1, [1.0, 1.0, 1.0], &[0.3]).unwrap();
        assert_eq!(h1.bonds, 0);
        assert!(
            max_abs_diff(
                &h1.operator.full_matrix(),
                &linalg::pauli_z().mapv(|z| z * 0.3)
            ) < 1e-15
        );
        let far = grid_hamiltonian(&g, 5, [1.0, 1.0, 1.0], &[0.0; 4]).unwrap();
        assert!(far.all_to_all);
        assert_eq!(far.bonds, 6);
    }

    #[test]
    fn two_by_one_grid_matches_isotropic_xy_bond() {
        let g = Lattice::grid(2, 1).unwrap();
        let h = grid_hamiltonian(&g, 1, [-1.0, -1.0, 0.0], &[0.0; 2]).unwrap();
        let chain = Lattice::chain(2).unwrap();
        let xy = xy_chain_hamiltonian(&chain, 0.0, &[0.0; 2]).unwrap();
        assert!(max_abs_diff(&h.operator.full_matrix(), &xy.full_matrix()) < 1e-15);
    }

    #[test]
    fn norms() {
        let z = Operator::from_terms(1, vec![PauliTerm::new(1.0, [(0, Pauli::Z)])]).unwrap();
        assert_abs_diff_eq!(operator_norm(&z).unwrap(), 1.0, epsilon = 1e-14);
        let x2 = Operator::from_terms(1, vec![PauliTerm::new(2.0, [(0, Pauli::X)])]).unwrap();
        assert_abs_diff_eq!(operator_norm(&x2).unwrap(), 2.0, epsilon = 1e-14);
        let xy = Operator::from_terms(
            2,
            vec![
                PauliTerm::new(1.0, [(0, Pauli::X), (1, Pauli::X)]),
                PauliTerm::new(1.0, [(0, Pauli::Y), (1, Pauli::Y)]),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(operator_norm(&xy).unwrap(), 2.0, epsilon = 1e-12);
        // non-Hermitian: σ+ has singular values {1, 0}
        let raise = Operator::from_terms(
            1,
            vec![
                PauliTerm::new(0.5, [(0, Pauli::X)]),
                PauliTerm::new(c(0.0, 0.5), [(0, Pauli::Y)]),
            ],
        )
        .unwrap();
        assert!(!raise.is_hermitian());
        assert_abs_diff_eq!(operator_norm(&raise).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normalization() {
        let z3 = Operator::from_terms(1, vec![PauliTerm::new(3.0, [(0, Pauli::Z)])]).unwrap();
        let o = normalize_observable(&z3).unwrap();
        assert!(max_abs_diff(o.matrix(), &linalg::pauli_z()) < 1e-14);
        let z = Operator::from_terms(1, vec![PauliTerm::new(1.0, [(0, Pauli::Z)])]).unwrap();
        assert!(
            max_abs_diff(
                normalize_observable(&z).unwrap().matrix(),
                &linalg::pauli_z()
            ) < 1e-15
        );
        let xy = Operator::from_terms(
            2,
            vec![
                PauliTerm::new(1.0, [(0, Pauli::X), (1, Pauli::X)]),
                PauliTerm::new(1.0, [(0, Pauli::Y), (1, Pauli::Y)]),
            ],
        )
        .unwrap();
        let half = xy.local_matrix().mapv(|z| z * 0.5);
        assert!(max_abs_diff(normalize_observable(&xy).unwrap().matrix(), &half) < 1e-14);
        let zero = Operator::from_terms(1, vec![PauliTerm::new(0.0, [(0, Pauli::Z)])]).unwrap();
        assert!(matches!(
            normalize_observable(&zero),
            Err(Error::DegenerateObservable(_))
        ));
    }

    #[test]
    fn embedding() {
        let z2 = Operator::from_terms(2, vec![PauliTerm::new(1.0, [(1, Pauli::Z)])]).unwrap();
        let lat = Lattice::chain(2).unwrap();
        let m = embed(&z2, &lat).unwrap();
        let diag: Vec<f64> = m.diag().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, -1.0, 1.0, -1.0]);

        let region = lat.region([0, 1]).unwrap();
        let id = Operator::dense(2, linalg::identity(4), &region).unwrap();
        assert!(max_abs_diff(&embed(&id, &lat).unwrap(), &linalg::identity(4)) < 1e-15);

        let one = Lattice::chain(1).unwrap();
        let x = Operator::from_terms(1, vec![PauliTerm::new(1.0, [(0, Pauli::X)])]).unwrap();
        assert!(max_abs_diff(&embed(&x, &one).unwrap(), &linalg::pauli_x()) < 1e-15);

        assert!(matches!(embed(&x, &lat), Err(Error::InvalidRegion(_))));
    }

    #[test]
    fn dense_embedding_matches_kron_on_scattered_sites() {
        // X on site 0 and Z on site 2 of a 3-site register, given as a dense 2-site block
        let region = Region::from_sorted_unchecked(vec![0, 2]);
        let block = kron(&linalg::pauli_x(), &linalg::pauli_z());
        let op = Operator::dense(3, block, &region).unwrap();
        let oracle = kron_string(3, &[(0, Pauli::X), (2, Pauli::Z)]);
        assert!(max_abs_diff(&op.full_matrix(), &oracle) < 1e-15);
    }

    fn arb_terms(n: usize) -> impl Strategy<Value = Vec<PauliTerm>> {
        let term = (
            -2.0f64..2.0,
            proptest::collection::vec(
                prop_oneof![
                    Just(None),
                    Just(Some(Pauli::X)),
                    Just(Some(Pauli::Y)),
                    Just(Some(Pauli::Z))
                ],
                n,
            ),
        )
            .prop_map(|(coef, letters)| {
                PauliTerm::new(
                    coef,
                    letters
                        .into_iter()
                        .enumerate()
                        .filter_map(|(s, p)| p.map(|p| (s, p))),
                )
            });
        proptest::collection::vec(term, 1..6)
    }

    proptest! {
        #[test]
        fn term_assembly_matches_kron_oracle(terms in arb_terms(3)) {
            let op = Operator::from_terms(3, terms.clone()).unwrap();
            let oracle = oracle_dense(3, &terms);
            prop_assert!(max_abs_diff(&op.full_matrix(), &oracle) <= 1e-12);
            prop_assert!(op.is_hermitian());
        }

        #[test]
        fn hamiltonians_are_hermitian(l in 1usize..7, gamma in -2.0f64..2.0, h in -2.0f64..2.0) {
            let lat = Lattice::chain(l).unwrap();
            let op = xy_chain_hamiltonian(&lat, gamma, &vec![h; l]).unwrap();
            let m = op.full_matrix();
            prop_assert!(max_abs_diff(&m, &linalg::dagger(&m)) < 1e-10);
        }

        #[test]
        fn grid_hamiltonians_are_hermitian(r in 1usize..3, cc in 1usize..4, k in 1usize..3,
                                          j in proptest::array::uniform3(-1.5f64..1.5)) {
            let lat = Lattice::grid(r, cc).unwrap();
            let n = lat.len();
            let op = grid_hamiltonian(&lat, k, j, &vec![0.4; n]).unwrap().operator;
            let m = op.full_matrix();
            prop_assert!(max_abs_diff(&m, &linalg::dagger(&m)) < 1e-10);
        }

        #[test]
        fn embed_preserves_norm(terms in arb_terms(2), extra in 0usize..3) {
            let n = 2 + extra;
            let op = Operator::from_terms(n, terms.clone()).unwrap();
            prop_assume!(!op.support().is_empty());
            let local = operator_norm(&op).unwrap();
            let full = matrix_norm(&op.full_matrix(), true).unwrap();
            prop_assert!((local - full).abs() < 1e-10);
        }

        #[test]
        fn normalization_is_idempotent(terms in arb_terms(2)) {
            let op = Operator::from_terms(2, terms).unwrap();
            prop_assume!(!op.support().is_empty() && operator_norm(&op).unwrap() > 1e-6);
            let once = normalize_observable(&op).unwrap();
            prop_assert!(once.norm() <= 1.0 + 1e-10);
            let again = normalize_observable(&once.to_operator(2).unwrap()).unwrap();
            prop_assert!(max_abs_diff(once.matrix(), again.matrix()) <= 1e-12);
        }
    }
}
