//! Ground, thermal and time-evolved states, spectra and partial traces.

mod lanczos;

use std::borrow::Cow;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{self, Matrix, Vector, C64, ONE, ZERO};
use crate::operators::{gather_bits, scatter_bits, CompiledTerm, Operator};

/// Largest dimension handled by full diagonalization.
pub const DENSE_CAP_DIM: usize = 1 << 12;
/// Largest dimension for which a ground state can be computed at all.
pub const HARD_CAP_DIM: usize = 1 << 14;
/// `ΔE` below this marks the ground level as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(Vector),
    Mixed(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    data: StateData,
    n_sites: usize,
}

impl QuantumState {
    pub fn pure(psi: Vector, n_sites: usize) -> Result<Self> {
        if psi.len() != 1usize << n_sites {
            return Err(Error::Shape(format!(
                "vector of length {} is not a {n_sites}-site state",
                psi.len()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Domain(format!("state vector has norm {norm}")));
        }
        Ok(Self {
            data: StateData::Pure(psi),
            n_sites,
        })
    }

    /// Density matrix; checks hermiticity, unit trace, and positivity when
    /// the dimension is small enough to diagonalize cheaply.
    pub fn mixed(rho: Matrix, n_sites: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        if rho.dim() != (dim, dim) {
            return Err(Error::Shape(format!(
                "{:?} matrix is not a {n_sites}-site density matrix",
                rho.dim()
            )));
        }
        if !linalg::is_hermitian(&rho, STATE_TOL) {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&rho);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::Domain(format!("density matrix has trace {tr}")));
        }
        if dim <= 1 << 10 {
            let w = linalg::eigvalsh(&rho)?;
            if w[0] < -STATE_TOL {
                return Err(Error::Domain(format!(
                    "density matrix has eigenvalue {}",
                    w[0]
                )));
            }
        }
        Ok(Self {
            data: StateData::Mixed(rho),
            n_sites,
        })
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            data: StateData::Mixed(linalg::identity(dim).mapv(|z| z / dim as f64)),
            n_sites,
        }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut psi = Vector::from_elem(dim, ZERO);
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[0] = a;
        psi[dim - 1] = a;
        Self {
            data: StateData::Pure(psi),
            n_sites,
        }
    }

    /// Computational basis state with the given bits, site 0 first.
    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut psi = Vector::from_elem(1 << n, ZERO);
        psi[idx] = ONE;
        Self {
            data: StateData::Pure(psi),
            n_sites: n,
        }
    }

    /// Gaussian-random pure state (Haar distributed).
    pub fn random_pure<R: Rng>(n_sites: usize, rng: &mut R) -> Self {
        Self {
            data: StateData::Pure(random_unit_vector(1 << n_sites, rng)),
            n_sites,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn kind(&self) -> &'static str {
        match self.data {
            StateData::Pure(_) => "pure",
            StateData::Mixed(_) => "mixed",
        }
    }

    pub fn density_matrix(&self) -> Cow<'_, Matrix> {
        match &self.data {
            StateData::Mixed(m) => Cow::Borrowed(m),
            StateData::Pure(psi) => {
                let col = psi.view().insert_axis(Axis(1));
                let row = psi.mapv(|z| z.conj()).insert_axis(Axis(0));
                Cow::Owned(col.dot(&row))
            }
        }
    }

    /// `tr(A ρ)` for a full-space matrix.
    pub fn expectation_matrix(&self, a: &Matrix) -> C64 {
        match &self.data {
            StateData::Pure(psi) => {
                let apsi = a.dot(psi);
                psi.iter().zip(apsi.iter()).map(|(x, y)| x.conj() * y).sum()
            }
            StateData::Mixed(rho) => {
                let mut acc = ZERO;
                for i in 0..rho.nrows() {
                    for j in 0..rho.ncols() {
                        acc += a[[i, j]] * rho[[j, i]];
                    }
                }
                acc
            }
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(_) => 1.0,
            StateData::Mixed(rho) => rho.iter().map(|z| z.norm_sqr()).sum(),
        }
    }
}

pub(crate) fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vector {
    let mut v: Vector = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / n);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    /// Ascending. Complete when `complete` is set, otherwise the lowest two.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub complete: bool,
}

impl SpectralData {
    fn from_sorted(eigenvalues: Vec<f64>, complete: bool) -> Self {
        let e0 = eigenvalues[0];
        let gap = if eigenvalues.len() > 1 {
            (eigenvalues[1] - e0).max(0.0)
        } else {
            0.0
        };
        Self {
            ground_energy: e0,
            gap,
            degenerate: gap < DEGENERACY_TOL,
            eigenvalues,
            complete,
        }
    }
}

#[derive(Debug, Clone)]
enum Vectors {
    Real(Array2<f64>),
    Complex(Matrix),
}

#[derive(Debug, Clone)]
struct Block {
    /// Full-space basis indices of this block, ascending.
    basis: Vec<usize>,
    values: Vec<f64>,
    vectors: Vectors,
}

/// Full eigendecomposition of a Hamiltonian, split into Z-parity sectors when
/// the Hamiltonian conserves parity.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n_sites: usize,
    blocks: Vec<Block>,
    /// `(energy, block, column)` in ascending energy; ties keep block/column order.
    order: Vec<(f64, usize, usize)>,
}

fn check_hermitian(h: &Operator) -> Result<()> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian("Hamiltonian".into()));
    }
    Ok(())
}

fn dim_of(h: &Operator, cap: usize, what: &str) -> Result<usize> {
    let n = h.n_sites();
    if n >= usize::BITS as usize - 1 || (1usize << n) > cap {
        return Err(Error::Resource(format!(
            "{what} on {n} sites needs dimension 2^{n}, above the cap {cap}"
        )));
    }
    Ok(1 << n)
}

/// Block basis lists: both parity sectors, or the whole space.
fn sectors(h: &Operator, dim: usize) -> Vec<Vec<usize>> {
    if h.conserves_parity() && dim > 1 {
        let even = (0..dim).filter(|b| b.count_ones() % 2 == 0).collect();
        let odd = (0..dim).filter(|b| b.count_ones() % 2 == 1).collect();
        vec![even, odd]
    } else {
        vec![(0..dim).collect()]
    }
}

fn position_table(basis: &[usize], dim: usize) -> Vec<u32> {
    let mut pos = vec![u32::MAX; dim];
    for (i, &b) in basis.iter().enumerate() {
        pos[b] = i as u32;
    }
    pos
}

fn block_matrix(terms: &[CompiledTerm], basis: &[usize], pos: &[u32]) -> Matrix {
    let m = basis.len();
    let mut out = Array2::from_elem((m, m), ZERO);
    for t in terms {
        for (i, &b) in basis.iter().enumerate() {
            let j = pos[b ^ t.flip as usize] as usize;
            out[[j, i]] += t.amplitude(b as u64);
        }
    }
    out
}

impl EigenSystem {
    pub fn new(h: &Operator) -> Result<Self> {
        Self::with_cap(h, DENSE_CAP_DIM)
    }

    pub fn with_cap(h: &Operator, cap: usize) -> Result<Self> {
        check_hermitian(h)?;
        let dim = dim_of(h, cap, "full diagonalization")?;
        let mut blocks = Vec::new();
        match h.compiled() {
            Some(terms) => {
                for basis in sectors(h, dim) {
                    let pos = position_table(&basis, dim);
                    let m = block_matrix(&terms, &basis, &pos);
                    blocks.push(Self::solve_block(basis, &m)?);
                }
            }
            None => {
                let m = h.full_matrix();
                blocks.push(Self::solve_block((0..dim).collect(), &m)?);
            }
        }
        let mut order: Vec<(f64, usize, usize)> = blocks
            .iter()
            .enumerate()
            .flat_map(|(bi, b)| b.values.iter().enumerate().map(move |(k, &e)| (e, bi, k)))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            n_sites: h.n_sites(),
            blocks,
            order,
        })
    }

    fn solve_block(basis: Vec<usize>, m: &Matrix) -> Result<Block> {
        let (values, vectors) = if linalg::is_real(m) {
            let (w, v) = linalg::eigh_real(&m.mapv(|z| z.re))?;
            (w, Vectors::Real(v))
        } else {
            let (w, v) = linalg::eigh_complex(m)?;
            (w, Vectors::Complex(v))
        };
        Ok(Block {
            basis,
            values,
            vectors,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.order.iter().map(|o| o.0).collect()
    }

    pub fn spectral_data(&self) -> SpectralData {
        SpectralData::from_sorted(self.eigenvalues(), true)
    }

    /// Full-space eigenvector at position `k` of the ascending order.
    pub fn eigenvector(&self, k: usize) -> Vector {
        let (_, bi, col) = self.order[k];
        let b = &self.blocks[bi];
        let mut v = Vector::from_elem(self.dim(), ZERO);
        for (i, &idx) in b.basis.iter().enumerate() {
            v[idx] = match &b.vectors {
                Vectors::Real(m) => C64::new(m[[i, col]], 0.0),
                Vectors::Complex(m) => m[[i, col]],
            };
        }
        let mut raw = v.to_vec();
        linalg::fix_phase(&mut raw);
        Array1::from(raw)
    }

    /// Ground vector; among numerically tied levels the first in the
    /// solver's order wins.
    pub fn ground_state(&self) -> QuantumState {
        QuantumState {
            data: StateData::Pure(self.eigenvector(0)),
            n_sites: self.n_sites,
        }
    }

    /// `e^{-βH}/Z` with the spectrum shifted by `E0`.
    pub fn gibbs(&self, beta: f64) -> Result<QuantumState> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "inverse temperature {beta} must be finite and ≥ 0"
            )));
        }
        if beta == 0.0 {
            return Ok(QuantumState::maximally_mixed(self.n_sites));
        }
        let e0 = self.order[0].0;
        let z: f64 = self.order.iter().map(|o| (-beta * (o.0 - e0)).exp()).sum();
        let dim = self.dim();
        let mut rho = Array2::from_elem((dim, dim), ZERO);
        for b in &self.blocks {
            let sq: Vec<f64> = b
                .values
                .iter()
                .map(|&e| ((-beta * (e - e0)).exp() / z).sqrt())
                .collect();
            match &b.vectors {
                Vectors::Real(v) => {
                    let mut w = v.clone();
                    for (k, mut col) in w.columns_mut().into_iter().enumerate() {
                        col *= sq[k];
                    }
                    let blockrho = w.dot(&w.t());
                    for (i, &bi) in b.basis.iter().enumerate() {
                        for (j, &bj) in b.basis.iter().enumerate() {
                            rho[[bi, bj]] = C64::new(blockrho[[i, j]], 0.0);
                        }
                    }
                }
                Vectors::Complex(v) => {
                    let mut w = v.clone();
                    for (k, mut col) in w.columns_mut().into_iter().enumerate() {
                        col.mapv_inplace(|x| x * sq[k]);
                    }
                    let blockrho = linalg::matmul(&w, &linalg::dagger(&w));
                    for (i, &bi) in b.basis.iter().enumerate() {
                        for (j, &bj) in b.basis.iter().enumerate() {
                            rho[[bi, bj]] = blockrho[[i, j]];
                        }
                    }
                }
            }
        }
        Ok(QuantumState {
            data: StateData::Mixed(rho),
            n_sites: self.n_sites,
        })
    }

    /// `e^{-iHt}` as a dense matrix.
    pub fn propagator(&self, t: f64) -> Matrix {
        let dim = self.dim();
        let mut u = Array2::from_elem((dim, dim), ZERO);
        for b in &self.blocks {
            let ph: Vec<C64> = b
                .values
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t))
                .collect();
            let v = match &b.vectors {
                Vectors::Real(v) => v.mapv(|x| C64::new(x, 0.0)),
                Vectors::Complex(v) => v.clone(),
            };
            let mut w = v.clone();
            for (k, mut col) in w.columns_mut().into_iter().enumerate() {
                col.mapv_inplace(|x| x * ph[k]);
            }
            let ub = linalg::matmul(&w, &linalg::dagger(&v));
            for (i, &bi) in b.basis.iter().enumerate() {
                for (j, &bj) in b.basis.iter().enumerate() {
                    u[[bi, bj]] = ub[[i, j]];
                }
            }
        }
        u
    }

    fn evolve_vector(&self, psi: &Vector, t: f64) -> Vector {
        let mut out = Vector::from_elem(psi.len(), ZERO);
        for b in &self.blocks {
            let local: Vector = b.basis.iter().map(|&i| psi[i]).collect();
            let ph: Vec<C64> = b
                .values
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t))
                .collect();
            let evolved = match &b.vectors {
                Vectors::Real(v) => {
                    let re = local.mapv(|z| z.re);
                    let im = local.mapv(|z| z.im);
                    let cre = v.t().dot(&re);
                    let cim = v.t().dot(&im);
                    let coef: Array1<C64> = cre
                        .iter()
                        .zip(cim.iter())
                        .zip(&ph)
                        .map(|((&r, &i), p)| C64::new(r, i) * p)
                        .collect();
                    let nre = v.dot(&coef.mapv(|z| z.re));
                    let nim = v.dot(&coef.mapv(|z| z.im));
                    nre.iter()
                        .zip(nim.iter())
                        .map(|(&r, &i)| C64::new(r, i))
                        .collect::<Vector>()
                }
                Vectors::Complex(v) => {
                    let mut coef = linalg::dagger(v).dot(&local);
                    coef.iter_mut().zip(&ph).for_each(|(c, p)| *c *= p);
                    v.dot(&coef)
                }
            };
            for (i, &idx) in b.basis.iter().enumerate() {
                out[idx] = evolved[i];
            }
        }
        out
    }

    /// `ρ(t) = e^{-iHt} ρ e^{iHt}`.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if state.n_sites != self.n_sites {
            return Err(Error::Shape(format!(
                "{}-site state under a {}-site Hamiltonian",
                state.n_sites, self.n_sites
            )));
        }
        if !t.is_finite() {
            return Err(Error::Domain(format!("evolution time {t} is not finite")));
        }
        let data = match &state.data {
            StateData::Pure(psi) => StateData::Pure(self.evolve_vector(psi, t)),
            StateData::Mixed(rho) => {
                let u = self.propagator(t);
                let tmp = linalg::matmul(&u, rho);
                let mut out = linalg::matmul(&tmp, &linalg::dagger(&u));
                // restore exact hermiticity lost to round-off
                out = (&out + &linalg::dagger(&out)).mapv(|z| z * 0.5);
                StateData::Mixed(out)
            }
        };
        Ok(QuantumState {
            data,
            n_sites: self.n_sites,
        })
    }
}

/// Spectrum of `H`: complete up to the dense cap, otherwise the lowest two
/// levels by Lanczos.
pub fn spectrum(h: &Operator) -> Result<SpectralData> {
    check_hermitian(h)?;
    let dim = dim_of(h, HARD_CAP_DIM, "spectrum")?;
    if dim <= DENSE_CAP_DIM {
        Ok(EigenSystem::new(h)?.spectral_data())
    } else {
        Ok(lanczos_ground(h)?.1)
    }
}

/// Ground state and spectral data. Degenerate ground levels are returned
/// with `degenerate` set.
pub fn ground_state(h: &Operator) -> Result<(QuantumState, SpectralData)> {
    check_hermitian(h)?;
    let dim = dim_of(h, HARD_CAP_DIM, "ground state")?;
    if dim <= DENSE_CAP_DIM {
        let es = EigenSystem::new(h)?;
        Ok((es.ground_state(), es.spectral_data()))
    } else {
        lanczos_ground(h)
    }
}

fn lanczos_ground(h: &Operator) -> Result<(QuantumState, SpectralData)> {
    let n = h.n_sites();
    let dim = 1usize << n;
    let terms = h.compiled().ok_or_else(|| {
        Error::Resource("dense operators above the dense cap cannot be diagonalized".into())
    })?;
    let scale = h.norm_upper_bound();
    let mut found: Vec<(f64, usize, Vec<C64>, Vec<usize>)> = Vec::new();
    let mut values: Vec<(f64, usize)> = Vec::new();
    for (si, basis) in sectors(h, dim).into_iter().enumerate() {
        let pos = position_table(&basis, dim);
        let res = lanczos::lowest(basis.len(), 2, scale, |x, y| {
            for t in &terms {
                for (i, &b) in basis.iter().enumerate() {
                    let xi = x[i];
                    if xi != ZERO {
                        y[pos[b ^ t.flip as usize] as usize] += t.amplitude(b as u64) * xi;
                    }
                }
            }
        })?;
        for &v in &res.values {
            values.push((v, si));
        }
        found.push((res.values[0], si, res.ground, basis));
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lowest: Vec<f64> = values.iter().take(2).map(|v| v.0).collect();
    let ground_sector = values[0].1;
    let (_, _, vec, basis) = found
        .into_iter()
        .find(|f| f.1 == ground_sector)
        .expect("sector present");
    let mut psi = vec![ZERO; dim];
    for (i, &b) in basis.iter().enumerate() {
        psi[b] = vec[i];
    }
    linalg::fix_phase(&mut psi);
    let state = QuantumState {
        data: StateData::Pure(Array1::from(psi)),
        n_sites: n,
    };
    Ok((state, SpectralData::from_sorted(lowest, false)))
}

pub fn gibbs_state(h: &Operator, beta: f64) -> Result<QuantumState> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!(
            "inverse temperature {beta} must be ≥ 0"
        )));
    }
    check_hermitian(h)?;
    dim_of(h, DENSE_CAP_DIM, "Gibbs state")?;
    if beta == 0.0 {
        return Ok(QuantumState::maximally_mixed(h.n_sites()));
    }
    EigenSystem::new(h)?.gibbs(beta)
}

pub fn evolve(rho0: &QuantumState, h: &Operator, t: f64) -> Result<QuantumState> {
    check_hermitian(h)?;
    dim_of(h, DENSE_CAP_DIM, "time evolution")?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    EigenSystem::new(h)?.evolve(rho0, t)
}

/// `⊗_x ρ_x` in canonical order. Returns a pure state when every local
/// factor is pure.
pub fn product_state(locals: &[Matrix]) -> Result<QuantumState> {
    if locals.is_empty() {
        return Err(Error::Config(
            "product state needs at least one site".into(),
        ));
    }
    let mut all_pure = true;
    for (i, r) in locals.iter().enumerate() {
        if r.dim() != (2, 2) {
            return Err(Error::Config(format!("local state {} is not 2x2", i + 1)));
        }
        if !linalg::is_hermitian(r, STATE_TOL) {
            return Err(Error::Config(format!(
                "local state {} is not Hermitian",
                i + 1
            )));
        }
        if (linalg::trace(r) - ONE).norm() > STATE_TOL {
            return Err(Error::Config(format!(
                "local state {} does not have unit trace",
                i + 1
            )));
        }
        let w = linalg::eigvalsh(r)?;
        if w[0] < -STATE_TOL {
            return Err(Error::Config(format!(
                "local state {} is not positive",
                i + 1
            )));
        }
        if w[0] > 1e-12 {
            all_pure = false;
        }
    }
    let n = locals.len();
    if all_pure {
        let mut psi = Vector::from_elem(1, ONE);
        for r in locals {
            let (_, v) = linalg::eigh(r)?;
            let mut col = vec![v[[0, 1]], v[[1, 1]]];
            linalg::fix_phase(&mut col);
            let mut next = Vector::from_elem(psi.len() * 2, ZERO);
            for (i, &a) in psi.iter().enumerate() {
                next[2 * i] = a * col[0];
                next[2 * i + 1] = a * col[1];
            }
            psi = next;
        }
        return Ok(QuantumState {
            data: StateData::Pure(psi),
            n_sites: n,
        });
    }
    let mut rho = linalg::identity(1);
    for r in locals {
        rho = linalg::kron(&rho, r);
    }
    Ok(QuantumState {
        data: StateData::Mixed(rho),
        n_sites: n,
    })
}

/// Partial trace onto `keep`, sites ordered ascending.
pub fn reduce(state: &QuantumState, keep: &Region) -> Result<Matrix> {
    reduce_ordered(state, keep.sites())
}

/// Partial trace onto an ordered list of distinct sites; the first listed
/// site becomes the most significant factor.
pub fn reduce_ordered(state: &QuantumState, keep: &[usize]) -> Result<Matrix> {
    let n = state.n_sites;
    if keep.is_empty() {
        return Err(Error::InvalidRegion(
            "cannot reduce to an empty region".into(),
        ));
    }
    let mut seen = 0u64;
    for &s in keep {
        if s >= n {
            return Err(Error::InvalidRegion(format!(
                "site {} outside {n} sites",
                s + 1
            )));
        }
        if seen & (1 << s) != 0 {
            return Err(Error::InvalidRegion(format!("site {} listed twice", s + 1)));
        }
        seen |= 1 << s;
    }
    let rest: Vec<usize> = (0..n).filter(|s| seen & (1 << s) == 0).collect();
    let kd = 1usize << keep.len();
    let keep_off: Vec<usize> = (0..kd).map(|i| scatter_bits(i, keep, n)).collect();
    let rest_off: Vec<usize> = (0..1usize << rest.len())
        .map(|i| scatter_bits(i, &rest, n))
        .collect();
    let mut out = Array2::from_elem((kd, kd), ZERO);
    match &state.data {
        StateData::Pure(psi) => {
            // Gather ψ into a (kept × rest) matrix M; ρ_K = M M†.
            let mut m = Array2::from_elem((kd, rest_off.len()), ZERO);
            for (i, &ko) in keep_off.iter().enumerate() {
                for (r, &ro) in rest_off.iter().enumerate() {
                    m[[i, r]] = psi[ko | ro];
                }
            }
            out = linalg::matmul(&m, &linalg::dagger(&m));
        }
        StateData::Mixed(rho) => {
            for (i, &ki) in keep_off.iter().enumerate() {
                for (j, &kj) in keep_off.iter().enumerate() {
                    let mut acc = ZERO;
                    for &ro in &rest_off {
                        acc += rho[[ki | ro, kj | ro]];
                    }
                    out[[i, j]] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Basis index of `b` restricted to `sites`; re-exported for oracles.
pub fn local_index(b: usize, sites: &[usize], n: usize) -> usize {
    gather_bits(b, sites, n)
}
