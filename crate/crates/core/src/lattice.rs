//! Finite spin lattices and measurement regions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on lattice size. Bit masks over sites are `u64`.
pub const MAX_LATTICE_SITES: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `|i - j|` along a chain.
    Path,
    /// `Σ |x_k - y_k|` on a grid.
    Manhattan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    sites: Vec<Vec<i64>>,
    dims: Vec<usize>,
    metric: MetricKind,
}

impl Lattice {
    pub fn chain(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidSize("chain length must be at least 1".into()));
        }
        if len > MAX_LATTICE_SITES {
            return Err(Error::InvalidSize(format!(
                "chain length {len} exceeds {MAX_LATTICE_SITES}"
            )));
        }
        Ok(Self {
            sites: (1..=len as i64).map(|i| vec![i]).collect(),
            dims: vec![len],
            metric: MetricKind::Path,
        })
    }

    /// `rows × cols` grid with row-major site order: `(r, c)` is site
    /// `(r - 1) * cols + c` in 1-based numbering.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSize(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if rows * cols > MAX_LATTICE_SITES {
            return Err(Error::InvalidSize(format!(
                "{rows}x{cols} grid exceeds {MAX_LATTICE_SITES} sites"
            )));
        }
        let mut sites = Vec::with_capacity(rows * cols);
        for r in 1..=rows as i64 {
            for c in 1..=cols as i64 {
                sites.push(vec![r, c]);
            }
        }
        Ok(Self {
            sites,
            dims: vec![rows, cols],
            metric: MetricKind::Manhattan,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn metric_kind(&self) -> MetricKind {
        self.metric
    }

    pub fn is_chain(&self) -> bool {
        self.metric == MetricKind::Path
    }

    /// Coordinates of a 0-based site index.
    pub fn coords(&self, site: usize) -> &[i64] {
        &self.sites[site]
    }

    /// 0-based index of a coordinate tuple, if it lies on the lattice.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&x, &n) in coords.iter().zip(&self.dims) {
            if x < 1 || x as usize > n {
                return None;
            }
            idx = idx * n + (x as usize - 1);
        }
        Some(idx)
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.sites[a]
            .iter()
            .zip(&self.sites[b])
            .map(|(x, y)| x.abs_diff(*y) as usize)
            .sum()
    }

    pub fn diameter(&self) -> usize {
        self.dims.iter().map(|n| n - 1).sum()
    }

    /// Site pairs `(x, y)` with `x < y` and `d(x, y) <= k`, in lexicographic order.
    pub fn pairs_within(&self, k: usize) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                if self.distance(x, y) <= k {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn region(&self, sites: impl IntoIterator<Item = usize>) -> Result<Region> {
        Region::new(self, sites)
    }

    /// Region from 1-based site numbers, as written in configs.
    pub fn region_from_numbers(&self, numbers: &[usize]) -> Result<Region> {
        let mut idx = Vec::with_capacity(numbers.len());
        for &n in numbers {
            if n == 0 || n > self.len() {
                return Err(Error::InvalidRegion(format!(
                    "site {n} is outside 1..={}",
                    self.len()
                )));
            }
            idx.push(n - 1);
        }
        self.region(idx)
    }

    /// Region from coordinate tuples (1-based per axis).
    pub fn region_from_coords(&self, coords: &[Vec<i64>]) -> Result<Region> {
        let mut idx = Vec::with_capacity(coords.len());
        for c in coords {
            idx.push(self.index_of(c).ok_or_else(|| {
                Error::InvalidRegion(format!("coordinate {c:?} is not on the lattice"))
            })?);
        }
        self.region(idx)
    }

    pub fn full_region(&self) -> Region {
        Region {
            sites: (0..self.len()).collect(),
        }
    }

    fn check(&self, r: &Region) -> Result<()> {
        match r.sites.last() {
            Some(&s) if s >= self.len() => Err(Error::InvalidRegion(format!(
                "site index {s} out of bounds for {} sites",
                self.len()
            ))),
            _ => Ok(()),
        }
    }

    /// `min_{a∈X, b∈Y} d(a, b)`; zero exactly when the regions share a site.
    pub fn region_distance(&self, x: &Region, y: &Region) -> Result<usize> {
        self.check(x)?;
        self.check(y)?;
        let mut best = usize::MAX;
        for &a in &x.sites {
            for &b in &y.sites {
                best = best.min(self.distance(a, b));
            }
        }
        Ok(best)
    }

    /// Largest internal distance of a region.
    pub fn region_diameter(&self, x: &Region) -> Result<usize> {
        self.check(x)?;
        let mut best = 0;
        for &a in &x.sites {
            for &b in &x.sites {
                best = best.max(self.distance(a, b));
            }
        }
        Ok(best)
    }

    /// Exact minimum pairwise separation `τ` of a set of disjoint regions.
    pub fn min_separation(&self, regions: &[Region]) -> Result<usize> {
        if regions.len() < 2 {
            return Err(Error::Arity(format!(
                "separation needs at least 2 regions, got {}",
                regions.len()
            )));
        }
        let mut tau = usize::MAX;
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                let d = self.region_distance(&regions[i], &regions[j])?;
                if d == 0 {
                    return Err(Error::Disjointness(format!(
                        "regions {} and {} overlap",
                        regions[i], regions[j]
                    )));
                }
                tau = tau.min(d);
            }
        }
        Ok(tau)
    }

    pub fn describe(&self) -> String {
        match self.metric {
            MetricKind::Path => format!("chain({})", self.len()),
            MetricKind::Manhattan => format!("grid({}x{})", self.dims[0], self.dims[1]),
        }
    }
}

/// Sorted, duplicate-free set of 0-based site indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(lat: &Lattice, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = sites.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidRegion("region is empty".into()));
        }
        let before = v.len();
        v.sort_unstable();
        v.dedup();
        if v.len() != before {
            return Err(Error::InvalidRegion("region lists a site twice".into()));
        }
        let r = Region { sites: v };
        lat.check(&r)?;
        Ok(r)
    }

    /// Region not tied to a particular lattice; bounds are checked on use.
    pub fn from_sorted_unchecked(sites: Vec<usize>) -> Self {
        debug_assert!(sites.windows(2).all(|w| w[0] < w[1]));
        Region { sites }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        !self.sites.iter().any(|s| other.contains(*s))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.sites.clone();
        v.extend_from_slice(&other.sites);
        v.sort_unstable();
        v.dedup();
        Region { sites: v }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| other.contains(*s))
    }

    /// 1-based site numbers.
    pub fn numbers(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s + 1).collect()
    }

    pub fn max_site(&self) -> usize {
        *self.sites.last().expect("regions are non-empty")
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        write!(f, "}}")
    }
}

/// Pairwise disjointness check for a list of regions.
pub fn ensure_disjoint(regions: &[Region]) -> Result<()> {
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if !regions[i].is_disjoint(&regions[j]) {
                return Err(Error::Disjointness(format!(
                    "regions {} and {} overlap",
                    regions[i], regions[j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain_region(lat: &Lattice, nums: &[usize]) -> Region {
        lat.region_from_numbers(nums).unwrap()
    }

    #[test]
    fn chain_distances() {
        let lat = Lattice::chain(4).unwrap();
        assert_eq!(lat.len(), 4);
        assert_eq!(lat.distance(0, 3), 3);
        let one = Lattice::chain(1).unwrap();
        assert_eq!(one.distance(0, 0), 0);
        let twelve = Lattice::chain(12).unwrap();
        assert_eq!(twelve.distance(0, 11), 11);
        assert!(matches!(Lattice::chain(0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn grid_distances() {
        let g = Lattice::grid(2, 2).unwrap();
        assert_eq!(g.len(), 4);
        let a = g.index_of(&[1, 1]).unwrap();
        let b = g.index_of(&[2, 2]).unwrap();
        assert_eq!(g.distance(a, b), 2);
        assert_eq!(Lattice::grid(1, 1).unwrap().len(), 1);
        assert!(matches!(Lattice::grid(0, 3), Err(Error::InvalidSize(_))));

        let strip = Lattice::grid(3, 1).unwrap();
        let chain = Lattice::chain(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(strip.distance(i, j), chain.distance(i, j));
            }
        }
    }

    #[test]
    fn grid_is_row_major() {
        let g = Lattice::grid(2, 3).unwrap();
        assert_eq!(g.coords(0), &[1, 1]);
        assert_eq!(g.coords(2), &[1, 3]);
        assert_eq!(g.coords(3), &[2, 1]);
        assert_eq!(g.index_of(&[2, 3]), Some(5));
        assert_eq!(g.index_of(&[3, 1]), None);
    }

    #[test]
    fn region_distances() {
        let lat = Lattice::chain(6).unwrap();
        let x = chain_region(&lat, &[1]);
        let y = chain_region(&lat, &[4]);
        assert_eq!(lat.region_distance(&x, &y).unwrap(), 3);
        let a = chain_region(&lat, &[1, 2]);
        let b = chain_region(&lat, &[2, 3]);
        assert_eq!(lat.region_distance(&a, &b).unwrap(), 0);

        let g = Lattice::grid(3, 3).unwrap();
        let p = g.region_from_coords(&[vec![1, 1]]).unwrap();
        let q = g.region_from_coords(&[vec![3, 3]]).unwrap();
        assert_eq!(g.region_distance(&p, &q).unwrap(), 4);
    }

    #[test]
    fn separation() {
        let lat = Lattice::chain(12).unwrap();
        let r = |n| chain_region(&lat, &[n]);
        assert_eq!(lat.min_separation(&[r(1), r(5), r(9)]).unwrap(), 4);
        assert_eq!(lat.min_separation(&[r(1), r(3), r(9)]).unwrap(), 2);
        let overlap = [chain_region(&lat, &[1, 2]), r(2)];
        assert!(matches!(
            lat.min_separation(&overlap),
            Err(Error::Disjointness(_))
        ));
    }

    #[test]
    fn region_validation() {
        let lat = Lattice::chain(3).unwrap();
        assert!(matches!(lat.region([]), Err(Error::InvalidRegion(_))));
        assert!(matches!(lat.region([3]), Err(Error::InvalidRegion(_))));
        assert!(matches!(lat.region([1, 1]), Err(Error::InvalidRegion(_))));
        assert!(matches!(
            lat.region_from_numbers(&[0]),
            Err(Error::InvalidRegion(_))
        ));
        assert_eq!(lat.region([2, 0]).unwrap().sites(), &[0, 2]);
    }

    fn lattice_and_regions() -> impl Strategy<Value = (Lattice, Vec<Region>)> {
        prop_oneof![
            (1usize..=14).prop_map(|l| Lattice::chain(l).unwrap()),
            (1usize..=4, 1usize..=4).prop_map(|(a, b)| Lattice::grid(a, b).unwrap()),
        ]
        .prop_flat_map(|lat| {
            let n = lat.len();
            let region = proptest::collection::btree_set(0..n, 1..=n.min(3));
            (Just(lat), proptest::collection::vec(region, 3))
        })
        .prop_map(|(lat, sets)| {
            let regions = sets.into_iter().map(|s| lat.region(s).unwrap()).collect();
            (lat, regions)
        })
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_satisfies_triangle((lat, rs) in lattice_and_regions()) {
            let (x, y, z) = (&rs[0], &rs[1], &rs[2]);
            let dxy = lat.region_distance(x, y).unwrap();
            prop_assert_eq!(dxy, lat.region_distance(y, x).unwrap());
            let dxz = lat.region_distance(x, z).unwrap();
            let dyz = lat.region_distance(y, z).unwrap();
            prop_assert!(dxz <= dxy + lat.region_diameter(y).unwrap() + dyz);
        }

        #[test]
        fn separation_is_permutation_invariant((lat, rs) in lattice_and_regions()) {
            let fwd = lat.min_separation(&rs).ok();
            let rev: Vec<Region> = rs.iter().rev().cloned().collect();
            prop_assert_eq!(fwd, lat.min_separation(&rev).ok());
            let rot = vec![rs[1].clone(), rs[2].clone(), rs[0].clone()];
            prop_assert_eq!(fwd, lat.min_separation(&rot).ok());
        }

        #[test]
        fn metric_is_zero_only_on_equal_sites(l in 1usize..6, w in 1usize..6) {
            let g = Lattice::grid(l, w).unwrap();
            for a in 0..g.len() {
                for b in 0..g.len() {
                    prop_assert_eq!(g.distance(a, b) == 0, a == b);
                }
            }
        }
    }
}
