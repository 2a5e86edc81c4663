//! Multi-particle lattice geometry.
//!
//! An N-particle configuration is a point of `Z^{Nd}`, stored flat in
//! particle-major order. Boxes are Cartesian products of N single-particle
//! cubes that share one side length; the site set of a cube of side `L`
//! around `u` is `[u - L/2, u + L/2] ∩ Z` in every coordinate, so it always
//! holds `2⌊L/2⌋ + 1` integers per coordinate.

mod checks;
mod cluster;
mod separability;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{covering_check, projection_check, CoveringCheck, ProjectionCheck};
pub use cluster::{cluster_decomposition, covering_boxes, ClusterPartition, ConnectivityRule};
pub use separability::{
    in_diagonal_set, is_fully_interactive, is_j_separable, is_separable_pair, pair_kind,
    projections_disjoint, BoxKind, PairKind,
};

/// Lattice adjacency used for "distance one" neighbours.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyKind {
    /// `‖x - y‖_∞ = 1`: `3^{Nd} - 1` neighbours.
    #[default]
    Sup,
    /// `‖x - y‖_1 = 1`: `2Nd` neighbours.
    L1,
}

/// A configuration `(x_1, …, x_N)` with `x_j ∈ Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct Config {
    n: usize,
    d: usize,
    coords: Vec<i64>,
}

impl Config {
    pub fn new(points: Vec<Vec<i64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Dimension("configuration has no particles".into()));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::Dimension("lattice dimension must be positive".into()));
        }
        if let Some(bad) = points.iter().position(|p| p.len() != d) {
            return Err(Error::Dimension(format!(
                "particle {} has {} coordinates, expected {}",
                bad,
                points[bad].len(),
                d
            )));
        }
        Ok(Config {
            n,
            d,
            coords: points.into_iter().flatten().collect(),
        })
    }

    pub fn from_flat(n: usize, d: usize, coords: Vec<i64>) -> Result<Self> {
        if n == 0 || d == 0 || coords.len() != n * d {
            return Err(Error::Dimension(format!(
                "{} coordinates cannot form {} particles in dimension {}",
                coords.len(),
                n,
                d
            )));
        }
        Ok(Config { n, d, coords })
    }

    /// One-dimensional configuration from particle positions.
    pub fn line(positions: &[i64]) -> Self {
        Config::from_flat(positions.len(), 1, positions.to_vec()).expect("nonempty positions")
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn particle(&self, j: usize) -> &[i64] {
        &self.coords[j * self.d..(j + 1) * self.d]
    }

    pub fn particles(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.coords.chunks(self.d)
    }

    /// Sub-configuration of the listed particles, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Config {
        let coords = indices
            .iter()
            .flat_map(|&j| self.particle(j).iter().copied())
            .collect();
        Config {
            n: indices.len(),
            d: self.d,
            coords,
        }
    }

    /// `(self, other)` as one configuration with `self`'s particles first.
    pub fn concat(&self, other: &Config) -> Result<Config> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "cannot join dimension {} with dimension {}",
                self.d, other.d
            )));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(Config {
            n: self.n + other.n,
            d: self.d,
            coords,
        })
    }

    pub fn same_shape(&self, other: &Config) -> bool {
        self.n == other.n && self.d == other.d
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, p) in self.particles().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{:?}", p)?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<Vec<i64>>> for Config {
    type Error = Error;
    fn try_from(points: Vec<Vec<i64>>) -> Result<Self> {
        Config::new(points)
    }
}

impl From<Config> for Vec<Vec<i64>> {
    fn from(c: Config) -> Self {
        c.particles().map(|p| p.to_vec()).collect()
    }
}

/// Sup-norm distance between two configurations of the same shape.
pub fn sup_norm(a: &Config, b: &Config) -> Result<i64> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "shapes (N={}, d={}) and (N={}, d={}) differ",
            a.n, a.d, b.n, b.d
        )));
    }
    Ok(point_distance(&a.coords, &b.coords))
}

/// Sup-norm distance between two points given as coordinate slices.
pub(crate) fn point_distance(a: &[i64], b: &[i64]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or(0)
}

/// A permutation `σ` of particle labels, stored zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "{:?} is not a permutation",
                    images
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(a, b);
        Permutation(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &i) in self.0.iter().enumerate() {
            inv[i] = j;
        }
        Permutation(inv)
    }

    /// `(self ∘ other)(j) = self(other(j))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&j| self.0[j]).collect())
    }
}

/// `S_σ x = (x_{σ(1)}, …, x_{σ(N)})`.
pub fn apply_permutation(x: &Config, sigma: &Permutation) -> Result<Config> {
    if sigma.len() != x.n {
        return Err(Error::Dimension(format!(
            "permutation of {} labels applied to {} particles",
            sigma.len(),
            x.n
        )));
    }
    Ok(x.select(sigma.images()))
}

/// An N-particle box `Λ_L(u)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    pub center: Config,
    pub side: u32,
}

impl fmt::Debug for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ_{}{:?}", self.side, self.center)
    }
}

impl BoxSpec {
    pub fn new(center: Config, side: u32) -> Self {
        BoxSpec { center, side }
    }

    pub fn n_particles(&self) -> usize {
        self.center.n
    }

    pub fn dim(&self) -> usize {
        self.center.d
    }

    /// `⌊L/2⌋`, the sup-norm radius of every single-particle cube.
    pub fn half_side(&self) -> i64 {
        (self.side / 2) as i64
    }

    /// Number of integers per coordinate, `2⌊L/2⌋ + 1`.
    pub fn width(&self) -> usize {
        2 * (self.side as usize / 2) + 1
    }

    /// Total number of sites, `(2⌊L/2⌋+1)^{Nd}`; `None` on overflow.
    pub fn n_sites(&self) -> Option<usize> {
        let k = u32::try_from(self.center.coords.len()).ok()?;
        self.width().checked_pow(k)
    }

    pub fn contains(&self, x: &Config) -> bool {
        x.same_shape(&self.center) && point_distance(&x.coords, &self.center.coords) <= self.half_side()
    }

    /// Whether `inner` is a subset of `self` (same shape required).
    pub fn contains_box(&self, inner: &BoxSpec) -> bool {
        inner.center.same_shape(&self.center)
            && point_distance(&inner.center.coords, &self.center.coords) + inner.half_side()
                <= self.half_side()
    }

    /// Lexicographic enumeration of all sites.
    pub fn sites(&self) -> Vec<Config> {
        enumerate_sites(self)
    }

    /// Single-particle cube `Π_j Λ = Λ_L(u_j)`.
    pub fn projection(&self, j: usize) -> BoxSpec {
        BoxSpec {
            center: self.center.select(&[j]),
            side: self.side,
        }
    }

    /// Factor box over the listed particles.
    pub fn factor(&self, particles: &[usize]) -> BoxSpec {
        BoxSpec {
            center: self.center.select(particles),
            side: self.side,
        }
    }

    /// Sites of the two boxes overlap (same shape required).
    pub fn intersects(&self, other: &BoxSpec) -> bool {
        self.center.same_shape(&other.center)
            && point_distance(&self.center.coords, &other.center.coords)
                <= self.half_side() + other.half_side()
    }

    /// All centers `v` with `Λ_{sub_side}(v) ⊆ self`, in lexicographic order,
    /// restricted to the sub-lattice `lo + stride·Z` in every coordinate.
    pub fn sub_box_centers(&self, sub_side: u32, stride: u32) -> Vec<Config> {
        let slack = self.half_side() - (sub_side / 2) as i64;
        if slack < 0 {
            return Vec::new();
        }
        let stride = stride.max(1) as i64;
        let ranges: Vec<Vec<i64>> = self
            .center
            .coords
            .iter()
            .map(|&c| {
                let mut r: Vec<i64> = (c - slack..=c + slack).step_by(stride as usize).collect();
                if r.is_empty() {
                    r.push(c);
                }
                r
            })
            .collect();
        cartesian(&ranges)
            .into_iter()
            .map(|coords| Config {
                n: self.center.n,
                d: self.center.d,
                coords,
            })
            .collect()
    }

    pub fn sub_boxes(&self, sub_side: u32, stride: u32) -> Vec<BoxSpec> {
        self.sub_box_centers(sub_side, stride)
            .into_iter()
            .map(|c| BoxSpec::new(c, sub_side))
            .collect()
    }

    /// Position of `x` in the lexicographic enumeration.
    pub fn index_of(&self, x: &Config) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let w = self.width() as i64;
        let lo = self.lo();
        Some(
            x.coords
                .iter()
                .zip(&lo)
                .fold(0i64, |acc, (c, l)| acc * w + (c - l)) as usize,
        )
    }

    /// Site at position `index` of the lexicographic enumeration.
    pub fn site_at(&self, mut index: usize) -> Config {
        let w = self.width();
        let lo = self.lo();
        let mut coords = vec![0i64; lo.len()];
        for k in (0..lo.len()).rev() {
            coords[k] = lo[k] + (index % w) as i64;
            index /= w;
        }
        Config {
            n: self.center.n,
            d: self.center.d,
            coords,
        }
    }

    pub(crate) fn lo(&self) -> Vec<i64> {
        let h = self.half_side();
        self.center.coords.iter().map(|c| c - h).collect()
    }
}

fn cartesian(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::with_capacity(ranges.len())];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for &v in r {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All configurations in the box, lexicographic in the flat coordinates.
pub fn enumerate_sites(b: &BoxSpec) -> Vec<Config> {
    let h = b.half_side();
    let ranges: Vec<Vec<i64>> = b
        .center
        .coords
        .iter()
        .map(|&c| (c - h..=c + h).collect())
        .collect();
    cartesian(&ranges)
        .into_iter()
        .map(|coords| Config {
            n: b.center.n,
            d: b.center.d,
            coords,
        })
        .collect()
}

/// Interior boundary: sites with a neighbour at distance one outside the box.
///
/// Both adjacency conventions move a single coordinate by one, so the
/// boundary is the outer shell either way; the argument is kept so callers
/// state which convention they assume.
pub fn boundary(b: &BoxSpec, _adjacency: AdjacencyKind) -> Vec<Config> {
    let h = b.half_side();
    enumerate_sites(b)
        .into_iter()
        .filter(|x| {
            x.coords
                .iter()
                .zip(&b.center.coords)
                .any(|(xi, ci)| (xi - ci).abs() == h)
        })
        .collect()
}

/// Per-particle cubes `Π_j` and the union `Π` of their site sets in `Z^d`.
pub fn projections(b: &BoxSpec) -> (Vec<BoxSpec>, BTreeSet<Vec<i64>>) {
    let cubes: Vec<BoxSpec> = (0..b.n_particles()).map(|j| b.projection(j)).collect();
    let union = cubes
        .iter()
        .flat_map(|c| enumerate_sites(c).into_iter().map(|s| s.coords))
        .collect();
    (cubes, union)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[&[i64]]) -> Config {
        Config::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&Config::line(&[0, 0]), &Config::line(&[1, -2])).unwrap(), 2);
        let a = Config::line(&[3, 4]);
        assert_eq!(sup_norm(&a, &a).unwrap(), 0);
        assert_eq!(sup_norm(&cfg(&[&[0, 0]]), &cfg(&[&[3, -5]])).unwrap(), 5);
    }

    #[test]
    fn sup_norm_rejects_shape_mismatch() {
        let err = sup_norm(&Config::line(&[0]), &Config::line(&[0, 1])).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn config_rejects_ragged_points() {
        assert!(Config::new(vec![vec![0, 1], vec![2]]).is_err());
        assert!(Config::new(vec![]).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let b = BoxSpec::new(Config::line(&[0]), 2);
        let sites: Vec<i64> = enumerate_sites(&b).iter().map(|s| s.coords[0]).collect();
        assert_eq!(sites, vec![-1, 0, 1]);
        assert_eq!(enumerate_sites(&BoxSpec::new(Config::line(&[0, 0]), 2)).len(), 9);
        let b2 = BoxSpec::new(cfg(&[&[0, 0]]), 4);
        assert_eq!(enumerate_sites(&b2).len(), 25);
        assert_eq!(b2.n_sites(), Some(25));
    }

    #[test]
    fn odd_side_rounds_down() {
        let b = BoxSpec::new(Config::line(&[0]), 3);
        assert_eq!(b.width(), 3);
        assert_eq!(enumerate_sites(&b).len(), 3);
    }

    #[test]
    fn boundary_examples() {
        let b = BoxSpec::new(Config::line(&[0]), 2);
        let bd: Vec<i64> = boundary(&b, AdjacencyKind::Sup).iter().map(|s| s.coords[0]).collect();
        assert_eq!(bd, vec![-1, 1]);
        assert_eq!(boundary(&BoxSpec::new(cfg(&[&[0, 0]]), 2), AdjacencyKind::Sup).len(), 8);
        let b3 = BoxSpec::new(Config::line(&[0, 0]), 2);
        let bd3 = boundary(&b3, AdjacencyKind::Sup);
        assert_eq!(bd3.len(), 8);
        assert!(!bd3.contains(&Config::line(&[0, 0])));
    }

    #[test]
    fn boundary_matches_neighbour_scan() {
        for (center, side) in [
            (Config::line(&[0, 0]), 2u32),
            (Config::line(&[1, -3]), 4),
            (cfg(&[&[0, 1]]), 3),
            (Config::line(&[0, 2, 5]), 2),
        ] {
            let b = BoxSpec::new(center, side);
            for adj in [AdjacencyKind::Sup, AdjacencyKind::L1] {
                let brute: Vec<Config> = enumerate_sites(&b)
                    .into_iter()
                    .filter(|y| {
                        neighbour_offsets(y.coords.len(), adj).iter().any(|off| {
                            let v: Vec<i64> = y.coords.iter().zip(off).map(|(a, o)| a + o).collect();
                            !b.contains(&Config::from_flat(y.n, y.d, v).unwrap())
                        })
                    })
                    .collect();
                assert_eq!(boundary(&b, adj), brute);
                assert!(brute.len() < b.n_sites().unwrap());
            }
        }
    }

    fn neighbour_offsets(k: usize, adj: AdjacencyKind) -> Vec<Vec<i64>> {
        match adj {
            AdjacencyKind::L1 => (0..k)
                .flat_map(|i| {
                    [-1, 1].into_iter().map(move |s| {
                        let mut v = vec![0; k];
                        v[i] = s;
                        v
                    })
                })
                .collect(),
            AdjacencyKind::Sup => cartesian(&vec![vec![-1, 0, 1]; k])
                .into_iter()
                .filter(|v| v.iter().any(|&x| x != 0))
                .collect(),
        }
    }

    #[test]
    fn projection_examples() {
        let (cubes, union) = projections(&BoxSpec::new(Config::line(&[0, 10]), 2));
        assert_eq!(cubes.len(), 2);
        assert_eq!(
            union.into_iter().map(|p| p[0]).collect::<Vec<_>>(),
            vec![-1, 0, 1, 9, 10, 11]
        );
        let (_, union) = projections(&BoxSpec::new(Config::line(&[0, 1]), 2));
        assert_eq!(union.into_iter().map(|p| p[0]).collect::<Vec<_>>(), vec![-1, 0, 1, 2]);
        let (_, union) = projections(&BoxSpec::new(Config::line(&[0, 0, 5]), 2));
        assert_eq!(union.len(), 6);
    }

    #[test]
    fn permutation_examples() {
        let x = Config::line(&[0, 5]);
        assert_eq!(apply_permutation(&x, &Permutation::identity(2)).unwrap(), x);
        let swap = Permutation::transposition(2, 0, 1);
        assert_eq!(apply_permutation(&x, &swap).unwrap(), Config::line(&[5, 0]));
        assert_eq!(
            apply_permutation(&apply_permutation(&x, &swap).unwrap(), &swap).unwrap(),
            x
        );

        let sigma = Permutation::new(vec![2, 0, 1]).unwrap();
        let y = Config::line(&[7, 8, 9]);
        let moved = apply_permutation(&y, &sigma).unwrap();
        assert_eq!(moved, Config::line(&[9, 7, 8]));
        assert_eq!(apply_permutation(&moved, &sigma.inverse()).unwrap(), y);
        assert_eq!(sigma.compose(&sigma.inverse()), Permutation::identity(3));
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn sub_box_centers_respect_containment() {
        let b = BoxSpec::new(Config::line(&[0]), 8);
        let centers = b.sub_box_centers(4, 1);
        assert_eq!(centers.len(), 5);
        for c in b.sub_boxes(4, 1) {
            assert!(b.contains_box(&c));
        }
        assert!(b.sub_box_centers(10, 1).is_empty());
    }

    #[test]
    fn site_at_inverts_enumeration() {
        let b = BoxSpec::new(Config::line(&[2, -1]), 4);
        for (i, s) in enumerate_sites(&b).into_iter().enumerate() {
            assert_eq!(b.site_at(i), s);
            assert_eq!(b.index_of(&s), Some(i));
        }
    }

    #[test]
    fn config_serde_is_nested_lists() {
        let c = cfg(&[&[0, 1], &[2, 3]]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, "[[0,1],[2,3]]");
        let back: Config = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
