//! Diagonal set, interaction classes, and separability of box pairs.
//!
//! All tests here are closed-form. Two single-particle cubes of common side
//! `L` around `p` and `q` share a site iff `‖p - q‖ ≤ 2⌊L/2⌋`, and the
//! site-set conditions reduce to pairwise center distances.

use serde::{Deserialize, Serialize};

use super::{point_distance, BoxSpec, Config};

/// Whether every pair of particles sits within `N·R` of each other.
pub fn in_diagonal_set(x: &Config, r: u64) -> bool {
    let n = x.n_particles();
    let limit = (n as u64).saturating_mul(r);
    (0..n).all(|i| {
        (i + 1..n).all(|j| point_distance(x.particle(i), x.particle(j)) as u64 <= limit)
    })
}

/// Whether the box meets the widened diagonal `D_{r0}`.
///
/// The spread of particle coordinates can be chosen independently in every
/// coordinate direction, so the minimal achievable pairwise maximum is the
/// largest per-direction spread of the centers less the cube width.
pub fn is_fully_interactive(b: &BoxSpec, r0: u64) -> bool {
    let n = b.n_particles();
    let d = b.dim();
    let h = b.half_side();
    let limit = (n as i64).saturating_mul(r0 as i64);
    (0..d).all(|k| {
        let (lo, hi) = b
            .center
            .particles()
            .map(|p| p[k])
            .fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (hi - lo - 2 * h).max(0) <= limit
    })
}

/// Interaction class of a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxKind {
    #[serde(rename = "FI")]
    FullyInteractive,
    #[serde(rename = "PI")]
    PartiallyInteractive,
}

impl BoxKind {
    pub fn of(b: &BoxSpec, r0: u64) -> Self {
        if is_fully_interactive(b, r0) {
            BoxKind::FullyInteractive
        } else {
            BoxKind::PartiallyInteractive
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoxKind::FullyInteractive => "FI",
            BoxKind::PartiallyInteractive => "PI",
        }
    }
}

/// Interaction classes of a pair of boxes, unordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    #[serde(rename = "FI/FI")]
    FiFi,
    #[serde(rename = "PI/PI")]
    PiPi,
    #[serde(rename = "mixed")]
    Mixed,
}

impl PairKind {
    pub fn label(self) -> &'static str {
        match self {
            PairKind::FiFi => "FI/FI",
            PairKind::PiPi => "PI/PI",
            PairKind::Mixed => "mixed",
        }
    }
}

pub fn pair_kind(a: &BoxSpec, b: &BoxSpec, r0: u64) -> PairKind {
    match (BoxKind::of(a, r0), BoxKind::of(b, r0)) {
        (BoxKind::FullyInteractive, BoxKind::FullyInteractive) => PairKind::FiFi,
        (BoxKind::PartiallyInteractive, BoxKind::PartiallyInteractive) => PairKind::PiPi,
        _ => PairKind::Mixed,
    }
}

fn cubes_meet(p: &[i64], q: &[i64], h: i64) -> bool {
    point_distance(p, q) <= 2 * h
}

/// Whether `box_y` is `J`-separable from `box_x`; `j` lists zero-based
/// particle indices of `box_y`.
///
/// Boxes of different shape or side are never separable; an empty `j` is
/// rejected the same way.
pub fn is_j_separable(box_y: &BoxSpec, box_x: &BoxSpec, j: &[usize]) -> bool {
    let n = box_y.n_particles();
    if j.is_empty()
        || !box_y.center.same_shape(&box_x.center)
        || box_y.side != box_x.side
        || j.iter().any(|&i| i >= n)
    {
        return false;
    }
    let mut in_j = vec![false; n];
    for &i in j {
        in_j[i] = true;
    }
    separable_mask(box_y, box_x, &in_j)
}

fn separable_mask(box_y: &BoxSpec, box_x: &BoxSpec, in_j: &[bool]) -> bool {
    let h = box_y.half_side();
    let y = &box_y.center;
    let x = &box_x.center;
    let n = y.n_particles();
    for a in (0..n).filter(|&a| in_j[a]) {
        let ya = y.particle(a);
        if (0..n).any(|b| !in_j[b] && cubes_meet(ya, y.particle(b), h)) {
            return false;
        }
        if x.particles().any(|xb| cubes_meet(ya, xb, h)) {
            return false;
        }
    }
    true
}

/// Whether one box of the pair is `J`-separable from the other for some
/// nonempty `J`, checked over all `2^n - 1` subsets in both directions.
pub fn is_separable_pair(a: &BoxSpec, b: &BoxSpec) -> bool {
    if !a.center.same_shape(&b.center) || a.side != b.side {
        return false;
    }
    let n = a.n_particles();
    assert!(n < usize::BITS as usize, "too many particles for subset scan");
    let mut in_j = vec![false; n];
    for mask in 1usize..(1 << n) {
        for (i, slot) in in_j.iter_mut().enumerate() {
            *slot = mask >> i & 1 == 1;
        }
        if separable_mask(b, a, &in_j) || separable_mask(a, b, &in_j) {
            return true;
        }
    }
    false
}

/// Whether the single-particle bases `Π A` and `Π B` are disjoint.
pub fn projections_disjoint(a: &BoxSpec, b: &BoxSpec) -> bool {
    let h = a.half_side() + b.half_side();
    a.center
        .particles()
        .all(|p| b.center.particles().all(|q| point_distance(p, q) > h))
}
