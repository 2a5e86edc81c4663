//! Exhaustive and sampled checks of the covering and projection properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    covering_boxes, is_fully_interactive, is_separable_pair, projections_disjoint, sup_norm,
    BoxSpec, Config,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub x: Config,
    pub side: u32,
    pub range: i64,
    pub boxes: usize,
    pub checked: u64,
    /// Configurations outside every covering box.
    pub outside: u64,
    /// Configurations outside the cover that are not separable from `x`.
    pub violations: Vec<Config>,
}

/// Scans every `y` with coordinates in `[-range, range]` and checks that `y`
/// outside the covering boxes of `x` gives a separable pair.
pub fn covering_check(x: &Config, side: u32, range: i64) -> CoveringCheck {
    let boxes = covering_boxes(x, side);
    let bx = BoxSpec::new(x.clone(), side);
    let len = x.coords().len();
    let mut coords = vec![-range; len];
    let (mut checked, mut outside) = (0, 0);
    let mut violations = Vec::new();
    'scan: loop {
        let y = Config::from_flat(x.n_particles(), x.dim(), coords.clone())
            .expect("same shape as x");
        checked += 1;
        if !boxes.iter().any(|b| b.contains(&y)) {
            outside += 1;
            if !is_separable_pair(&bx, &BoxSpec::new(y.clone(), side)) {
                violations.push(y);
            }
        }
        for k in (0..len).rev() {
            if coords[k] < range {
                coords[k] += 1;
                continue 'scan;
            }
            coords[k] = -range;
        }
        break;
    }
    CoveringCheck {
        x: x.clone(),
        side,
        range,
        boxes: boxes.len(),
        checked,
        outside,
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheck {
    pub n: usize,
    pub side: u32,
    pub r0: u32,
    pub sampled: u64,
    /// Draws discarded before reaching `sampled` admissible pairs.
    pub rejected: u64,
    pub violations: Vec<(Config, Config)>,
}

fn random_fi_center(rng: &mut ChaCha8Rng, n: usize, side: u32, r0: u32, base: i64) -> Config {
    let spread = 2 * (side / 2) as i64 + (n as i64) * r0 as i64;
    let pos: Vec<i64> = (0..n).map(|_| base + rng.random_range(0..=spread)).collect();
    Config::line(&pos)
}

/// Samples pairs of fully interactive one-dimensional `n`-particle boxes of
/// side `side` whose centers are more than `8 * side` apart and which are
/// separable, and checks that their projections are disjoint.
pub fn projection_check(n: usize, side: u32, r0: u32, samples: u64, seed: u64) -> ProjectionCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let far = 8 * side as i64;
    let (mut sampled, mut rejected) = (0, 0);
    let mut violations = Vec::new();
    while sampled < samples {
        let base = rng.random_range(-50..=50);
        let a = random_fi_center(&mut rng, n, side, r0, base);
        let shift = rng.random_range(far + 1..=far + 4 * side as i64 + 8);
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        let b = random_fi_center(&mut rng, n, side, r0, a.particle(0)[0] + sign * shift);
        let (ba, bb) = (BoxSpec::new(a.clone(), side), BoxSpec::new(b.clone(), side));
        let admissible = sup_norm(&a, &b).expect("same shape") > far
            && is_fully_interactive(&ba, r0 as u64)
            && is_fully_interactive(&bb, r0 as u64)
            && is_separable_pair(&ba, &bb);
        if !admissible {
            rejected += 1;
            continue;
        }
        sampled += 1;
        if !projections_disjoint(&ba, &bb) {
            violations.push((a, b));
        }
    }
    ProjectionCheck {
        n,
        side,
        r0,
        sampled,
        rejected,
        violations,
    }
}
