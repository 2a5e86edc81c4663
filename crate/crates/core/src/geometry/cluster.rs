//! Cluster decomposition of a configuration and the covering boxes outside
//! of which every box is separable from a given one.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{point_distance, BoxSpec, Config};

/// When two single-particle cubes count as connected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectivityRule {
    /// The cubes share a site.
    #[default]
    Overlap,
    /// The cubes share a site or contain sup-norm neighbouring sites.
    SupAdjacent,
}

/// Partition of particle indices into clusters, each block sorted and the
/// blocks ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub radius: u32,
    pub rule: ConnectivityRule,
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterPartition {
    /// Index of the block containing particle `j`.
    pub fn block_of(&self, j: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&j))
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the particles under cube connectivity at
/// side `r`.
pub fn cluster_decomposition(y: &Config, r: u32, rule: ConnectivityRule) -> ClusterPartition {
    let h = (r / 2) as i64;
    let reach = match rule {
        ConnectivityRule::Overlap => 2 * h,
        ConnectivityRule::SupAdjacent => 2 * h + 1,
    };
    let n = y.n_particles();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if point_distance(y.particle(i), y.particle(j)) <= reach {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for j in 0..n {
        let root = find(&mut parent, j);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(j);
    }
    ClusterPartition {
        radius: r,
        rule,
        clusters,
    }
}

/// Finitely many boxes such that every box `Λ_L(y)` with `y` outside their
/// union is separable from `Λ_L(x)`.
///
/// If `Λ_L(y)` is not separable from `Λ_L(x)`, every `y_j` reaches some
/// `x_i` through a chain of at most `n` overlapping cubes, so
/// `‖y_j - x_i‖ ≤ 2n⌊L/2⌋ =: R`. Each assignment `f` of particles to
/// points of `x` gives the candidate box `Π_j Λ_{2R}(x_{f(j)})`. Every
/// cluster of `x` must also be touched by some cube of `y`, so an assignment
/// is dropped when some cluster lies farther than `R + 2⌊L/2⌋` from all the
/// points `x_{f(j)}`. The boxes have side `4n⌊L/2⌋ ≤ 5nL`.
pub fn covering_boxes(x: &Config, l: u32) -> Vec<BoxSpec> {
    let n = x.n_particles();
    let d = x.dim();
    let h = (l / 2) as i64;
    let radius = 2 * n as i64 * h;
    let side = (2 * radius).max(1) as u32;
    let x_clusters = cluster_decomposition(x, l, ConnectivityRule::Overlap).clusters;

    let mut centers: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut f = vec![0usize; n];
    loop {
        let touches_all = x_clusters.iter().all(|cluster| {
            f.iter().any(|&i| {
                cluster
                    .iter()
                    .any(|&k| point_distance(x.particle(i), x.particle(k)) <= radius + 2 * h)
            })
        });
        if touches_all {
            centers.insert(f.iter().flat_map(|&i| x.particle(i).iter().copied()).collect());
        }
        let mut pos = 0;
        while pos < n {
            f[pos] += 1;
            if f[pos] < n {
                break;
            }
            f[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    centers
        .into_iter()
        .map(|c| BoxSpec::new(Config::from_flat(n, d, c).expect("shape preserved"), side))
        .collect()
}
