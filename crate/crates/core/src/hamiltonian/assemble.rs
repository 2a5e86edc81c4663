use std::io::{self, Write};

use nalgebra::DMatrix;

use super::interaction::interaction_energy;
use super::{ModelParams, PotentialMap};
use crate::error::{Error, Result};
use crate::geometry::{apply_permutation, enumerate_sites, AdjacencyKind, BoxSpec, Config, Permutation};
use crate::report::fmt17;

/// Boxes with at least this many sites are stored sparse.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorMatrix {
    Dense(DMatrix<f64>),
    /// Compressed rows; columns sorted within each row.
    Sparse {
        dim: usize,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        values: Vec<f64>,
    },
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        match self {
            OperatorMatrix::Dense(m) => m.nrows(),
            OperatorMatrix::Sparse { dim, .. } => *dim,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            OperatorMatrix::Dense(m) => m[(i, j)],
            OperatorMatrix::Sparse {
                row_ptr,
                cols,
                values,
                ..
            } => {
                let row = &cols[row_ptr[i]..row_ptr[i + 1]];
                row.binary_search(&j)
                    .map(|k| values[row_ptr[i] + k])
                    .unwrap_or(0.0)
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            OperatorMatrix::Dense(m) => m.clone(),
            OperatorMatrix::Sparse { dim, .. } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for (i, j, v) in self.triplets() {
                    m[(i, j)] = v;
                }
                m
            }
        }
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match self {
            OperatorMatrix::Dense(m) => {
                let n = m.nrows();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            OperatorMatrix::Sparse {
                dim,
                row_ptr,
                cols,
                values,
            } => (0..*dim)
                .flat_map(|i| (row_ptr[i]..row_ptr[i + 1]).map(move |k| (i, k)))
                .map(|(i, k)| (i, cols[k], values[k]))
                .filter(|t| t.2 != 0.0)
                .collect(),
        }
    }
}

/// Finite-volume Hamiltonian of one box with its lexicographic site index.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    pub box_spec: BoxSpec,
    pub adjacency: AdjacencyKind,
    sites: Vec<Config>,
    lo: Vec<i64>,
    width: i64,
    pub matrix: OperatorMatrix,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Config] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Config {
        &self.sites[i]
    }

    /// Position of `x` in the lexicographic site order.
    pub fn index_of(&self, x: &Config) -> Option<usize> {
        if !self.box_spec.contains(x) {
            return None;
        }
        Some(flat_index(x.coords(), &self.lo, self.width))
    }

    pub fn center_index(&self) -> usize {
        self.index_of(&self.box_spec.center).expect("center lies in its box")
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    /// Largest number of in-box neighbours of any site.
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.dim()];
        for (i, j, _) in self.matrix.triplets() {
            if i != j {
                deg[i] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Coordinate-format export, one `row col value` line per nonzero entry.
    pub fn write_coo<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (i, j, v) in self.matrix.triplets() {
            writeln!(w, "{} {} {}", i, j, fmt17(v))?;
        }
        Ok(())
    }
}

fn flat_index(coords: &[i64], lo: &[i64], width: i64) -> usize {
    coords
        .iter()
        .zip(lo)
        .fold(0i64, |acc, (c, l)| acc * width + (c - l)) as usize
}

fn neighbour_offsets(k: usize, adjacency: AdjacencyKind) -> Vec<Vec<i64>> {
    match adjacency {
        AdjacencyKind::L1 => (0..k)
            .flat_map(|i| {
                [-1i64, 1].into_iter().map(move |s| {
                    let mut v = vec![0; k];
                    v[i] = s;
                    v
                })
            })
            .collect(),
        AdjacencyKind::Sup => {
            let total = 3usize.pow(k as u32);
            (0..total)
                .map(|mut code| {
                    let mut v = vec![0i64; k];
                    for slot in v.iter_mut().rev() {
                        *slot = (code % 3) as i64 - 1;
                        code /= 3;
                    }
                    v
                })
                .filter(|v| v.iter().any(|&c| c != 0))
                .collect()
        }
    }
}

/// `H_Λ` on `b` with potential `v` on the single-particle base of `b`.
pub fn assemble(b: &BoxSpec, params: &ModelParams, v: &PotentialMap) -> Result<AssembledOperator> {
    if b.n_particles() != params.n_particles || b.dim() != params.dim {
        return Err(Error::Dimension(format!(
            "box has N={} d={}, model has N={} d={}",
            b.n_particles(),
            b.dim(),
            params.n_particles,
            params.dim
        )));
    }
    if b.side == 0 {
        return Err(Error::InvalidParameter("box side must be positive".into()));
    }
    let m = b
        .n_sites()
        .filter(|&m| m <= 1 << 26)
        .ok_or_else(|| Error::InvalidParameter(format!("box {:?} has too many sites", b)))?;
    let sites = enumerate_sites(b);
    let lo = b.lo();
    let width = b.width() as i64;
    let h = b.half_side();

    let mut diag = Vec::with_capacity(m);
    for x in &sites {
        let mut w = 0.0;
        for p in x.particles() {
            w += v.get(p).ok_or_else(|| Error::IncompletePotential(p.to_vec()))?;
        }
        diag.push(interaction_energy(x, &params.interaction) + params.coupling * w);
    }

    let offsets = neighbour_offsets(lo.len(), params.adjacency);
    let center = b.center.coords();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut buf = vec![0i64; lo.len()];
    for x in &sites {
        let mut row = Vec::with_capacity(offsets.len());
        'offsets: for off in &offsets {
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = x.coords()[k] + off[k];
                if (*slot - center[k]).abs() > h {
                    continue 'offsets;
                }
            }
            row.push(flat_index(&buf, &lo, width));
        }
        row.sort_unstable();
        rows.push(row);
    }

    let matrix = if m < DENSE_LIMIT {
        let mut mat = DMatrix::zeros(m, m);
        for (i, row) in rows.iter().enumerate() {
            mat[(i, i)] = diag[i];
            for &j in row {
                mat[(i, j)] = 1.0;
            }
        }
        OperatorMatrix::Dense(mat)
    } else {
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            let split = row.partition_point(|&j| j < i);
            for &j in &row[..split] {
                cols.push(j);
                values.push(1.0);
            }
            cols.push(i);
            values.push(diag[i]);
            for &j in &row[split..] {
                cols.push(j);
                values.push(1.0);
            }
            row_ptr.push(cols.len());
        }
        OperatorMatrix::Sparse {
            dim: m,
            row_ptr,
            cols,
            values,
        }
    };

    Ok(AssembledOperator {
        box_spec: b.clone(),
        adjacency: params.adjacency,
        sites,
        lo,
        width,
        matrix,
    })
}

/// `H` on the permuted box `S_σ Λ` with the same single-particle potential.
pub fn assemble_permuted(
    b: &BoxSpec,
    sigma: &Permutation,
    params: &ModelParams,
    v: &PotentialMap,
) -> Result<AssembledOperator> {
    let center = apply_permutation(&b.center, sigma)?;
    assemble(&BoxSpec::new(center, b.side), params, v)
}
