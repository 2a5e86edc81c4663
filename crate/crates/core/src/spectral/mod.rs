//! Diagonalization, Green's functions and box predicates.
//!
//! Two independent routes to the Green's function are kept: [`green`] solves
//! `(H - E) g = δ_x` by LU, while [`SpectralData::green`] sums the eigen
//! expansion `Σ_i v_i(x) v_i(y) / (λ_i - E)`. The predicates use the second
//! route because one diagonalization serves every energy on a grid.

mod predicates;
mod tensor;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary, BoxSpec, Config};
use crate::hamiltonian::AssembledOperator;

pub use predicates::{
    classify, is_ecnr, is_mt, is_mt_with, ClassificationReport, ClassifyOptions, EcnrOutcome,
    Flags, MtOutcome, SubBoxFamily, Witnesses,
};
pub use tensor::{
    factor_params, factorize, gf_eigen_expansion, pi_decay_check, pi_tensor_spectrum,
    ExpansionForm, GfExpansion, PiDecayReport,
};

/// Relative distance below which an energy counts as numerically on the
/// spectrum.
pub const RESOLVENT_FLOOR: f64 = 1e-12;

/// Default resonance exponent `β`.
pub const DEFAULT_BETA: f64 = 0.5;

/// Eigenpairs of a box Hamiltonian, ascending, with the box's center and
/// boundary positions.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub box_spec: BoxSpec,
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the normalized eigenvector of `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
    center: usize,
    boundary: Vec<usize>,
}

fn sorted_eigen(eig: SymmetricEigen<f64, nalgebra::Dyn>) -> (Vec<f64>, DMatrix<f64>) {
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Full symmetric eigendecomposition, with residual, normalization and (for
/// at most 1024 sites) orthogonality checks.
pub fn diagonalize(op: &AssembledOperator) -> Result<SpectralData> {
    let h = op.to_dense();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Solver("symmetric eigensolver did not converge".into()))?;
    let (eigenvalues, eigenvectors) = sorted_eigen(eig);
    check_eigenpairs(&h, &eigenvalues, &eigenvectors)?;
    let center = op.center_index();
    let boundary = boundary(&op.box_spec, op.adjacency)
        .iter()
        .map(|y| op.index_of(y).expect("boundary inside box"))
        .collect();
    Ok(SpectralData {
        box_spec: op.box_spec.clone(),
        eigenvalues,
        eigenvectors,
        center,
        boundary,
    })
}

fn check_eigenpairs(h: &DMatrix<f64>, values: &[f64], vectors: &DMatrix<f64>) -> Result<()> {
    let hv = h * vectors;
    for (i, &lambda) in values.iter().enumerate() {
        let v = vectors.column(i);
        let residual = (hv.column(i) - v * lambda).amax();
        if residual > 1e-9 * (1.0 + lambda.abs()) {
            return Err(Error::Solver(format!(
                "eigenpair {} (λ = {}) has residual {:e}",
                i, lambda, residual
            )));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Solver(format!("eigenvector {} has norm {}", i, norm)));
        }
    }
    if values.len() <= 1024 {
        let gram = vectors.transpose() * vectors;
        let n = values.len();
        for i in 0..n {
            for j in 0..i {
                if gram[(i, j)].abs() > 1e-10 {
                    return Err(Error::Solver(format!(
                        "eigenvectors {} and {} overlap by {:e}",
                        i,
                        j,
                        gram[(i, j)]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Ascending eigenvalues only.
pub fn eigenvalues(op: &AssembledOperator) -> Vec<f64> {
    let mut v: Vec<f64> = op.to_dense().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Nearest eigenvalue to `e` and its distance; `None` for an empty spectrum.
pub fn nearest_eigenvalue(eigs: &[f64], e: f64) -> Option<(f64, f64)> {
    let k = eigs.partition_point(|&l| l < e);
    [k.checked_sub(1), Some(k)]
        .into_iter()
        .flatten()
        .filter_map(|i| eigs.get(i))
        .map(|&l| (l, (e - l).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Distance below which `e` is numerically on the spectrum `eigs`.
pub fn resolvent_floor(eigs: &[f64]) -> f64 {
    let scale = eigs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    RESOLVENT_FLOOR * (1.0 + scale)
}

pub(crate) fn check_off_spectrum(eigs: &[f64], e: f64) -> Result<()> {
    if let Some((lambda, dist)) = nearest_eigenvalue(eigs, e) {
        if dist < resolvent_floor(eigs) {
            return Err(Error::ResonantEnergy {
                energy: e,
                eigenvalue: lambda,
                distance: dist,
            });
        }
    }
    Ok(())
}

/// `G(E; x, ·)` by an LU solve of `(H - E) g = δ_x`.
pub fn resolvent_column(op: &AssembledOperator, e: f64, x: &Config) -> Result<DVector<f64>> {
    let i = op
        .index_of(x)
        .ok_or_else(|| Error::InvalidParameter(format!("{:?} is outside {:?}", x, op.box_spec)))?;
    check_off_spectrum(&eigenvalues(op), e)?;
    let m = op.dim();
    let a = op.to_dense() - DMatrix::identity(m, m) * e;
    let mut rhs = DVector::zeros(m);
    rhs[i] = 1.0;
    a.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver(format!("singular resolvent at E = {}", e)))
}

/// `⟨(H - E)^{-1} δ_x, δ_y⟩` by a direct linear solve.
pub fn green(op: &AssembledOperator, e: f64, x: &Config, y: &Config) -> Result<f64> {
    let j = op
        .index_of(y)
        .ok_or_else(|| Error::InvalidParameter(format!("{:?} is outside {:?}", y, op.box_spec)))?;
    Ok(resolvent_column(op, e, x)?[j])
}

/// Whether some eigenvalue lies strictly within `e^{-L^β}` of `e`.
pub fn is_er(eigs: &[f64], e: f64, l: u32, beta: f64) -> bool {
    nearest_eigenvalue(eigs, e).is_some_and(|(_, d)| d < resonance_radius(l, beta))
}

/// `e^{-L^β}`.
pub fn resonance_radius(l: u32, beta: f64) -> f64 {
    (-(l as f64).powf(beta)).exp()
}

/// `e^{-mL}`, the singularity threshold of a box of side `L`.
pub fn ns_threshold(m: f64, l: u32) -> f64 {
    if m == 0.0 {
        1.0
    } else {
        (-m * l as f64).exp()
    }
}

/// Outcome of the center-to-boundary Green's function test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsOutcome {
    pub ns: bool,
    /// Largest `|G(E; u, y)|` over the boundary; infinite when resonant.
    pub max_value: f64,
    /// Boundary site attaining the maximum.
    pub argmax: Option<Config>,
    /// Eigenvalue within the resolvent floor, when numerically resonant.
    pub resonant_with: Option<f64>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn center_index(&self) -> usize {
        self.center
    }

    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary
    }

    /// Eigen-expansion of `G(E; x, y)` between site positions.
    pub fn green(&self, e: f64, x: usize, y: usize) -> Result<f64> {
        check_off_spectrum(&self.eigenvalues, e)?;
        Ok(self.green_unchecked(e, x, y))
    }

    pub(crate) fn green_unchecked(&self, e: f64, x: usize, y: usize) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, l)| self.eigenvectors[(x, i)] * self.eigenvectors[(y, i)] / (l - e))
            .sum()
    }

    /// Largest `|G(E; u, y)|` over boundary sites `y`, with its position;
    /// `ResonantEnergy` when `e` is numerically on the spectrum.
    pub fn boundary_max(&self, e: f64) -> Result<(f64, usize)> {
        check_off_spectrum(&self.eigenvalues, e)?;
        let inv: Vec<f64> = self.eigenvalues.iter().map(|l| 1.0 / (l - e)).collect();
        let u: Vec<f64> = inv
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.eigenvectors[(self.center, i)])
            .collect();
        let mut best = (f64::NEG_INFINITY, self.center);
        for &y in &self.boundary {
            let g: f64 = u
                .iter()
                .enumerate()
                .map(|(i, w)| w * self.eigenvectors[(y, i)])
                .sum();
            if g.abs() > best.0 {
                best = (g.abs(), y);
            }
        }
        if self.boundary.is_empty() {
            best.0 = 0.0;
        }
        Ok(best)
    }

    /// `(E, m)`-NS test of the box; numerically resonant energies are S.
    pub fn is_ens(&self, e: f64, m: f64) -> EnsOutcome {
        match self.boundary_max(e) {
            Ok((value, y)) => EnsOutcome {
                ns: value <= ns_threshold(m, self.box_spec.side),
                max_value: value,
                argmax: (!self.boundary.is_empty()).then(|| self.box_spec.site_at(y)),
                resonant_with: None,
            },
            Err(Error::ResonantEnergy { eigenvalue, .. }) => EnsOutcome {
                ns: false,
                max_value: f64::INFINITY,
                argmax: None,
                resonant_with: Some(eigenvalue),
            },
            Err(other) => unreachable!("boundary_max only fails on resonance: {}", other),
        }
    }

    /// Singular at `e` for mass `m`.
    pub fn is_singular(&self, e: f64, m: f64) -> bool {
        match self.boundary_max(e) {
            Ok((value, _)) => value > ns_threshold(m, self.box_spec.side),
            Err(_) => true,
        }
    }

    pub fn is_er(&self, e: f64, beta: f64) -> bool {
        is_er(&self.eigenvalues, e, self.box_spec.side, beta)
    }
}

/// `(E, m)`-NS test of an assembled box.
pub fn is_ens(spectral: &SpectralData, e: f64, m: f64) -> EnsOutcome {
    spectral.is_ens(e, m)
}

/// Uniform energy grid over `[lo, hi]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        EnergyGrid { lo, hi, points }
    }

    /// Grid with `per_unit` points per unit length, at least two.
    pub fn per_unit(lo: f64, hi: f64, per_unit: usize) -> Self {
        let points = ((hi - lo) * per_unit as f64).ceil().max(1.0) as usize + 1;
        EnergyGrid { lo, hi, points }
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0 || !(self.lo <= self.hi)
    }

    pub fn energies(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        if self.points == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }

    pub fn meta(&self) -> String {
        format!("uniform:{}@[{},{}]", self.points, self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Config;
    use crate::hamiltonian::{assemble, ModelParams};

    fn op_for(b: &BoxSpec, p: &ModelParams, realization: u64) -> AssembledOperator {
        assemble(b, p, &p.potential_for(b, realization)).unwrap()
    }

    #[test]
    fn free_chain_spectrum() {
        let b = BoxSpec::new(Config::line(&[0]), 2);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let s = diagonalize(&op_for(&b, &p, 0)).unwrap();
        let r2 = 2f64.sqrt();
        for (got, want) in s.eigenvalues.iter().zip([-r2, 0.0, r2]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn one_site_green_is_scalar_inverse() {
        let b = BoxSpec::new(Config::line(&[0]), 1);
        let p = ModelParams::new(1, 1, 2.0, 3);
        let op = op_for(&b, &p, 1);
        let a = op.matrix.get(0, 0);
        let g = green(&op, 0.25, &b.center, &b.center).unwrap();
        assert!((g - 1.0 / (a - 0.25)).abs() < 1e-14);
        assert!(matches!(
            green(&op, a, &b.center, &b.center),
            Err(Error::ResonantEnergy { .. })
        ));
    }

    #[test]
    fn free_chain_green_matches_closed_form() {
        let b = BoxSpec::new(Config::line(&[0]), 2);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let op = op_for(&b, &p, 0);
        let x = Config::line(&[0]);
        let y = Config::line(&[1]);
        // cofactor of [[-5,1,0],[1,-5,1],[0,1,-5]] over its determinant -115
        let want = -1.0 / 23.0;
        let got = green(&op, 5.0, &x, &y).unwrap();
        assert!((got - want).abs() < 1e-14, "{} vs {}", got, want);
        let s = diagonalize(&op).unwrap();
        let via_eigen = s.green(5.0, op.index_of(&x).unwrap(), op.index_of(&y).unwrap()).unwrap();
        assert!((via_eigen - want).abs() < 1e-13);
    }

    #[test]
    fn two_routes_agree_on_random_boxes() {
        for (center, side, n) in [(vec![0, 3], 4u32, 2usize), (vec![1], 10, 1), (vec![0, 1, 4], 2, 3)] {
            let b = BoxSpec::new(Config::line(&center), side);
            let p = ModelParams::new(1, n, 3.0, 5);
            for r in 0..3 {
                let op = op_for(&b, &p, r);
                let s = diagonalize(&op).unwrap();
                for (e, xi, yi) in [(0.37, 0, op.dim() - 1), (-2.1, op.dim() / 2, 1), (4.4, 2, 2)] {
                    let x = op.site(xi).clone();
                    let y = op.site(yi).clone();
                    let direct = green(&op, e, &x, &y).unwrap();
                    let sym = green(&op, e, &y, &x).unwrap();
                    let expansion = s.green(e, xi, yi).unwrap();
                    assert!((direct - sym).abs() <= 1e-10 * (1.0 + direct.abs()));
                    assert!((direct - expansion).abs() <= 1e-9 * direct.abs().max(1e-12));
                }
            }
        }
    }

    #[test]
    fn resonance_examples() {
        let eigs = [-1.0, 0.5, 2.0];
        assert!(is_er(&eigs, -1.0, 16, 0.5));
        assert!(!is_er(&eigs, 0.5 + 2.0 * resonance_radius(16, 0.5), 16, 0.5));
        assert!((resonance_radius(16, 0.5) - (-4f64).exp()).abs() < 1e-15);
        assert!((resonance_radius(16, 0.5) - 0.0183).abs() < 1e-4);
    }

    #[test]
    fn ns_threshold_limits() {
        assert_eq!(ns_threshold(0.0, 7), 1.0);
        assert_eq!(ns_threshold(f64::INFINITY, 7), 0.0);
        assert_eq!(ns_threshold(f64::NEG_INFINITY, 7), f64::INFINITY);
    }

    #[test]
    fn far_energy_is_non_singular_for_free_box() {
        let b = BoxSpec::new(Config::line(&[0]), 8);
        let p = ModelParams::new(1, 1, 0.0, 0);
        let s = diagonalize(&op_for(&b, &p, 0)).unwrap();
        let out = s.is_ens(20.0, 0.5);
        assert!(out.ns, "{:?}", out);
        assert!(out.max_value > 0.0);
        assert!(s.is_singular(s.eigenvalues[3], 0.5));
    }

    #[test]
    fn ns_monotone_in_mass() {
        let b = BoxSpec::new(Config::line(&[0, 2]), 4);
        let p = ModelParams::new(1, 2, 4.0, 2);
        let s = diagonalize(&op_for(&b, &p, 7)).unwrap();
        for e in [-1.3, 0.2, 3.7, 9.0] {
            let masses = [2.0, 1.0, 0.5, 0.1, 0.0, -0.5];
            let flags: Vec<bool> = masses.iter().map(|&m| s.is_ens(e, m).ns).collect();
            for w in flags.windows(2) {
                assert!(!w[0] || w[1]);
            }
        }
    }

    #[test]
    fn resonant_energy_is_singular() {
        let b = BoxSpec::new(Config::line(&[0]), 1);
        let p = ModelParams::new(1, 1, 1.0, 4);
        let s = diagonalize(&op_for(&b, &p, 0)).unwrap();
        let out = s.is_ens(s.eigenvalues[0], -10.0);
        assert!(!out.ns);
        assert_eq!(out.resonant_with, Some(s.eigenvalues[0]));
        let near = s.eigenvalues[0] + 0.5 * resonance_radius(1, 0.5) * 1e-3;
        assert!(!s.is_ens(near, 0.0).ns);
    }

    #[test]
    fn grid_edges() {
        assert!(EnergyGrid::new(1.0, -1.0, 10).energies().is_empty());
        assert_eq!(EnergyGrid::new(-1.0, 1.0, 1).energies(), vec![0.0]);
        let g = EnergyGrid::new(-1.0, 1.0, 64).energies();
        assert_eq!(g.len(), 64);
        assert_eq!((g[0], g[63]), (-1.0, 1.0));
        assert_eq!(EnergyGrid::per_unit(-1.0, 1.0, 64).points, 129);
    }

    #[test]
    fn gershgorin_bound_holds() {
        let b = BoxSpec::new(Config::line(&[0, 1]), 4);
        let p = ModelParams::new(1, 2, 6.0, 9).with_interaction(
            crate::hamiltonian::InteractionSpec::Constant { r0: 1, u0: 2.0 },
        );
        let op = op_for(&b, &p, 3);
        let diag = op.diagonal();
        let deg = op.max_degree() as f64;
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - deg;
        let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + deg;
        let s = diagonalize(&op).unwrap();
        assert!(s.eigenvalues.iter().all(|&l| l >= lo - 1e-12 && l <= hi + 1e-12));
    }
}
