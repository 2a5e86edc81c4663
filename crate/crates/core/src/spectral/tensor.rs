//! Partially interactive boxes: spectra of non-interacting factor pairs and
//! the Green's function built from factor eigenpairs.
//!
//! When no particle of one factor can interact with a particle of the other,
//! `H = H' ⊗ I + I ⊗ H''` as long as hopping moves a single coordinate, i.e.
//! under the `l1` adjacency. Sup adjacency lets both factors hop at once and
//! gives `(A' + I) ⊗ (A'' + I) - I` instead, so the decomposition is refused.

use serde::{Deserialize, Serialize};

use super::predicates::{is_ecnr, is_mt, previous_scale, ClassifyOptions};
use super::{diagonalize, eigenvalues, ns_threshold, SpectralData, RESOLVENT_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{point_distance, AdjacencyKind, BoxSpec, Config};
use crate::hamiltonian::{assemble, ModelParams, PotentialMap};

/// Model parameters for a factor box of `n` particles.
pub fn factor_params(params: &ModelParams, n: usize) -> ModelParams {
    ModelParams {
        n_particles: n,
        ..params.clone()
    }
}

fn cubes_may_interact(p: &[i64], hp: i64, q: &[i64], hq: i64, r0: u32) -> bool {
    (point_distance(p, q) - hp - hq).max(0) <= r0 as i64
}

/// Split of the particles into the group interacting-reachable from
/// particle 0 and the rest, when the rest is nonempty.
pub fn factorize(b: &BoxSpec, r0: u32) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = b.n_particles();
    let h = b.half_side();
    let mut group = vec![false; n];
    group[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !group[j] && cubes_may_interact(b.center.particle(i), h, b.center.particle(j), h, r0) {
                group[j] = true;
                stack.push(j);
            }
        }
    }
    let first: Vec<usize> = (0..n).filter(|&i| group[i]).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| !group[i]).collect();
    (!rest.is_empty()).then_some((first, rest))
}

fn check_pair(b1: &BoxSpec, b2: &BoxSpec, params: &ModelParams) -> Result<()> {
    if b1.dim() != params.dim || b2.dim() != params.dim {
        return Err(Error::Dimension("factor boxes must live in the model dimension".into()));
    }
    if b1.n_particles() + b2.n_particles() != params.n_particles {
        return Err(Error::Dimension(format!(
            "factors hold {} + {} particles, model has {}",
            b1.n_particles(),
            b2.n_particles(),
            params.n_particles
        )));
    }
    if params.adjacency == AdjacencyKind::Sup {
        return Err(Error::NonAdditiveHopping);
    }
    let r0 = params.r0();
    let (h1, h2) = (b1.half_side(), b2.half_side());
    for p in b1.center.particles() {
        for q in b2.center.particles() {
            if cubes_may_interact(p, h1, q, h2, r0) {
                return Err(Error::NotPartiallyInteractive(
                    b1.center.clone(),
                    b2.center.clone(),
                ));
            }
        }
    }
    Ok(())
}

/// Spectrum of the product box as all sums `λ_a + μ_b`, ascending.
pub fn pi_tensor_spectrum(
    b1: &BoxSpec,
    b2: &BoxSpec,
    params: &ModelParams,
    v: &PotentialMap,
) -> Result<Vec<f64>> {
    check_pair(b1, b2, params)?;
    let l1 = eigenvalues(&assemble(b1, &factor_params(params, b1.n_particles()), v)?);
    let l2 = eigenvalues(&assemble(b2, &factor_params(params, b2.n_particles()), v)?);
    let mut sums: Vec<f64> = l1.iter().flat_map(|a| l2.iter().map(move |b| a + b)).collect();
    sums.sort_by(f64::total_cmp);
    Ok(sums)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionForm {
    /// Sum over the first factor's eigenpairs of the second factor's Green's function.
    Primary,
    /// Sum over the second factor's eigenpairs of the first factor's Green's function.
    Mirrored,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GfExpansion {
    pub value: f64,
    pub form: ExpansionForm,
    /// Factor volume times the largest factor Green's function in the sum.
    pub bound: f64,
}

/// `G(E; u, v)` on the product box from factor eigenpairs.
///
/// `u` and `v` list the first factor's particles, then the second's. The
/// mirrored form is used when `v''` lies on the boundary of the second
/// factor.
pub fn gf_eigen_expansion(
    s1: &SpectralData,
    s2: &SpectralData,
    e: f64,
    u: &Config,
    v: &Config,
) -> Result<GfExpansion> {
    let n1 = s1.box_spec.n_particles();
    let n = n1 + s2.box_spec.n_particles();
    if u.n_particles() != n || v.n_particles() != n {
        return Err(Error::Dimension(format!(
            "configurations must have {} particles",
            n
        )));
    }
    let split = |x: &Config| {
        (
            x.select(&(0..n1).collect::<Vec<_>>()),
            x.select(&(n1..n).collect::<Vec<_>>()),
        )
    };
    let (u1, u2) = split(u);
    let (v1, v2) = split(v);
    let idx = |s: &SpectralData, x: &Config| {
        s.box_spec
            .index_of(x)
            .ok_or_else(|| Error::InvalidParameter(format!("{:?} is outside {:?}", x, s.box_spec)))
    };
    let (iu1, iv1, iu2, iv2) = (idx(s1, &u1)?, idx(s1, &v1)?, idx(s2, &u2)?, idx(s2, &v2)?);

    let scale = |s: &SpectralData| s.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let floor = RESOLVENT_FLOOR * (1.0 + scale(s1) + scale(s2));
    for &lambda in &s1.eigenvalues {
        if let Some((mu, dist)) = super::nearest_eigenvalue(&s2.eigenvalues, e - lambda) {
            if dist < floor {
                return Err(Error::ResonantEnergy {
                    energy: e,
                    eigenvalue: lambda + mu,
                    distance: dist,
                });
            }
        }
    }

    let mirrored = point_distance(u2.coords(), v2.coords()) == s2.box_spec.half_side();
    let (outer, inner, io_u, io_v, ii_u, ii_v, form) = if mirrored {
        (s2, s1, iu2, iv2, iu1, iv1, ExpansionForm::Mirrored)
    } else {
        (s1, s2, iu1, iv1, iu2, iv2, ExpansionForm::Primary)
    };
    let mut value = 0.0;
    let mut gmax = 0.0f64;
    for (a, &lambda) in outer.eigenvalues.iter().enumerate() {
        let g = inner.green_unchecked(e - lambda, ii_u, ii_v);
        gmax = gmax.max(g.abs());
        value += outer.eigenvectors[(io_u, a)] * outer.eigenvectors[(io_v, a)] * g;
    }
    Ok(GfExpansion {
        value,
        form,
        bound: outer.len() as f64 * gmax,
    })
}

/// Decay check for a partially interactive box: the hypotheses (`E`-CNR,
/// no tunneling in either factor) and the measured factor and box Green's
/// function maxima against `e^{-m'L}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiDecayReport {
    pub factors: (Vec<usize>, Vec<usize>),
    pub ecnr: bool,
    pub factor_tunneling: (bool, bool),
    pub hypotheses_met: bool,
    pub m_prime: f64,
    pub bound: f64,
    /// `max_a max_{v''} |G''(u'', v''; E - λ_a)|`.
    pub max_second_factor: f64,
    /// `max_b max_{v'} |G'(u', v'; E - μ_b)|`.
    pub max_first_factor: f64,
    pub factor_bound_holds: bool,
    pub box_ns_holds: bool,
}

/// Reduced mass `m (1 - L^{-(1-β)} - L^{-1} ln L^{N(d-1)})`.
pub fn reduced_mass(m: f64, l: u32, beta: f64, n: usize, d: usize) -> f64 {
    let lf = l as f64;
    m * (1.0 - lf.powf(-(1.0 - beta)) - (n * (d - 1)) as f64 * lf.ln() / lf)
}

fn shifted_max(inner: &SpectralData, outer: &SpectralData, e: f64) -> f64 {
    outer
        .eigenvalues
        .iter()
        .map(|l| inner.boundary_max(e - l).map(|p| p.0).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

pub fn pi_decay_check(
    b: &BoxSpec,
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    m: f64,
    opts: &ClassifyOptions,
) -> Result<PiDecayReport> {
    let (first, rest) = factorize(b, params.r0())
        .ok_or_else(|| Error::NotPartiallyInteractive(b.center.clone(), b.center.clone()))?;
    let b1 = b.factor(&first);
    let b2 = b.factor(&rest);
    let p1 = factor_params(params, first.len());
    let p2 = factor_params(params, rest.len());
    let s1 = diagonalize(&assemble(&b1, &p1, v)?)?;
    let s2 = diagonalize(&assemble(&b2, &p2, v)?)?;

    let ecnr = is_ecnr(b, params, v, e, opts.beta, opts.alpha, opts.stride)?.cnr;
    let sub_side = opts.sub_side.unwrap_or_else(|| previous_scale(b.side, opts.alpha));
    let tunnels = |fb: &BoxSpec, fp: &ModelParams| -> Result<bool> {
        if sub_side >= fb.side {
            return Ok(false);
        }
        Ok(is_mt(fb, fp, v, &opts.grid, m, sub_side, opts.stride)?.tunneling)
    };
    let t1 = tunnels(&b1, &p1)?;
    let t2 = tunnels(&b2, &p2)?;

    let m_prime = reduced_mass(m, b.side, opts.beta, b.n_particles(), b.dim());
    let bound = ns_threshold(m_prime, b.side);
    let max_second_factor = shifted_max(&s2, &s1, e);
    let max_first_factor = shifted_max(&s1, &s2, e);
    let full = diagonalize(&assemble(b, params, v)?)?;
    Ok(PiDecayReport {
        factors: (first, rest),
        ecnr,
        factor_tunneling: (t1, t2),
        hypotheses_met: ecnr && !t1 && !t2,
        m_prime,
        bound,
        max_second_factor,
        max_first_factor,
        factor_bound_holds: max_second_factor <= bound && max_first_factor <= bound,
        box_ns_holds: full.is_ens(e, m_prime).ns,
    })
}
