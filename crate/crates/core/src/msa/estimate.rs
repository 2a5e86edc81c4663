//! Monte Carlo estimators over disorder realizations.
//!
//! Realization `r` uses potential realization index `r`, for `r` in
//! `0..trials`. Outcomes are gathered in index order and only their count
//! is kept, so the estimate does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geometry::{is_separable_pair, pair_kind, BoxSpec, PairKind};
use crate::hamiltonian::{assemble, ModelParams};
use crate::spectral::{diagonalize, eigenvalues, is_er, resonance_radius, EnergyGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub event: String,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    /// `"exact"` for resonance events, the energy grid otherwise.
    pub grid_meta: String,
    /// Fitted exponent for estimators that report one.
    pub exponent: Option<f64>,
    pub exponent_ci95: Option<(f64, f64)>,
    pub pair_kind: Option<PairKind>,
    pub notes: Vec<String>,
    /// Per-realization outcomes in index order.
    #[serde(skip)]
    pub outcomes: Vec<bool>,
}

impl McEstimate {
    pub fn new(event: &str, trials: u64, hits: u64, grid_meta: String) -> Self {
        McEstimate {
            event: event.to_string(),
            trials,
            hits,
            p_hat: hits as f64 / trials as f64,
            ci95: clopper_pearson(hits, trials, 0.95),
            grid_meta,
            exponent: None,
            exponent_ci95: None,
            pair_kind: None,
            outcomes: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Whether the two 95% intervals are disjoint.
    pub fn from_outcomes(event: &str, outcomes: Vec<bool>, grid_meta: String) -> Self {
        let hits = outcomes.iter().filter(|&&o| o).count() as u64;
        let mut est = McEstimate::new(event, outcomes.len() as u64, hits, grid_meta);
        est.outcomes = outcomes;
        est
    }

    pub fn separated_from(&self, other: &McEstimate) -> bool {
        self.ci95.1 < other.ci95.0 || other.ci95.1 < self.ci95.0
    }
}

/// Exact two-sided Clopper–Pearson interval at the given confidence.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(hits <= trials && trials > 0, "need 0 ≤ hits ≤ trials, trials > 0");
    let tail = 0.5 * (1.0 - confidence);
    let (h, n) = (hits as f64, trials as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(h, n - h + 1.0)
            .expect("positive shape")
            .inverse_cdf(tail)
    };
    let hi = if hits == trials {
        1.0
    } else {
        Beta::new(h + 1.0, n - h)
            .expect("positive shape")
            .inverse_cdf(1.0 - tail)
    };
    (lo, hi)
}

/// Evaluates `event` on realizations `0..trials` in parallel, returning the
/// outcomes in index order. The first failing realization, in index order,
/// is reported.
pub fn run_trial_outcomes<F>(trials: u64, event: F) -> Result<Vec<bool>>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let outcomes: Vec<Result<bool>> = (0..trials).into_par_iter().map(&event).collect();
    outcomes
        .into_iter()
        .enumerate()
        .map(|(r, out)| out.map_err(|e| e.at_realization(r as u64)))
        .collect()
}

/// Number of hits among realizations `0..trials`.
pub fn run_trials<F>(trials: u64, event: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    Ok(run_trial_outcomes(trials, event)?.iter().filter(|&&o| o).count() as u64)
}

/// Whether some energy is within `e^{-L^β}` of both spectra, i.e. whether two
/// resonance intervals overlap. Both inputs must be sorted.
pub fn exists_e_both_resonant(a: &[f64], b: &[f64], l: u32, beta: f64) -> bool {
    let reach = 2.0 * resonance_radius(l, beta);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if (a[i] - b[j]).abs() < reach {
            return true;
        }
        if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    false
}

/// Probability that the box is `E`-R.
pub fn estimate_ws1(
    b: &BoxSpec,
    params: &ModelParams,
    e: f64,
    beta: f64,
    trials: u64,
) -> Result<McEstimate> {
    let outcomes = run_trial_outcomes(trials, |r| {
        let op = assemble(b, params, &params.potential_for(b, r))?;
        Ok(is_er(&eigenvalues(&op), e, b.side, beta))
    })?;
    Ok(McEstimate::from_outcomes("WS1", outcomes, "exact".into()))
}

/// Probability that some energy makes both boxes resonant.
pub fn estimate_ws2(
    a: &BoxSpec,
    b: &BoxSpec,
    params: &ModelParams,
    beta: f64,
    trials: u64,
) -> Result<McEstimate> {
    if a.side != b.side {
        return Err(Error::InvalidParameter("both boxes need the same side".into()));
    }
    let outcomes = run_trial_outcomes(trials, |r| {
        let v = params.potential_for_all(&[a, b], r);
        let ea = eigenvalues(&assemble(a, params, &v)?);
        let eb = eigenvalues(&assemble(b, params, &v)?);
        Ok(exists_e_both_resonant(&ea, &eb, a.side, beta))
    })?;
    let mut est = McEstimate::from_outcomes("WS2", outcomes, "exact".into());
    if !is_separable_pair(a, b) {
        log::warn!("WS2 boxes {:?} and {:?} are not separable", a, b);
        est.notes.push("boxes are not separable".into());
    }
    Ok(est)
}

/// Probability that the box is `(E, m0)`-S for some grid energy, with the
/// fitted exponent `p = -ln p_hat / (2 ln L0)` and its interval.
pub fn estimate_s0(
    b: &BoxSpec,
    params: &ModelParams,
    grid: &EnergyGrid,
    m0: f64,
    trials: u64,
) -> Result<McEstimate> {
    let energies = grid.energies();
    let outcomes = run_trial_outcomes(trials, |r| {
        if energies.is_empty() {
            return Ok(false);
        }
        let s = diagonalize(&assemble(b, params, &params.potential_for(b, r))?)?;
        Ok(energies.iter().any(|&e| s.is_singular(e, m0)))
    })?;
    let mut est = McEstimate::from_outcomes("S0", outcomes, grid.meta());
    let scale = 2.0 * (b.side as f64).ln();
    let exponent = |p: f64| if p > 0.0 { -p.ln() / scale } else { f64::INFINITY };
    if b.side > 1 {
        if est.hits > 0 {
            est.exponent = Some(exponent(est.p_hat));
        }
        est.exponent_ci95 = Some((exponent(est.ci95.1), exponent(est.ci95.0)));
    }
    Ok(est)
}

/// Probability that some grid energy makes both boxes `(E, m)`-S.
pub fn estimate_ds(
    a: &BoxSpec,
    b: &BoxSpec,
    params: &ModelParams,
    grid: &EnergyGrid,
    m: f64,
    trials: u64,
) -> Result<McEstimate> {
    if !is_separable_pair(a, b) {
        return Err(Error::NotSeparable);
    }
    let energies = grid.energies();
    let outcomes = run_trial_outcomes(trials, |r| {
        if energies.is_empty() {
            return Ok(false);
        }
        let v = params.potential_for_all(&[a, b], r);
        let sa = diagonalize(&assemble(a, params, &v)?)?;
        let sb = diagonalize(&assemble(b, params, &v)?)?;
        Ok(energies
            .iter()
            .any(|&e| sa.is_singular(e, m) && sb.is_singular(e, m)))
    })?;
    let mut est = McEstimate::from_outcomes("DS", outcomes, grid.meta());
    est.pair_kind = Some(pair_kind(a, b, params.r0() as u64));
    Ok(est)
}
