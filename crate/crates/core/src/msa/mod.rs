//! Scale sequences, Monte Carlo estimators of resonance and singularity
//! probabilities, and counts of pairwise separable singular sub-boxes.

mod counting;
mod estimate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use counting::{
    count_separable_singular, estimate_count_tail, j_ns_criterion_check, max_clique,
    next_scale_mass, CountFamily, CountOptions, CountOutcome, JnsReport, KindFilter,
};
pub use estimate::{
    clopper_pearson, estimate_ds, estimate_s0, estimate_ws1, estimate_ws2, exists_e_both_resonant,
    run_trial_outcomes, run_trials, McEstimate,
};

/// Which length enters the mass product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassIndex {
    /// `m_k = m_0 Π_{j=1..k} (1 - γ L_j^{-1/2})`.
    #[default]
    PerFactor,
    /// `m_k = m_0 (1 - γ L_k^{-1/2})^k`, the product with `L_k` in every factor.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MsaParams {
    pub l0: u32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m0: f64,
    /// Odd bound on the number of separable singular sub-boxes.
    pub j: u32,
    pub ell: u32,
    pub interval: [f64; 2],
    pub mass_index: MassIndex,
    pub p_report: Option<f64>,
    pub q_report: Option<f64>,
}

impl Default for MsaParams {
    fn default() -> Self {
        MsaParams {
            l0: 6,
            alpha: 1.5,
            beta: 0.5,
            gamma: 1.0,
            m0: 0.5,
            j: 1,
            ell: 1,
            interval: [-1.0, 1.0],
            mass_index: MassIndex::PerFactor,
            p_report: None,
            q_report: None,
        }
    }
}

impl MsaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return bad(format!("alpha = {} must lie in (1, 2)", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta = {} must lie in (0, 1)", self.beta));
        }
        if self.l0 < 2 {
            return bad(format!("l0 = {} must be at least 2", self.l0));
        }
        if self.j % 2 == 0 {
            return bad(format!("j = {} must be odd", self.j));
        }
        if self.ell == 0 {
            return bad("ell must be positive".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must be nonnegative", self.gamma));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return bad(format!("m0 = {} must be positive", self.m0));
        }
        if !self.interval.iter().all(|x| x.is_finite()) {
            return bad("interval endpoints must be finite".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSequence {
    pub lengths: Vec<u32>,
    pub masses: Vec<f64>,
    /// `m_K ≥ m_0 / 2`.
    pub half_mass_holds: bool,
}

/// `L_k = round(L_0^{α^k})`, forced strictly increasing, and the masses.
pub fn scale_sequence(params: &MsaParams, k_max: usize) -> Result<ScaleSequence> {
    let mut lengths: Vec<u32> = Vec::with_capacity(k_max + 1);
    lengths.push(params.l0);
    for k in 1..=k_max {
        let raw = (params.l0 as f64).powf(params.alpha.powi(k as i32)).round();
        if !(raw < u32::MAX as f64) {
            return Err(Error::InvalidParameter(format!("scale L_{} overflows", k)));
        }
        lengths.push((raw as u32).max(lengths[k - 1] + 1));
    }
    let factor = |l: u32| 1.0 - params.gamma / (l as f64).sqrt();
    let mut masses = Vec::with_capacity(k_max + 1);
    masses.push(params.m0);
    for k in 1..=k_max {
        let m = match params.mass_index {
            MassIndex::PerFactor => {
                let f = factor(lengths[k]);
                if f <= 0.0 {
                    return Err(Error::NonpositiveMass { index: k, factor: f });
                }
                masses[k - 1] * f
            }
            MassIndex::Literal => {
                let f = factor(lengths[k]);
                if f <= 0.0 {
                    return Err(Error::NonpositiveMass { index: k, factor: f });
                }
                params.m0 * f.powi(k as i32)
            }
        };
        masses.push(m);
    }
    let half_mass_holds = *masses.last().expect("m0 present") >= 0.5 * params.m0;
    if !half_mass_holds {
        log::warn!(
            "m_{} = {} falls below m0/2 = {}",
            k_max,
            masses[k_max],
            0.5 * params.m0
        );
    }
    Ok(ScaleSequence {
        lengths,
        masses,
        half_mass_holds,
    })
}
