//! Maximal numbers of pairwise separable singular sub-boxes, their tail
//! probabilities, and the deterministic non-singularity criterion of the
//! inductive step.

use serde::{Deserialize, Serialize};

use super::estimate::{run_trial_outcomes, McEstimate};
use crate::error::{Error, Result};
use crate::geometry::{is_fully_interactive, is_separable_pair, BoxSpec};
use crate::hamiltonian::{assemble, ModelParams, PotentialMap};
use crate::spectral::{diagonalize, is_ecnr, EnergyGrid, SubBoxFamily};

/// Which sub-boxes are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KindFilter {
    #[serde(rename = "FI")]
    Fi,
    #[serde(rename = "PI")]
    Pi,
    #[default]
    #[serde(rename = "any")]
    Any,
}

impl KindFilter {
    pub fn admits(self, b: &BoxSpec, r0: u32) -> bool {
        match self {
            KindFilter::Any => true,
            KindFilter::Fi => is_fully_interactive(b, r0 as u64),
            KindFilter::Pi => !is_fully_interactive(b, r0 as u64),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KindFilter::Fi => "FI",
            KindFilter::Pi => "PI",
            KindFilter::Any => "any",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    pub kind: KindFilter,
    /// Center spacing of candidates; `ceil(sub_side / 2)` when absent.
    pub stride: Option<u32>,
    /// Largest admissible number of candidates.
    pub cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            kind: KindFilter::Any,
            stride: None,
            cap: 4096,
        }
    }
}

impl CountOptions {
    pub fn stride_for(&self, sub_side: u32) -> u32 {
        self.stride.unwrap_or(sub_side.div_ceil(2)).max(1)
    }
}

/// Largest clique of `adj` among `vertices`, by branch and bound; ties go to
/// the lexicographically first clique in `vertices` order.
pub fn max_clique(adj: &[Vec<bool>], vertices: &[usize]) -> Vec<usize> {
    fn expand(adj: &[Vec<bool>], current: &mut Vec<usize>, cand: &[usize], best: &mut Vec<usize>) {
        if current.len() > best.len() {
            *best = current.clone();
        }
        for (i, &v) in cand.iter().enumerate() {
            if current.len() + cand.len() - i <= best.len() {
                return;
            }
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
            current.push(v);
            expand(adj, current, &next, best);
            current.pop();
        }
    }
    let mut best = Vec::new();
    expand(adj, &mut Vec::new(), vertices, &mut best);
    best
}

/// Candidate sub-boxes of one container, diagonalized for one realization,
/// with their pairwise separability.
#[derive(Clone, Debug)]
pub struct CountFamily {
    pub family: SubBoxFamily,
    pub separable: Vec<Vec<bool>>,
}

impl CountFamily {
    pub fn build(
        container: &BoxSpec,
        sub_side: u32,
        params: &ModelParams,
        v: &PotentialMap,
        opts: &CountOptions,
    ) -> Result<Self> {
        if sub_side >= container.side {
            return Err(Error::InvalidParameter(format!(
                "sub-box side {} must be below the container side {}",
                sub_side, container.side
            )));
        }
        let stride = opts.stride_for(sub_side);
        let boxes: Vec<BoxSpec> = container
            .sub_boxes(sub_side, stride)
            .into_iter()
            .filter(|b| opts.kind.admits(b, params.r0()))
            .collect();
        if boxes.len() > opts.cap {
            return Err(Error::CandidateExplosion {
                count: boxes.len(),
                cap: opts.cap,
            });
        }
        let separable = boxes
            .iter()
            .map(|a| boxes.iter().map(|b| is_separable_pair(a, b)).collect())
            .collect();
        let family = SubBoxFamily::from_boxes(container, sub_side, stride, &boxes, params, v)?;
        Ok(CountFamily { family, separable })
    }

    /// Maximal set of pairwise separable `(E, m)`-S candidates.
    pub fn count_at(&self, e: f64, m: f64) -> (Vec<usize>, Vec<usize>) {
        let singular = self.family.singular(e, m);
        let clique = max_clique(&self.separable, &singular);
        (singular, clique)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountOutcome {
    pub count: usize,
    pub candidates: usize,
    pub singular: usize,
    pub members: Vec<BoxSpec>,
    pub stride: u32,
}

/// Maximal number of pairwise separable `(E, m)`-S sub-boxes of side
/// `sub_side` in `container`.
#[allow(clippy::too_many_arguments)]
pub fn count_separable_singular(
    container: &BoxSpec,
    sub_side: u32,
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    m: f64,
    opts: &CountOptions,
) -> Result<CountOutcome> {
    let fam = CountFamily::build(container, sub_side, params, v, opts)?;
    let (singular, clique) = fam.count_at(e, m);
    Ok(CountOutcome {
        count: clique.len(),
        candidates: fam.family.len(),
        singular: singular.len(),
        members: clique
            .iter()
            .map(|&i| fam.family.spectra[i].box_spec.clone())
            .collect(),
        stride: fam.family.stride,
    })
}

/// Probability that for some grid energy at least `threshold` pairwise
/// separable singular sub-boxes exist.
#[allow(clippy::too_many_arguments)]
pub fn estimate_count_tail(
    container: &BoxSpec,
    sub_side: u32,
    params: &ModelParams,
    grid: &EnergyGrid,
    m: f64,
    threshold: usize,
    opts: &CountOptions,
    trials: u64,
) -> Result<McEstimate> {
    if threshold == 0 {
        return Err(Error::InvalidParameter("threshold must be positive".into()));
    }
    let energies = grid.energies();
    let outcomes = run_trial_outcomes(trials, |r| {
        let v = params.potential_for(container, r);
        let fam = CountFamily::build(container, sub_side, params, &v, opts)?;
        if fam.family.len() < threshold {
            return Ok(false);
        }
        Ok(energies.iter().any(|&e| fam.count_at(e, m).1.len() >= threshold))
    })?;
    let event = format!("count[{}]>={}", opts.kind.label(), threshold);
    Ok(McEstimate::from_outcomes(&event, outcomes, grid.meta()))
}

/// `m_{k+1} = m_k (1 - (5J + 6) / √L_k)` and whether the factor is
/// nonpositive.
pub fn next_scale_mass(m_k: f64, j: u32, l_k: u32) -> (f64, bool) {
    let factor = 1.0 - (5.0 * j as f64 + 6.0) / (l_k as f64).sqrt();
    (m_k * factor, factor <= 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JnsReport {
    pub ecnr: bool,
    pub separable_singular: usize,
    pub j: u32,
    pub hypotheses_met: bool,
    pub m_next: f64,
    pub degenerate: bool,
    /// `None` when the hypotheses fail.
    pub conclusion_holds: Option<bool>,
    pub gf_max: f64,
}

/// Evaluates the criterion: if the container is `E`-CNR and holds at most
/// `J` pairwise separable `(E, m_k)`-S sub-boxes of side `L_k`, it should be
/// `(E, m_{k+1})`-NS.
#[allow(clippy::too_many_arguments)]
pub fn j_ns_criterion_check(
    container: &BoxSpec,
    sub_side: u32,
    params: &ModelParams,
    v: &PotentialMap,
    e: f64,
    j: u32,
    m_k: f64,
    alpha: f64,
    beta: f64,
    opts: &CountOptions,
) -> Result<JnsReport> {
    let ecnr = is_ecnr(container, params, v, e, beta, alpha, 1)?.cnr;
    let k = count_separable_singular(container, sub_side, params, v, e, m_k, opts)?.count;
    let (m_next, degenerate) = next_scale_mass(m_k, j, sub_side);
    if degenerate {
        log::warn!("mass factor for L_k = {} and J = {} is not positive", sub_side, j);
    }
    let hypotheses_met = ecnr && k <= j as usize;
    let s = diagonalize(&assemble(container, params, v)?)?;
    let ens = s.is_ens(e, m_next);
    Ok(JnsReport {
        ecnr,
        separable_singular: k,
        j,
        hypotheses_met,
        m_next,
        degenerate,
        conclusion_holds: hypotheses_met.then_some(ens.ns),
        gf_max: ens.max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Config;
    use crate::hamiltonian::InteractionSpec;

    #[test]
    fn clique_small_graphs() {
        let n = 5;
        let mut adj = vec![vec![false; n]; n];
        for (a, b) in [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)] {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        assert_eq!(max_clique(&adj, &[0, 1, 2, 3, 4]), vec![0, 1, 2]);
        assert_eq!(max_clique(&adj, &[3, 4]).len(), 2);
        assert!(max_clique(&adj, &[]).is_empty());
        assert_eq!(max_clique(&adj, &[1, 4]).len(), 1);
    }

    #[test]
    fn mass_step_degenerates() {
        let (m, degenerate) = next_scale_mass(1.0, 1, 121);
        assert_eq!(m, 0.0);
        assert!(degenerate);
        let (m, degenerate) = next_scale_mass(2.0, 1, 484);
        assert!((m - 1.0).abs() < 1e-15 && !degenerate);
    }

    #[test]
    fn counts_with_no_or_all_singular() {
        let c = BoxSpec::new(Config::line(&[0]), 12);
        let p = ModelParams::new(1, 1, 10.0, 3);
        let v = p.potential_for(&c, 0);
        let opts = CountOptions::default();
        let none = count_separable_singular(&c, 3, &p, &v, 0.3, f64::NEG_INFINITY, &opts).unwrap();
        assert_eq!(none.count, 0);
        let all = count_separable_singular(&c, 3, &p, &v, 0.3, f64::INFINITY, &opts).unwrap();
        assert_eq!(all.singular, all.candidates);
        // candidates at stride 2 sit at -5,-3,...,5 and are separable iff
        // more than 2 apart, so every other one fits
        assert_eq!(all.candidates, 6);
        assert_eq!(all.count, 3);
    }

    #[test]
    fn one_planted_singular_box() {
        // a single site on resonance with E inside an otherwise high potential
        let c = BoxSpec::new(Config::line(&[0]), 8);
        let p = ModelParams::new(1, 1, 1.0, 0);
        let mut v = PotentialMap::new();
        for x in -4..=4 {
            v.insert(vec![x], if x == 3 { 0.0 } else { 50.0 });
        }
        let opts = CountOptions {
            stride: Some(1),
            ..CountOptions::default()
        };
        let out = count_separable_singular(&c, 1, &p, &v, 0.01, 1.0, &opts).unwrap();
        assert_eq!(out.count, 1);
        assert_eq!(out.members[0].center, Config::line(&[3]));
    }

    #[test]
    fn candidate_cap_enforced() {
        let c = BoxSpec::new(Config::line(&[0, 0]), 10);
        let p = ModelParams::new(1, 2, 1.0, 0);
        let v = p.potential_for(&c, 0);
        let opts = CountOptions {
            stride: Some(1),
            cap: 10,
            ..CountOptions::default()
        };
        assert!(matches!(
            count_separable_singular(&c, 4, &p, &v, 0.0, 0.1, &opts),
            Err(Error::CandidateExplosion { .. })
        ));
    }

    #[test]
    fn any_count_bounded_by_fi_plus_pi() {
        let c = BoxSpec::new(Config::line(&[0, 3]), 10);
        let p = ModelParams::new(1, 2, 4.0, 6).with_interaction(InteractionSpec::Constant { r0: 1, u0: 1.0 });
        for r in 0..4 {
            let v = p.potential_for(&c, r);
            for e in [0.5, 2.0, 5.0] {
                let count = |kind| {
                    let opts = CountOptions {
                        kind,
                        ..CountOptions::default()
                    };
                    count_separable_singular(&c, 3, &p, &v, e, 0.3, &opts).unwrap().count
                };
                assert!(count(KindFilter::Any) <= count(KindFilter::Fi) + count(KindFilter::Pi));
            }
        }
    }

    #[test]
    fn jns_vacuous_when_hypotheses_fail() {
        let c = BoxSpec::new(Config::line(&[0]), 12);
        let p = ModelParams::new(1, 1, 10.0, 5);
        let v = p.potential_for(&c, 0);
        let opts = CountOptions::default();
        let rep = j_ns_criterion_check(&c, 3, &p, &v, 0.5, 1, f64::INFINITY, 1.5, 0.5, &opts).unwrap();
        assert!(rep.separable_singular > 1);
        assert!(!rep.hypotheses_met);
        assert_eq!(rep.conclusion_holds, None);
    }
}
