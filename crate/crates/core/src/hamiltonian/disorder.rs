//! Counter-based IID disorder.
//!
//! The value at a lattice point is a pure function of the master seed, the
//! realization index and the point's coordinates: the triple is hashed with
//! SHA-256 and the digest seeds a ChaCha8 stream from which one draw is
//! taken. Enlarging a box therefore never changes values on common sites.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Marginal distribution of the site potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DisorderKind {
    Uniform01,
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Discrete values with weights, each smeared by a uniform kick of
    /// width `smear`.
    Table {
        values: Vec<f64>,
        probabilities: Vec<f64>,
        #[serde(default)]
        smear: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderModel {
    pub distribution: DisorderKind,
    pub seed: u64,
}

impl Default for DisorderModel {
    fn default() -> Self {
        DisorderModel {
            distribution: DisorderKind::Uniform01,
            seed: 0,
        }
    }
}

impl DisorderModel {
    pub fn uniform(seed: u64) -> Self {
        DisorderModel {
            distribution: DisorderKind::Uniform01,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.distribution {
            DisorderKind::Uniform01 => Ok(()),
            DisorderKind::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(sd.is_finite() && *sd > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian disorder needs finite mean and positive sd, got ({}, {})",
                        mean, sd
                    )));
                }
                Ok(())
            }
            DisorderKind::Table {
                values,
                probabilities,
                smear,
            } => {
                if values.is_empty() || values.len() != probabilities.len() {
                    return Err(Error::InvalidParameter(
                        "table disorder needs equally many values and probabilities".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite())
                    || probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0))
                    || probabilities.iter().sum::<f64>() <= 0.0
                {
                    return Err(Error::InvalidParameter(
                        "table disorder values must be finite and weights nonnegative".into(),
                    ));
                }
                if !(smear.is_finite() && *smear >= 0.0) {
                    return Err(Error::InvalidParameter(format!("invalid smear {}", smear)));
                }
                if *smear == 0.0 {
                    log::warn!("table disorder without smear has atoms; the Hölder condition fails");
                }
                Ok(())
            }
        }
    }

    /// Potential value at `point` in the given realization.
    pub fn value(&self, realization: u64, point: &[i64]) -> f64 {
        let mut rng = site_rng(self.seed, realization, point);
        match &self.distribution {
            DisorderKind::Uniform01 => Uniform::new(0.0, 1.0).expect("unit interval").sample(&mut rng),
            DisorderKind::Gaussian { mean, sd } => Normal::new(*mean, *sd)
                .expect("validated gaussian")
                .sample(&mut rng),
            DisorderKind::Table {
                values,
                probabilities,
                smear,
            } => {
                let idx = WeightedIndex::new(probabilities)
                    .expect("validated weights")
                    .sample(&mut rng);
                let kick = if *smear > 0.0 {
                    Uniform::new(-0.5 * smear, 0.5 * smear)
                        .expect("positive smear")
                        .sample(&mut rng)
                } else {
                    0.0
                };
                values[idx] + kick
            }
        }
    }
}

fn site_rng(seed: u64, realization: u64, point: &[i64]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"msalab.potential.v1");
    h.update(seed.to_le_bytes());
    h.update(realization.to_le_bytes());
    h.update((point.len() as u64).to_le_bytes());
    for c in point {
        h.update(c.to_le_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Single-particle potential on a finite set of points in `Z^d`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PotentialMap {
    values: HashMap<Vec<i64>, f64>,
}

impl PotentialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, point: Vec<i64>, value: f64) {
        self.values.insert(point, value);
    }

    pub fn get(&self, point: &[i64]) -> Option<f64> {
        self.values.get(point).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries sorted by point.
    pub fn sorted(&self) -> Vec<(Vec<i64>, f64)> {
        let mut v: Vec<_> = self.values.iter().map(|(k, v)| (k.clone(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

impl FromIterator<(Vec<i64>, f64)> for PotentialMap {
    fn from_iter<T: IntoIterator<Item = (Vec<i64>, f64)>>(iter: T) -> Self {
        PotentialMap {
            values: iter.into_iter().collect(),
        }
    }
}

/// IID potential on `region` for one realization.
pub fn sample_potential<'a, I>(disorder: &DisorderModel, region: I, realization: u64) -> PotentialMap
where
    I: IntoIterator<Item = &'a [i64]>,
{
    region
        .into_iter()
        .map(|p| (p.to_vec(), disorder.value(realization, p)))
        .collect()
}
