//! Finite-range two-body interaction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_distance, Config};

/// Pair potential `Φ(x, x')` depending on the sup distance `‖x - x'‖`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum InteractionSpec {
    /// `Φ ≡ 0`, range 0.
    #[default]
    None,
    /// `u0` for `‖x - x'‖ ≤ r0`, zero beyond.
    Constant { r0: u32, u0: f64 },
    /// `table[k]` at distance `k`; the range is `table.len() - 1`.
    Radial { table: Vec<f64> },
}

impl InteractionSpec {
    pub fn range(&self) -> u32 {
        match self {
            InteractionSpec::None => 0,
            InteractionSpec::Constant { r0, .. } => *r0,
            InteractionSpec::Radial { table } => table.len().saturating_sub(1) as u32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InteractionSpec::None => Ok(()),
            InteractionSpec::Constant { u0, .. } if u0.is_finite() => Ok(()),
            InteractionSpec::Radial { table }
                if !table.is_empty() && table.iter().all(|v| v.is_finite()) =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!(
                "interaction values must be finite and a radial table nonempty: {:?}",
                self
            ))),
        }
    }

    /// `Φ` at sup distance `r`.
    pub fn at_distance(&self, r: i64) -> f64 {
        match self {
            InteractionSpec::None => 0.0,
            InteractionSpec::Constant { r0, u0 } => {
                if r <= *r0 as i64 {
                    *u0
                } else {
                    0.0
                }
            }
            InteractionSpec::Radial { table } => usize::try_from(r)
                .ok()
                .and_then(|k| table.get(k))
                .copied()
                .unwrap_or(0.0),
        }
    }

    pub fn phi(&self, a: &[i64], b: &[i64]) -> f64 {
        self.at_distance(point_distance(a, b))
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            InteractionSpec::None => 0.0,
            InteractionSpec::Constant { u0, .. } => u0.abs(),
            InteractionSpec::Radial { table } => table.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// `U(x) = Σ_{j1 < j2} Φ(x_{j1}, x_{j2})`.
pub fn interaction_energy(x: &Config, spec: &InteractionSpec) -> f64 {
    if matches!(spec, InteractionSpec::None) {
        return 0.0;
    }
    let n = x.n_particles();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += spec.phi(x.particle(i), x.particle(j));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_examples() {
        let c = InteractionSpec::Constant { r0: 1, u0: 0.75 };
        assert_eq!(interaction_energy(&Config::line(&[4]), &c), 0.0);
        assert_eq!(interaction_energy(&Config::line(&[0, 1]), &c), 0.75);
        assert_eq!(interaction_energy(&Config::line(&[0, 1, 2]), &c), 1.5);
    }

    #[test]
    fn radial_table_and_range() {
        let r = InteractionSpec::Radial {
            table: vec![3.0, -1.0, 0.5],
        };
        assert_eq!(r.range(), 2);
        assert_eq!(r.at_distance(1), -1.0);
        assert_eq!(r.at_distance(3), 0.0);
        assert_eq!(r.sup_abs(), 3.0);
        assert_eq!(r.phi(&[0, 0], &[2, 1]), r.phi(&[2, 1], &[0, 0]));
        assert!(InteractionSpec::Radial { table: vec![] }.validate().is_err());
        assert!(InteractionSpec::Constant { r0: 1, u0: f64::NAN }.validate().is_err());
    }
}
