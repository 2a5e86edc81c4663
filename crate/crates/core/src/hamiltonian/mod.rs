//! Disorder sampling and finite-volume N-particle Hamiltonians
//!
//! `H = Σ_{‖x-y‖=1} δ_y⟨δ_x, ·⟩ + U(x) + g Σ_j V(x_j)` restricted to a box
//! with Dirichlet conditions: hopping only between sites inside the box.

mod assemble;
mod disorder;
mod interaction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{projections, AdjacencyKind, BoxSpec};

pub use assemble::{assemble, assemble_permuted, AssembledOperator, OperatorMatrix, DENSE_LIMIT};
pub use disorder::{sample_potential, DisorderKind, DisorderModel, PotentialMap};
pub use interaction::{interaction_energy, InteractionSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub dim: usize,
    pub n_particles: usize,
    pub coupling: f64,
    #[serde(default)]
    pub adjacency: AdjacencyKind,
    #[serde(default)]
    pub disorder: DisorderModel,
    #[serde(default)]
    pub interaction: InteractionSpec,
}

impl ModelParams {
    /// Non-interacting model with uniform disorder and sup adjacency.
    pub fn new(dim: usize, n_particles: usize, coupling: f64, seed: u64) -> Self {
        ModelParams {
            dim,
            n_particles,
            coupling,
            adjacency: AdjacencyKind::Sup,
            disorder: DisorderModel::uniform(seed),
            interaction: InteractionSpec::None,
        }
    }

    pub fn with_adjacency(mut self, adjacency: AdjacencyKind) -> Self {
        self.adjacency = adjacency;
        self
    }

    pub fn with_interaction(mut self, interaction: InteractionSpec) -> Self {
        self.interaction = interaction;
        self
    }

    pub fn with_disorder(mut self, disorder: DisorderModel) -> Self {
        self.disorder = disorder;
        self
    }

    pub fn r0(&self) -> u32 {
        self.interaction.range()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.n_particles == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimension and particle count must be positive, got d={} N={}",
                self.dim, self.n_particles
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling {}", self.coupling)));
        }
        self.disorder.validate()?;
        self.interaction.validate()
    }

    /// Potential on the single-particle base of `b` in one realization.
    pub fn potential_for(&self, b: &BoxSpec, realization: u64) -> PotentialMap {
        let (_, base) = projections(b);
        sample_potential(&self.disorder, base.iter().map(|p| p.as_slice()), realization)
    }

    /// Potential on the union of the bases of several boxes.
    pub fn potential_for_all(&self, boxes: &[&BoxSpec], realization: u64) -> PotentialMap {
        let mut base = std::collections::BTreeSet::new();
        for b in boxes {
            base.extend(projections(b).1);
        }
        sample_potential(&self.disorder, base.iter().map(|p| p.as_slice()), realization)
    }
}
