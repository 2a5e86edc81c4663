//! Finite-volume machinery for multi-particle Anderson localization.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: configurations in `Z^{Nd}`, boxes, boundaries, projections,
//!   the widened diagonal, separability, cluster decomposition and the covering
//!   construction for non-separable configurations.
//! - [`hamiltonian`]: counter-based disorder sampling, two-body interactions and
//!   Dirichlet-restricted box Hamiltonians.
//! - [`spectral`]: diagonalization, Green's functions and the box predicates
//!   (NS/S, R/NR, CNR, FI/PI, tunneling), plus the tensor decomposition of
//!   non-interacting boxes.
//! - [`msa`]: scale sequences, Monte Carlo estimators of resonance and
//!   singularity probabilities, and the counting statistics used by the
//!   inductive step.
//! - [`decay`]: localization centers and fitted eigenfunction decay masses.

pub mod decay;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod msa;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{AdjacencyKind, BoxSpec, Config, Permutation};
pub use hamiltonian::{
    assemble, sample_potential, AssembledOperator, DisorderKind, DisorderModel, InteractionSpec,
    ModelParams, PotentialMap,
};
pub use spectral::{diagonalize, green, EnergyGrid, SpectralData};
