use thiserror::Error;

use crate::geometry::Config;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential missing at site {0:?}")]
    IncompletePotential(Vec<i64>),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("energy {energy} is numerically resonant (distance {distance:e} to eigenvalue {eigenvalue})")]
    ResonantEnergy {
        energy: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("factor boxes interact: particles at {0:?} and {1:?} can come within the interaction range")]
    NotPartiallyInteractive(Config, Config),

    #[error("tensor decomposition requires l1 hopping; sup-norm hopping couples the factors")]
    NonAdditiveHopping,

    #[error("mass sequence hits a nonpositive factor at scale index {index} (factor {factor})")]
    NonpositiveMass { index: usize, factor: f64 },

    #[error("{count} candidate sub-boxes exceed the cap of {cap}; use a larger stride")]
    CandidateExplosion { count: usize, cap: usize },

    #[error("only {0} usable shells; need at least 3 for a decay fit")]
    InsufficientShells(usize),

    #[error("boxes are not separable")]
    NotSeparable,

    #[error("realization {index}: {source}")]
    Realization {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_realization(self, index: u64) -> Self {
        match self {
            e @ Error::Realization { .. } => e,
            e => Error::Realization {
                index,
                source: Box::new(e),
            },
        }
    }
}
