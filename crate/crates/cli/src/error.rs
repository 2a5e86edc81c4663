use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure at realization {index}: {message} (rerun with trials = 1 and that realization)")]
    Solver { index: u64, message: String },

    #[error("solver failure: {0}")]
    SolverUnindexed(String),

    #[error("{0}")]
    Failed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } | CliError::SolverUnindexed(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<msalab::Error> for CliError {
    fn from(e: msalab::Error) -> Self {
        use msalab::Error as E;
        match e {
            E::Realization { index, source } => CliError::Solver {
                index,
                message: source.to_string(),
            },
            e @ (E::Solver(_) | E::ResonantEnergy { .. }) => CliError::SolverUnindexed(e.to_string()),
            E::InsufficientShells(_) => CliError::Failed(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
