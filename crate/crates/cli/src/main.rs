use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msalab_cli::config::{ExperimentConfig, Kind};
use msalab_cli::error::CliError;
use msalab_cli::{commands, output};

#[derive(Parser)]
#[command(name = "msalab", version, about = "Multi-particle localization lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `model.disorder.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to `THREADS`, then the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; falls back to `output_path`, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a box Hamiltonian and export it in coordinate format.
    Assemble(Common),
    /// Eigenvalues of a box Hamiltonian.
    Spectrum(Common),
    /// One Green's function entry.
    Green(Common),
    /// Every box predicate at one energy and mass.
    Classify(Common),
    /// Covering and projection checks.
    GeometryCheck(Common),
    /// Scale and mass sequence.
    Scales(Common),
    /// Wegner-type resonance probabilities.
    McWegner(Common),
    /// Initial-scale singularity probability and exponent.
    McS0(Common),
    /// Double-singularity probability of a separable pair.
    McDs(Common),
    /// Tail of the number of separable singular sub-boxes.
    McCount(Common),
    /// Deterministic non-singularity criterion on one realization.
    JnsCheck(Common),
    /// Eigenfunction decay masses.
    Decay(Common),
    /// Runs `experiment.kind` from the configuration.
    Run(Common),
}

impl Command {
    fn split(self) -> (Option<Kind>, Common) {
        match self {
            Command::Assemble(c) => (Some(Kind::Assemble), c),
            Command::Spectrum(c) => (Some(Kind::Spectrum), c),
            Command::Green(c) => (Some(Kind::Green), c),
            Command::Classify(c) => (Some(Kind::Classify), c),
            Command::GeometryCheck(c) => (Some(Kind::GeometryCheck), c),
            Command::Scales(c) => (Some(Kind::Scales), c),
            Command::McWegner(c) => (Some(Kind::McWegner), c),
            Command::McS0(c) => (Some(Kind::McS0), c),
            Command::McDs(c) => (Some(Kind::McDs), c),
            Command::McCount(c) => (Some(Kind::McCount), c),
            Command::JnsCheck(c) => (Some(Kind::JnsCheck), c),
            Command::Decay(c) => (Some(Kind::Decay), c),
            Command::Run(c) => (None, c),
        }
    }
}

fn threads(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("THREADS = {:?} is not a thread count", s))),
        Err(_) => Ok(config),
    }
}

fn execute(kind: Option<Kind>, common: Common) -> Result<(), CliError> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
            ExperimentConfig::parse(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {}", path.display(), msg)),
                e => e,
            })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.model.disorder.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_path = Some(out.clone());
    }
    config.threads = threads(common.threads, config.threads)?;
    let config = config.resolve(kind)?;
    if let Some(n) = config.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let dir = config.output_path.clone().unwrap_or_else(|| PathBuf::from("."));
    let artifacts = commands::run(&config)?;
    let writer = output::Writer::new(&dir, &config)?;
    for path in writer.write_all(&config, &artifacts)? {
        log::info!("wrote {}", path.display());
    }
    match artifacts.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (kind, common) = Cli::parse().command.split();
    match execute(kind, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msalab: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
