mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;

/// Commutant algebras and scar dynamics of Lindbladian spin chains.
#[derive(Parser, Debug)]
#[command(name = "scarlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (overrides the config's `output`; stdout if neither is set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Commutant dimension, irrep table and super-Hamiltonian gap.
    Commutant,
    /// Observable and fidelity time series.
    Evolve,
    /// Fidelity scaling collapse across chain lengths.
    Collapse,
    /// Coherence norm between a scar and the rest of the chain.
    Coherence,
    /// Sampled Brownian circuit against the averaged autocorrelation.
    Brownian,
    /// Short-time fidelity derivatives against closed forms (JSON).
    Derivatives,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.resolve()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(CliError::config)?;
    }
    let out = cli.out.or_else(|| config.output.clone());
    let out = out.as_deref();
    match cli.command {
        Command::Commutant => commands::commutant(&config, out),
        Command::Evolve => commands::evolve(&config, out),
        Command::Collapse => commands::collapse(&config, out),
        Command::Coherence => commands::coherence(&config, out),
        Command::Brownian => commands::brownian(&config, out),
        Command::Derivatives => commands::derivatives(&config, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
