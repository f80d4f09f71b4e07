//! Batch front door for the macrospin library.
//!
//! One binary, seven subcommands, one JSON config. Every run reads the
//! config, executes a pipeline stage from `macrospin-core`, and writes CSV
//! or JSON artifacts into the output directory. Runs are deterministic:
//! linear algebra executes sequentially, all sampling flows from one 64-bit
//! seed, floats print in shortest round-trip form, and outputs land via a
//! temp-file rename so an error never leaves a partial artifact.
//!
//! Exit codes: `0` success, `2` invalid input (unreadable or malformed
//! config, failed validation, size caps), `3` inconclusive solver verdict.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// CLI-level failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::Inconclusive(_) => ExitCode::from(3),
        }
    }
}

impl From<macrospin_core::Error> for CliError {
    fn from(err: macrospin_core::Error) -> Self {
        match err {
            macrospin_core::Error::Inconclusive(msg) => CliError::Inconclusive(msg),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Invalid(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "macrospin",
    version,
    about = "Mean observables on spin chains: free energy, entropy, contours, ranks, commuting approximants"
)]
pub struct Cli {
    /// Path to the JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for artifacts (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Seed for sampled evaluations; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Dense-dimension cap override.
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Free energy, its gradient, and the smallest Hessian eigenvalue on an
    /// alpha grid.
    Freeenergy,
    /// Entropy values and domain verdicts on an x grid or at seeded random
    /// points.
    Entropy,
    /// Contour ladder levels and mesh layers as JSON, with inclusion audits.
    Contours,
    /// Commuting-approximant convergence table across window sizes.
    Approx,
    /// Spectral box-projection ranks and rates across window sizes.
    Rankrate,
    /// Minimal-rank projector sizes for a product state.
    Beta,
    /// Coarse-grained block averages versus plain means, with error bounds.
    Coarsegrain,
}

/// Parses arguments from the process environment, runs the selected command,
/// and maps errors to exit codes (diagnostics go to standard error).
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match run_with(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Runs one command end to end; returns the artifact paths written.
pub fn run_with(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    // Deterministic outputs require sequential kernels: threaded reductions
    // reorder floating-point sums between runs.
    faer::set_global_parallelism(faer::Par::Seq);

    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Invalid("--config <path> is required".into()))?;
    let raw = std::fs::read(config_path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", config_path.display())))?;
    let ctx = config::RunContext::parse(&raw, cli.seed, cli.max_dim)?;

    let artifacts = match cli.command {
        Command::Freeenergy => commands::cmd_freeenergy(&ctx)?,
        Command::Entropy => commands::cmd_entropy(&ctx)?,
        Command::Contours => commands::cmd_contours(&ctx)?,
        Command::Approx => commands::cmd_approx(&ctx)?,
        Command::Rankrate => commands::cmd_rankrate(&ctx)?,
        Command::Beta => commands::cmd_beta(&ctx)?,
        Command::Coarsegrain => commands::cmd_coarsegrain(&ctx)?,
    };
    output::write_artifacts(&cli.out, &artifacts)
}
