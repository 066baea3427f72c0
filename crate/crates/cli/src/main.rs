//! `flatstrip`: experiment workbench for geodesic flows without focal points.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use flatstrip::budget::Budget;
use flatstrip::{Error, SurfaceModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use commands::Context;
use config::ExperimentConfig;
use output::{Format, Run};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("budget exhausted; partial artifacts written")]
    Budget,
    #[error("invariant checks failed")]
    ChecksFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(Error::InvalidInput(_) | Error::Unsupported(_) | Error::ModelMismatch { .. } | Error::InvalidProfile(_)) => 2,
            CliError::Budget | CliError::Core(Error::BudgetExhausted(_)) => 3,
            CliError::Core(_) | CliError::ChecksFailed => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "flatstrip", version, about = "Geodesic-flow experiments on the genus-two surface and the flat-band collar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (`key = value` lines with dotted keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds; exhaustion exits with status 3.
    #[arg(long, global = true)]
    budget: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Sampled trajectory from `flow.start`.
    Flow,
    /// Lyapunov estimates and rank labels for sampled tangents.
    Jacobi,
    /// Busemann function of the vertical geodesic on a grid.
    Busemann,
    /// Flat-strip widths of sampled tangents.
    Strips,
    /// Quotient classes and the expansivity probe.
    Quotient,
    /// Shadowing of random pseudo-orbits under halving jumps.
    Shadow,
    /// Closed-geodesic enumeration and growth table.
    Periodic,
    /// Separated-set counts and entropy estimate.
    Entropy,
    /// Periodic-orbit equidistribution report.
    Mme,
    /// Invariant checks on the built-in models.
    Checks,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Jacobi => "jacobi",
            Command::Busemann => "busemann",
            Command::Strips => "strips",
            Command::Quotient => "quotient",
            Command::Shadow => "shadow",
            Command::Periodic => "periodic",
            Command::Entropy => "entropy",
            Command::Mme => "mme",
            Command::Checks => "checks",
        }
    }
}

/// One ChaCha stream per subcommand, keyed by the seed.
fn stream_rng(seed: u64, subcommand: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let digest = Sha256::digest(subcommand.as_bytes());
    rng.set_stream(u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")));
    rng
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        cfg.set("out", &out.to_string_lossy())?;
    }
    let budget = match cli.budget {
        Some(s) if s > 0.0 && s.is_finite() => Budget::time(Duration::from_secs_f64(s)),
        Some(s) => return Err(CliError::Config(format!("--budget must be positive, got {s}"))),
        None => Budget::unlimited(),
    };
    let model = SurfaceModel::from_spec_str(&cfg.model_spec()).map_err(|e| CliError::Config(e.to_string()))?;
    let seed = cfg.u64("seed")?;
    let name = cli.command.name();
    let dir = PathBuf::from(cfg.str("out"));
    let run = Run::new(&dir, cli.format)?;
    let mut ctx = Context { rng: stream_rng(seed, name), cfg, model, budget, run };
    let mut checks_ok = true;
    match cli.command {
        Command::Flow => commands::flow(&mut ctx)?,
        Command::Jacobi => commands::jacobi(&mut ctx)?,
        Command::Busemann => commands::busemann_grid(&mut ctx)?,
        Command::Strips => commands::strips(&mut ctx)?,
        Command::Quotient => commands::quotient(&mut ctx)?,
        Command::Shadow => commands::shadow(&mut ctx)?,
        Command::Periodic => commands::periodic(&mut ctx)?,
        Command::Entropy => commands::entropy(&mut ctx)?,
        Command::Mme => commands::mme(&mut ctx)?,
        Command::Checks => checks_ok = commands::checks(&mut ctx)?,
    }
    let partial = ctx.run.partial;
    let manifest = ctx.run.finish(name, ctx.cfg.hash(), seed)?;
    for f in &manifest.outputs {
        println!("{}", dir.join(&f.name).display());
    }
    if partial {
        Err(CliError::Budget)
    } else if !checks_ok {
        Err(CliError::ChecksFailed)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flatstrip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
