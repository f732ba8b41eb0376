//! `finsler`: runs the verification matrix and its component sweeps from a
//! TOML experiment config.
//!
//! Exit codes: 0 every check passed, 1 a tolerance was missed, 2 the config,
//! the flags or the output directory were unusable.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_core::config::{Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "Projectively flat Finsler metric verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML). Built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every sampled sweep, overriding `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Command-specific tolerance override; see the README.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Run the full check matrix and write `report.json`.
    Verify,
    /// Tabulate flag curvature over the sample grid into `curvature.csv`.
    Curvature,
    /// Integrate one geodesic into `trajectory.csv`.
    Geodesic,
    /// Tabulate the series metric against its order into `series.csv`.
    Series,
}

/// Why a run could not produce a verdict.
#[derive(Debug)]
pub struct Unusable(pub String);

impl<E: std::fmt::Display> From<E> for Unusable {
    fn from(e: E) -> Self {
        Unusable(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<(Experiment, PathBuf), Unusable> {
    let mut exp = match &cli.config {
        Some(path) => {
            let source = std::fs::read_to_string(path)
                .map_err(|e| Unusable(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse(&source).map_err(|e| Unusable(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default().into_experiment()?,
    };
    if let Some(seed) = cli.seed {
        exp.config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Unusable(format!("--tol must be positive, got {tol}")));
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&exp.config.output.dir));
    std::fs::create_dir_all(&out).map_err(|e| Unusable(format!("cannot create {}: {e}", out.display())))?;
    Ok((exp, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&cli).and_then(|(exp, out)| commands::run(cli.command, exp, &out, cli.tol));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Unusable(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
