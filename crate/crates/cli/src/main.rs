//! `mubforge`: command-line front end for the MUB / pQRAC toolkit.
//!
//! Exit codes: 0 on success, 1 when a numerical method did not converge (the best-effort
//! result is still written), 2 on input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mubforge_core::Error;

#[derive(Debug, Parser)]
#[command(name = "mubforge", version, about = "Mutually unbiased bases and pQRAC tools")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Global {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Override the command's numerical tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "MUBFORGE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the complete MUB family for a prime-power dimension.
    Mubs {
        #[arg(long)]
        d: usize,
    },
    /// Unbiasedness measures of a basis-set file.
    Measure {
        #[arg(long)]
        bases: PathBuf,
    },
    /// QRAC value (m = n) or pQRAC value of a basis-set file.
    Qrac {
        #[arg(long)]
        bases: PathBuf,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Bin the QRAC values of all n-subsets of the MUB family in dimension d.
    Anomaly {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Bin width (defaults to 1e-6; `--tol` also sets it).
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// See-saw search for n unbiased bases in dimension d.
    Seesaw {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Number of random restarts, seeded `seed..seed+seeds`.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 500)]
        rounds: usize,
    },
    /// Upper bound on the (n,2)^d pQRAC value from the symmetrized relaxation.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "Q1")]
        level: String,
        #[arg(long, default_value_t = 10)]
        stall_k: usize,
        /// Write the reduced LMI in the plain-text dump format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Monte Carlo samples of (pbar, D^2) on random basis sets.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Also write the density grid CSV here.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Memory needed for level-k moment matrices.
    Plan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::ComplexRoots { .. } => Failure::Numerical(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::NotConverged(msg)) => {
            eprintln!("warning: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
