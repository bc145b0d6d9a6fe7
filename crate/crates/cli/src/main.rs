//! `transferkit`: free energies, Gibbs marginals and parameter sweeps for
//! translation-invariant spin chains described by JSON model files.
//!
//! Exit codes: 0 success, 1 `compare --tol` exceeded, 2 malformed input or
//! unknown name, 3 non-Hermitian term, 4 solver non-convergence, 5 memory
//! budget exceeded, 6 marginal at least as large as the window.

mod commands;
mod failure;
mod model_file;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::failure::{Failure, Outcome};

#[derive(Parser)]
#[command(
    name = "transferkit",
    version,
    about = "Thermal properties of infinite spin chains via a finite transfer map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free energy per site from the spectral radius of the transfer map.
    FreeEnergy(FreeEnergyArgs),
    /// Gibbs marginal of the half-infinite or two-sided chain.
    Marginal(MarginalArgs),
    /// Trace distance between two marginal dumps.
    Compare(CompareArgs),
    /// Evaluate one quantity over a list of parameter values, as CSV.
    Sweep(sweep::SweepArgs),
    /// Reference values from exactly solvable cases.
    Oracle(OracleArgs),
    /// Write a built-in model as a model file.
    Model(ModelArgs),
}

#[derive(Args, Clone)]
pub struct SolverArgs {
    /// Power-iteration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Power-iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl SolverArgs {
    pub fn options(&self) -> transferkit::SolverOptions {
        transferkit::SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            record_history: false,
        }
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("size").required(true).args(["window", "epsilon"]))]
pub struct FreeEnergyArgs {
    /// JSON model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub beta: f64,
    /// Window size.
    #[arg(long = "L", id = "window")]
    pub window: Option<usize>,
    /// Target accuracy; picks the window from it and the memory budget.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Args)]
pub struct MarginalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long = "L", id = "window")]
    pub window: usize,
    /// Sites in the marginal; with --two-sided, sites on each side.
    #[arg(long)]
    pub k: usize,
    /// Marginal of the two-sided chain on `2k` sites around a bond.
    #[arg(long)]
    pub two_sided: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the dump here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Exit with status 1 when the distance exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub model: OracleModel,
}

#[derive(Subcommand)]
pub enum OracleModel {
    /// Dimerized XY chain by free fermions.
    Xy {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Also check the value against exact diagonalization.
        #[arg(long)]
        cross_check: bool,
        #[command(flatten)]
        marginal: OracleMarginal,
    },
    /// Classical Ising chain, `h = -J Z Z`.
    Ising {
        #[arg(long)]
        beta: f64,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        #[command(flatten)]
        marginal: OracleMarginal,
    },
}

#[derive(Args)]
pub struct OracleMarginal {
    /// Instead of the free energy, dump the brute-force marginal on this many
    /// leading sites of an open chain.
    #[arg(long, requires = "length")]
    pub marginal: Option<usize>,
    /// Length of that open chain.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ModelArgs {
    #[command(subcommand)]
    pub builtin: Builtin,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
pub enum Builtin {
    /// `h = 0`.
    Zero {
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// `h = -J Z Z`.
    Ising {
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
    },
    /// XY chain with alternating couplings `1, gamma`; blocked unless `gamma = 1`.
    Xy {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Ferromagnetic `d`-state Potts chain.
    Potts {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
    },
}

/// Writes `text` to `path`, or to stdout.
pub fn emit(text: &str, path: Option<&Path>) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::malformed(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::FreeEnergy(a) => commands::free_energy(&a),
        Command::Marginal(a) => commands::marginal(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Model(a) => commands::model(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("transferkit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
