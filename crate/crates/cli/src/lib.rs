//! Command-line front end: circuit generation, compilation, estimation,
//! baseline sampling, offline fitting and report comparison.
//!
//! Every command that writes files takes an output prefix `-o PREFIX` and
//! writes `PREFIX.<kind>` files plus `PREFIX.manifest.json`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

pub mod commands;
pub mod manifest;
pub mod svg;

pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    /// Sampling budget ran out; partial results were written.
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Internal(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ler",
    version,
    about = "Logical error rate estimation by stratified fault injection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a memory-experiment circuit.
    Gen(GenArgs),
    /// Compile a circuit into its binary flip table.
    Compile(CompileArgs),
    /// Run the adaptive stratified estimator.
    Estimate(EstimateArgs),
    /// Run direct Monte Carlo sampling at a physical error rate.
    Baseline(BaselineArgs),
    /// Fit S-curve models to a saved subspace CSV.
    Fit(FitArgs),
    /// Compare the logical error rates of two reports.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeedArgs {
    /// RNG seed; a fresh one is generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = "LER_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    /// `surface` or `repetition`.
    pub family: String,
    pub distance: u32,
    /// Stabilizer rounds; defaults to 3d for surface and 1 for repetition.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Output file; the circuit goes to stdout when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompileArgs {
    pub circuit: PathBuf,
    /// Output file for the binary table.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    pub circuit: PathBuf,
    /// Code distance.
    #[arg(short, long)]
    pub distance: u32,
    /// Physical error rate.
    #[arg(short, long)]
    pub p: f64,
    /// Total shot budget.
    #[arg(long, default_value_t = 5_000_000)]
    pub s_max: u64,
    /// Logical errors to collect per subspace.
    #[arg(long, default_value_t = 30)]
    pub n_le: u64,
    /// Sweet-spot knob; larger values sample closer to the onset.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Minimum shots per subspace.
    #[arg(long, default_value_t = 10_000)]
    pub min_subspace_shots: u64,
    /// `ours`, `ibm` or `generalized:<s>`.
    #[arg(long, default_value = "ours")]
    pub variant: String,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Cached flip table from `compile`, used instead of recompiling.
    #[arg(long)]
    pub qepg: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselineArgs {
    pub circuit: PathBuf,
    #[arg(short, long)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub max_errors: u64,
    #[arg(long)]
    pub max_shots: Option<u64>,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV with columns weight,samples,errors[,p_hat].
    pub data: PathBuf,
    /// Number of always-correctable faults, (d-1)/2.
    #[arg(short, long)]
    pub t: u32,
    #[arg(long, default_value = "ours")]
    pub variant: String,
    /// Fit the generalized model for every s in {1/4, 1/3, 1/2, 1, 2}.
    #[arg(long, conflicts_with = "variant")]
    pub sweep_s: bool,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Equal point weights instead of inverse-variance weights.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Report under test.
    pub a: PathBuf,
    /// Reference report.
    pub b: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Compile(a) => commands::compile(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Compare(a) => commands::compare(&a),
    }
}
