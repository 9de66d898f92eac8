//! Command-line front end for `tracelab-core`.

mod commands;
pub mod error;
mod manifest;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "tracelab", version, about = "Trace sets of Fuchsian groups built from Y-pieces")]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    /// Write a run manifest with output digests to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Canonical generator pair for Y(x, y, 0).
    BuildYpiece(BuildYpieceArgs),
    /// Traces produced by the rule closure, with provenance.
    GenTraces(GenTracesArgs),
    /// Clustering and growth statistics of a trace sample.
    ClusterStats(ClusterStatsArgs),
    /// Counting checks for the S_n families with a > b².
    Counterexample(CounterexampleArgs),
    /// Cluster witness for a rational non-integer trace.
    ConstructCluster(ConstructClusterArgs),
    /// Exact traces of all reduced words up to a length.
    Enumerate(EnumerateArgs),
    /// Integrality check of a census.
    CheckArithmetic(CheckArithmeticArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SeedArgs {
    /// Trace of x, as p/q or a decimal.
    #[arg(long)]
    pub tx: String,
    /// Trace of y, as p/q or a decimal.
    #[arg(long, default_value = "2")]
    pub ty: String,
    /// Treat x as an elliptic point with trace in [0, 2).
    #[arg(long)]
    pub elliptic: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildYpieceArgs {
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write an SVG of isometric circles and axes.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenTracesArgs {
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Largest trace kept.
    #[arg(long)]
    pub cap: String,
    /// Maximum number of chained rule applications.
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClusterStatsArgs {
    /// CSV with value_num and value_den columns.
    #[arg(long, conflicts_with_all = ["tx", "ty"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub tx: Option<String>,
    #[arg(long)]
    pub ty: Option<String>,
    /// Trace cap when generating from a seed.
    #[arg(long, default_value = "50")]
    pub cap: String,
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
    /// Window to bin: `HI` or `LO:HI` (integers).
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Highest level n of S_n.
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    /// Value cap N.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructClusterArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Witness size: n + 1 values.
    #[arg(long, conflicts_with = "refute_bc", required_unless_present = "refute_bc")]
    pub n: Option<usize>,
    /// Build a witness with B + 1 values in one unit interval.
    #[arg(long = "refute-bc", value_name = "B")]
    pub refute_bc: Option<usize>,
    /// Also write the values as a CSV readable by cluster-stats.
    #[arg(long)]
    pub values_csv: Option<PathBuf>,
    /// Refuse witnesses whose integers would exceed this many bits.
    #[arg(long, default_value_t = tracelab_core::cluster::DEFAULT_MAX_BITS)]
    pub max_bits: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EnumerateArgs {
    /// Use S = [[0,-1],[1,0]] and T = [[1,1],[0,1]].
    #[arg(long, conflicts_with_all = ["gen_file", "tx"])]
    pub modular: bool,
    /// JSON file {"u": [a, b, c, d], "v": [a, b, c, d]} with rational strings.
    #[arg(long, conflicts_with = "tx")]
    pub gen_file: Option<PathBuf>,
    /// Use the canonical pair of Y(x, y, 0).
    #[arg(long, requires = "ty")]
    pub tx: Option<String>,
    #[arg(long)]
    pub ty: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_len: u32,
    /// Maximum number of words visited.
    #[arg(long, default_value_t = tracelab_core::census::DEFAULT_NODE_BUDGET)]
    pub budget: u128,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArithmeticArgs {
    /// Census CSV written by `enumerate`.
    #[arg(long)]
    pub census: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const PRECISION_ENV: &str = "TRACELAB_PRECISION_BITS";

fn precision_bits() -> CliResult<usize> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(tracelab_core::hpfloat::DEFAULT_PRECISION_BITS),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(b) if (64..=1 << 20).contains(&b) => Ok(b),
            _ => Err(CliError::Usage(format!("{PRECISION_ENV}={s} is not an integer in [64, 2^20]"))),
        },
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let bits = precision_bits()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let outputs = pool.install(|| commands::dispatch(&cli.command, bits))?;
    if let Some(path) = &cli.manifest {
        let value = serde_json::to_value(&cli.command)?;
        let (name, parameters) = match value {
            serde_json::Value::Object(map) => map.into_iter().next().expect("one subcommand"),
            other => (String::new(), other),
        };
        let manifest = manifest::RunManifest {
            command: name,
            parameters,
            determinism: manifest::DETERMINISM_NOTE,
            tool_version: env!("CARGO_PKG_VERSION"),
            precision_bits: bits,
            threads: cli.threads as usize,
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}
