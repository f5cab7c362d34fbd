//! `hypermatch`: generate hypergraphs, solve and count perfect matchings,
//! draw vortices and pipeline samples, and run spread and threshold
//! experiments. Every random choice derives from `--seed`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hypermatch", version, about = "Perfect matching experiments on k-uniform hypergraphs")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment config (JSON, or TOML by `.toml` extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Wall-clock budget per exact solve, in milliseconds.
    #[arg(long = "budget-ms", global = true)]
    pub budget_ms: Option<u64>,
    /// Search-node budget per exact solve.
    #[arg(long = "budget-nodes", global = true)]
    pub budget_nodes: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Complete,
    Critical,
    #[value(name = "critical+1")]
    CriticalPlus,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    /// The vortex pipeline.
    Pipeline,
    /// Uniform over all perfect matchings (small hosts only).
    Uniform,
    /// Always the first perfect matching the solver finds.
    Fixed,
}

/// Where the host hypergraph comes from: a file, or a named family.
#[derive(Args, Debug, Clone)]
pub struct HostArgs {
    /// HGR1 file.
    #[arg(long, conflicts_with = "family")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Edge probability for the random family.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a hypergraph in HGR1 format.
    Gen(HostArgs),
    /// Keep each edge independently with probability `--keep`.
    Sparsify {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long)]
        keep: f64,
    },
    /// Decide whether an optimal matching exists and print one.
    Solve(HostArgs),
    /// Exact perfect matching counts with the `(1 - 1/k) n ln n` term.
    Count {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        k: Option<usize>,
        /// Vertex counts of complete hosts, comma separated.
        #[arg(short, long, value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Draw a vortex and report its levels and degree checks.
    Vortex {
        #[command(flatten)]
        host: HostArgs,
        /// Level count; the standard formula when absent.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// One pipeline sample with its level trace.
    Pipeline {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Inclusion frequencies over many samples (JSON, plus CSV next to `--out`).
    Spread {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, value_enum, default_value = "pipeline")]
        sampler: SamplerKind,
        /// Random disjoint edge pairs to track.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
    },
    /// Probability that a sparsified host has an optimal matching.
    Threshold {
        /// `complete`, `critical+1`, or `file` (with `--input`).
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(short, long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Explicit probabilities, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Geometric grid: points, and low and high multiples of the scale.
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[arg(long, default_value_t = 0.25)]
        lo: f64,
        #[arg(long, default_value_t = 16.0)]
        hi: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
