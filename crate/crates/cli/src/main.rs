//! `resilience`: batch front end for resilience-core.
//!
//! Each subcommand reads graphs (binary cache or edge list), runs one
//! analysis and writes CSV/JSON files into `--out`. Every file records the
//! seed and command that produced it.

mod commands;
mod io;
mod report;
mod rows;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "resilience", version, about = "Social resilience analysis of large networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an edge list and write the binary graph cache plus a summary.
    Ingest(Common),
    /// Coreness of every node and the coreness CCDF.
    Kcore {
        #[command(flatten)]
        common: Common,
        /// Also summarize coreness per degree bin of this width.
        #[arg(long)]
        bin_width: Option<usize>,
    },
    /// Compare resilience curves and catastrophic thresholds of one or more graphs.
    Resilience {
        #[command(flatten)]
        common: Common,
        /// Survival level(s) for the catastrophic threshold.
        #[arg(long, num_args = 1.., default_values_t = [0.2])]
        survival: Vec<f64>,
        /// Report P(k_s > K) instead of P(k_s >= K).
        #[arg(long)]
        exceed: bool,
    },
    /// Members of the equilibrium network for cost c and benefit b.
    Equilibrium {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        b: u64,
    },
    /// Remaining users as the threshold rises over time.
    Unravel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Months between reported points.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Months after the start to report.
        #[arg(long, default_value_t = 12.0)]
        horizon: f64,
    },
    /// Goodness of fit of the unravel prediction against an observed series.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// CSV with columns `t,value` (months, fraction of users).
        #[arg(long)]
        observed: PathBuf,
        /// Resolution of the predicted series in months.
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        /// Largest time gap for pairing an observation with a prediction.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Power-law fit of each graph's degree distribution.
    Plfit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Also write the KS distance of every synthetic dataset.
        #[arg(long)]
        emit_trials: bool,
    },
    /// Internal, past and future connectivity of id slices.
    Timeslice {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        width: u64,
        #[arg(long, value_enum, default_value_t = Baseline::Exact)]
        baseline: Baseline,
    },
    /// Share of each id slice with coreness below a threshold.
    Atrisk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        width: u64,
        /// Defaults to the median coreness.
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long, default_value_t = resilience_core::temporal::DEFAULT_CONFIDENCE)]
        confidence: f64,
    },
    /// Bundle the outputs of earlier commands into one JSON document.
    Report {
        /// Directory holding earlier outputs (defaults to --out).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Input graph(s).
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Args)]
struct ScheduleArgs {
    /// Threshold at the start time. Derived from --c and --b when omitted.
    #[arg(long)]
    k0: Option<u32>,
    /// Threshold increase per month.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    b: Option<u64>,
    /// Start time in months.
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Reference point `t:K`; with --ref-b replaces --k0/--rate/--start.
    #[arg(long, requires = "ref_b")]
    ref_a: Option<String>,
    #[arg(long, requires = "ref_a")]
    ref_b: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Binary cache if the file starts with the cache magic, else pairs.
    Auto,
    Binary,
    Pairs,
    Adjacency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Baseline {
    Exact,
    Center,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
