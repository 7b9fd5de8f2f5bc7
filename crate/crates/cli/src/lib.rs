//! `tarsim` command line: corpus ingestion, simulation grids, cost
//! dynamics, stopping studies, workflow comparisons and category binning.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data error,
//! 3 partial failure (some grid runs failed).

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{analysis, bins, data, grid};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tarsim", version, about = "Review-cost laboratory for active-learning workflows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a JSONL corpus and write a corpus cache.
    Ingest { input: PathBuf, cache: PathBuf },

    /// Run the simulation grid described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads (overrides `jobs` in the config; 0 uses all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },

    /// Write the per-iteration cost dynamics of one trace.
    Dynamics {
        trace: PathBuf,
        /// `ap,an,bp,bn` or a family spec such as `expensive_training:10,1`.
        #[arg(long, default_value = "1,1,1,1", allow_hyphen_values = true)]
        structure: String,
        /// Recall target (defaults to the trace's own).
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Mean optimal stopping iteration and acceptable range across a cost family.
    Stopping {
        /// Glob matching trace files.
        traces: String,
        /// `training`, `additive` or `phase_one_positives` (or the pattern, e.g. `(1+x,1,1,1)`).
        #[arg(long, default_value = "training")]
        family: String,
        /// Comma list or `start:stop:step`.
        #[arg(long, default_value = "0:20:1")]
        x_grid: String,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Mean relative cost reduction of workflow A over B, per cost structure.
    Compare {
        manifest: PathBuf,
        /// `A:B` workflow pairs, comma separated or repeated (e.g. `2p-unc:1p-rel`).
        #[arg(long = "pairs")]
        pairs: Vec<String>,
        /// Cost structure; repeat for several (defaults to the manifest's).
        #[arg(long = "structure")]
        structures: Vec<String>,
        /// Bonferroni family size (defaults to pairs x structures).
        #[arg(long)]
        correction_m: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one row per comparison with the K-S statistics.
        #[arg(long)]
        details: Option<PathBuf>,
    },

    /// Assign every category to a prevalence and difficulty bin.
    Bins {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[arg(long, default_value_t = 0.25)]
        train_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Generate a synthetic single-category corpus as JSONL.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        docs: Option<usize>,
        #[arg(long)]
        prevalence: Option<f64>,
        #[arg(long)]
        signal: Option<f64>,
    },
}

pub fn execute(command: Command) -> CliResult {
    match command {
        Command::Ingest { input, cache } => data::ingest(&input, &cache),
        Command::Run { config, jobs } => grid::cmd_run(&config, jobs).map(drop),
        Command::Dynamics { trace, structure, target, out } => {
            analysis::cmd_dynamics(&trace, &structure, target, out.as_deref()).map(drop)
        }
        Command::Stopping { traces, family, x_grid, tolerance, target, out } => {
            analysis::cmd_stopping(analysis::StoppingArgs {
                pattern: &traces,
                family: &family,
                x_grid: &x_grid,
                tolerance,
                target,
                out: out.as_deref(),
            })
            .map(drop)
        }
        Command::Compare { manifest, pairs, structures, correction_m, level, target, out, details } => {
            analysis::cmd_compare(analysis::CompareArgs {
                manifest: &manifest,
                pairs: &pairs,
                structures: &structures,
                correction_m,
                level,
                target,
                out: out.as_deref(),
                details: details.as_deref(),
            })
            .map(drop)
        }
        Command::Bins { corpus, split_seed, train_fraction, out } => {
            bins::cmd_bins(&corpus, split_seed, train_fraction, out.as_deref())
        }
        Command::Synth { out, seed, docs, prevalence, signal } => {
            data::synth(data::SynthArgs { out: &out, seed, docs, prevalence, signal })
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tarsim: {e}");
            e.exit_code()
        }
    }
}
