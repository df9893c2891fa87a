//! `rcf`: reference class forecasting from a project registry.
//!
//! Every command reads the registry and deflator files, derives overruns and
//! writes a CSV, JSON or SVG report. Exit codes: 0 success, 1 usage, 2 data
//! error, 3 empty class, 4 invalid curve.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rcf_core::reference_class::QuantileMethod;
use rcf_core::{Metric, Stage};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "rcf", version, about = "Reference class forecasting for public works cost and schedule")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags shared by every command. Unset flags fall back to the config file,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` file with run settings
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Project registry in the standard proforma (CSV)
    #[arg(long, global = true)]
    pub projects: Option<PathBuf>,
    /// Price deflator series (CSV: year,index)
    #[arg(long, global = true)]
    pub deflators: Option<PathBuf>,
    /// Benchmark constants (JSON)
    #[arg(long, global = true)]
    pub benchmark: Option<PathBuf>,
    /// Rebase the deflator series to this year
    #[arg(long, global = true)]
    pub deflator_base_year: Option<i32>,
    #[arg(long, global = true)]
    pub stage: Option<Stage>,
    #[arg(long, global = true)]
    pub metric: Option<Metric>,
    /// Comma-separated certainty levels, e.g. 0.5,0.8
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Quantile estimator: inf or interp
    #[arg(long, global = true)]
    pub method: Option<QuantileMethod>,
    /// Use the loess-smoothed, isotonic-adjusted curve
    #[arg(long, global = true)]
    pub smooth: bool,
    #[arg(long, global = true)]
    pub span: Option<f64>,
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Projects entering the pipeline before this date are excluded (YYYY-MM-DD)
    #[arg(long, global = true)]
    pub era_cutoff: Option<NaiveDate>,
    /// Smallest final outturn kept, in HKD thousands
    #[arg(long, global = true)]
    pub min_outturn: Option<i64>,
    /// Comma-separated probability grid for curves
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Output directory; reports go to standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Overrun table for one stage and metric
    Overruns {
        /// Skip the reference class filter (size and era)
        #[arg(long)]
        all: bool,
        /// Loess trend of overruns by estimate date with a before/after shift test
        #[arg(long)]
        trend: bool,
    },
    /// Uplift at each requested certainty level
    Uplift {
        /// Report both quantile estimators
        #[arg(long)]
        both: bool,
    },
    /// Leave-one-out validation of the uplifts
    Validate,
    /// Descriptive statistics against an external benchmark
    Benchmark,
    /// Uplift curve as CSV, plus an SVG plot when --out is given
    Curve {
        /// Keep the loess curve as fitted, without the isotonic adjustment
        #[arg(long)]
        no_adjust: bool,
    },
    /// Tiered contingency allocation for a base estimate
    Tiers {
        /// Base estimate in HKD thousands
        #[arg(long)]
        base: i64,
        /// `three-tier` or `name:p,name:p,...`
        #[arg(long, default_value = "three-tier")]
        scheme: String,
        /// Read the uplift curve from a curve CSV instead of the registry
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        no_adjust: bool,
    },
    /// Validate the registry file only
    Check,
}

/// Runs a parsed command line, writing reports to `stdout` or `--out`.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> CliResult<()> {
    let config = config::resolve(&cli.overrides)?;
    commands::dispatch(&cli.command, &config, stdout)
}
