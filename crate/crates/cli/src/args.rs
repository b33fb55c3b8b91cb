use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "replic", version, about = "Partial conjunction p-values and e-values, and their simulation studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combine p-values for H_s^gamma.
    Combine {
        /// Comma-separated p-values.
        #[arg(long = "p", value_name = "LIST", allow_hyphen_values = true)]
        p: String,
        #[arg(long)]
        gamma: usize,
        /// fisher, stouffer, minimum or bonferroni.
        #[arg(long)]
        method: String,
    },
    /// Merge e-values for H_s^gamma and calibrate to a p-value.
    CombineE {
        /// Comma-separated e-values.
        #[arg(long = "e", value_name = "LIST", allow_hyphen_values = true)]
        e: String,
        #[arg(long)]
        gamma: usize,
        /// product, mean or harmonic.
        #[arg(long, default_value = "product")]
        rule: String,
    },
    /// Power and relative power per pattern and method.
    Power(ExperimentArgs),
    /// Empirical cdf at alpha under true partial conjunction nulls, per conservative count.
    NullEcdf(ExperimentArgs),
    /// Empirical cdf curves of the combined p-values on a grid.
    EcdfCurve(ExperimentArgs),
    /// Power across gamma for one pattern.
    GammaSweep(ExperimentArgs),
    /// Print the evidence pattern catalog.
    Patterns {
        /// Print the conservative variants instead.
        #[arg(long)]
        conservative: bool,
        /// Write to this directory instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Named design (fig1..fig7, null-beta, null-normal).
    #[arg(long, conflicts_with_all = ["model", "sigma", "pattern", "r", "gamma", "base", "conservative", "grid"])]
    pub preset: Option<String>,
    /// beta or normal.
    #[arg(long)]
    pub model: Option<String>,
    /// Standard deviation of the Normal model.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Catalog label (e.g. 7, 3c) or a comma-separated base vector; repeatable for power.
    #[arg(long, allow_hyphen_values = true)]
    pub pattern: Vec<String>,
    /// Signal strength; for the Normal model a `sigma` suffix scales by σ (e.g. 1.5sigma).
    #[arg(long)]
    pub r: Option<String>,
    /// A single value, a list (1,2,3) or a range (1..5).
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated methods.
    #[arg(long)]
    pub methods: Option<String>,
    /// Null base: zeros, lead2, or a comma-separated vector.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Counts of zeros replaced by -1: a value, list or range (0..5).
    #[arg(long)]
    pub conservative: Option<String>,
    /// Ecdf grid: list or `start:step:end`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Use the preset's full-scale repetition count.
    #[arg(long, conflicts_with = "reps")]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (default: $REPLIC_OUT_DIR or the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write an SVG plot.
    #[arg(long)]
    pub plot: bool,
}
