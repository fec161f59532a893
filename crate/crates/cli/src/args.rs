use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use negfuse_core::{Model, PointEstimate, Scaling};

#[derive(Parser, Debug)]
#[command(
    name = "negfuse",
    version,
    about = "Bayesian fused lasso with NEG priors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a regression model to a CSV file, selecting hyperparameters by EBIC.
    Fit(FitArgs),
    /// Same as `fit`, but every hyperparameter axis must be given explicitly.
    Gridsearch(FitArgs),
    /// Segment a numeric series into piecewise-constant blocks.
    Flsa(FlsaArgs),
    /// Denoise a grayscale image given as a CSV matrix or PGM file.
    Denoise2d(DenoiseArgs),
    /// Monte Carlo comparison of methods on a synthetic case.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SharedArgs {
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Gibbs iterations per chain, burn-in included.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Burn-in iterations.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Keep every `thin`-th draw after burn-in.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// JSON configuration file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Explicit lambda1 axis. Without it the axis is laid out up to a
    /// data-dependent lambda_max.
    #[arg(long, value_delimiter = ',')]
    pub lambda1: Option<Vec<f64>>,
    /// Number of lambda1 values when the axis is laid out automatically.
    #[arg(long)]
    pub lambda1_count: Option<usize>,
    /// Smallest lambda1 when the axis is laid out automatically.
    #[arg(long)]
    pub lambda1_min: Option<f64>,
    /// lambda2 axis (fused models).
    #[arg(long, value_delimiter = ',')]
    pub lambda2: Option<Vec<f64>>,
    /// gamma2 axis (NEG models).
    #[arg(long, value_delimiter = ',')]
    pub gamma2: Option<Vec<f64>>,
    /// Posterior summary passed to the sparsifier: mean or median.
    #[arg(long, value_parser = parse_point)]
    pub point: Option<PointEstimate>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FitArgs {
    /// Input CSV with a header row.
    pub input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long)]
    pub response: Option<String>,
    /// lasso, fused, neg_lasso or neg_fused.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    /// chain, empty, complete, grid:ROWSxCOLS or custom:EDGES.csv.
    #[arg(long)]
    pub graph: Option<String>,
    /// Predictor scaling: pooled or per_column.
    #[arg(long, value_parser = parse_scaling)]
    pub scaling: Option<Scaling>,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FlsaArgs {
    /// CSV with a header row holding the series.
    pub input: Option<PathBuf>,
    /// Column holding the series; optional when the file has one column.
    #[arg(long)]
    pub column: Option<String>,
    /// fused or neg_fused.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DenoiseArgs {
    /// Grayscale image: CSV matrix with a header row, or PGM (P2/P5).
    pub input: Option<PathBuf>,
    /// Noise-free image of the same shape; enables the squared-error report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// fused or neg_fused.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    /// Simulation case: 1, 2 or 3.
    #[arg(long)]
    pub case: Option<u8>,
    /// Number of replications.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Methods to compare (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    pub methods: Option<Vec<Model>>,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: negfuse_core::Error| e.to_string())
}

fn parse_point(s: &str) -> Result<PointEstimate, String> {
    match s {
        "mean" => Ok(PointEstimate::Mean),
        "median" => Ok(PointEstimate::Median),
        _ => Err(format!(
            "unknown point estimate '{s}' (expected mean or median)"
        )),
    }
}

fn parse_scaling(s: &str) -> Result<Scaling, String> {
    match s {
        "pooled" => Ok(Scaling::Pooled),
        "per_column" => Ok(Scaling::PerColumn),
        _ => Err(format!(
            "unknown scaling '{s}' (expected pooled or per_column)"
        )),
    }
}
