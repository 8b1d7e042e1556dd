use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "omma", version, about = "Online maximization of confusion-matrix metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an online learner over a stream and write traces and a report.
    Run(RunArgs),
    /// Generate a synthetic stream with known probabilities.
    Synth(SynthArgs),
    /// Run the two-sequence lower-bound scenario for min(C00, C11).
    Adversarial(AdversarialArgs),
    /// Measure regret on a synthetic task over a grid of horizons.
    Regret(RegretArgs),
    /// List the metric registry.
    Metrics,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key=value file with defaults for any long option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent runs.
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    /// Metric name, e.g. macro-f1, mc-gmean, micro-fbeta:2, macro-f1@3.
    #[arg(long)]
    pub metric: Option<String>,
    /// omma, omma-eta, greedy, ofw, ofw-eta, offline-fw, topk or thresh05.
    #[arg(long)]
    pub alg: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Predict exactly this many labels per instance.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Keep only the k' most probable labels of each estimate.
    #[arg(long)]
    pub sparse_k: Option<usize>,
    /// Frank-Wolfe iterations per fit.
    #[arg(long)]
    pub fw_iterations: Option<usize>,
    /// Online-FW refit schedule: interval or cumulative.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Use the newest Frank-Wolfe component instead of sampling one.
    #[arg(long)]
    pub deterministic_mixture: bool,
}

/// Synthetic model: a model file and/or individual parameters.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// key=value model file (m, d, seed, prior_low, prior_high, weight_scale, task).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// multilabel or multiclass.
    #[arg(long)]
    pub task: Option<String>,
    /// Number of labels (or classes).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub model_seed: Option<u64>,
    #[arg(long)]
    pub prior_low: Option<f64>,
    #[arg(long)]
    pub prior_high: Option<f64>,
    #[arg(long)]
    pub weight_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Labels file; with --probs, replaces the synthetic model.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub probs: Option<PathBuf>,
    /// Fitting sample for offline-fw.
    #[arg(long)]
    pub fit_labels: Option<PathBuf>,
    #[arg(long)]
    pub fit_probs: Option<PathBuf>,
    /// Stream length for synthetic runs.
    #[arg(long)]
    pub n: Option<usize>,
    /// Oracle sample size for the optimum of synthetic runs.
    #[arg(long)]
    pub n_opt: Option<usize>,
    /// Record the utility every this many instances.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: Option<usize>,
    /// Standard deviation of Gaussian noise added to the written estimates.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Write only the k' most probable labels of each estimate.
    #[arg(long)]
    pub sparse_k: Option<usize>,
    /// Output prefix; writes PREFIX.labels, .probs, .truth and .model.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdversarialArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub alg: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Horizon, a multiple of 6.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RegretArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated horizons.
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Comma-separated lambda values; defaults to --lambda.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub n_opt: Option<usize>,
    /// Use this optimum instead of estimating it.
    #[arg(long)]
    pub psi_star: Option<f64>,
    /// Summary CSV path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
