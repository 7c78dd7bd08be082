use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spar_core::experiment::Scenario;
use spar_core::sim::{CovarianceKind, Sparsity};
use spar_core::FamilyLink;

mod commands;

/// Sparse projected averaged regression for high-dimensional GLMs.
#[derive(Parser, Debug)]
#[command(name = "spar", version, about)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with its generating model.
    Simulate(SimulateArgs),
    /// Fit a SPAR model to a CSV dataset.
    Fit(FitArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Compute prediction, link-estimation and ranking metrics.
    Evaluate(EvaluateArgs),
    /// Run a simulation experiment and write long-format results.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub family: FamilyLink,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub sparsity: Sparsity,
    #[arg(long = "cov", alias = "covariance")]
    pub covariance: CovarianceKind,
    /// Size of an independent test set written next to the training set.
    #[arg(long, default_value_t = 0)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Signal strength β'Σβ (family default when omitted).
    #[arg(long)]
    pub signal: Option<f64>,
    /// Mean response the intercept is calibrated to (family default when omitted).
    #[arg(long)]
    pub target_mean: Option<f64>,
    /// Output directory for train.csv, test.csv and metadata.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ThresholdRule {
    Min,
    #[value(name = "1se")]
    OneSe,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AveragingArg {
    Link,
    Response,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScreeningArg {
    /// Deviance-ratio rule on the ridge path.
    Dev,
    /// Cross-validated ridge penalty.
    Cv,
    /// Smallest training deviance on the ridge path.
    TrainDev,
    /// Closed-form small-penalty limit (canonical links).
    Holp,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long)]
    pub family: FamilyLink,
    /// Cross-validate the number of models and the threshold.
    #[arg(long, overrides_with = "no_cv")]
    pub cv: bool,
    #[arg(long, overrides_with = "cv")]
    pub no_cv: bool,
    /// Number of marginal models (20 without CV, 50 with CV).
    #[arg(long)]
    pub models: Option<usize>,
    #[arg(long, value_enum, default_value_t = ThresholdRule::Min)]
    pub threshold_rule: ThresholdRule,
    /// Coefficient threshold used without CV.
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 20)]
    pub nu_grid: usize,
    #[arg(long, value_enum, default_value_t = AveragingArg::Link)]
    pub averaging: AveragingArg,
    #[arg(long, value_enum, default_value_t = ScreeningArg::Dev)]
    pub screening: ScreeningArg,
    /// Deviance-ratio threshold for `--screening dev` (family default when omitted).
    #[arg(long)]
    pub dev_threshold: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model document.
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the fit report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Response column to ignore if present.
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// CSV with the observed response and, optionally, `eta_true`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Saved model to predict with.
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// Predictions CSV with a `mu` column and optionally an `eta` column.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Simulation metadata; enables the ranking metric.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Training-sample response mean for rMSPE (taken from the model when omitted).
    #[arg(long)]
    pub train_mean: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// Experiment description (JSON); other flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<Scenario>,
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<FamilyLink>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sparsity: Vec<Sparsity>,
    #[arg(long = "cov", alias = "covariance", value_delimiter = ',')]
    pub covariance: Vec<CovarianceKind>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target dimension of single projections (n/4 when omitted).
    #[arg(long)]
    pub projection_dim: Option<usize>,
    /// Write zero seconds so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-cell mean method ranks.
    #[arg(long)]
    pub ranks: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
