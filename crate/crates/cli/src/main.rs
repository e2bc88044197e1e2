//! `adacsl` command-line interface.
//!
//! Exit status: 0 on success, 1 on data or domain errors, 2 on usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adacsl", version, about = "Budget-constrained cost-sensitive classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a CSV through an ingest config and summarize the result.
    IngestCheck(IngestCheckArgs),
    /// Train a plain or cost-sensitive tree without a budget.
    Fit(FitArgs),
    /// Train with the adaptive cost loop under a budget.
    FitAdaptive(FitAdaptiveArgs),
    /// Score a data set with a saved model and report cost and metrics.
    Evaluate(EvaluateArgs),
    /// Write ROC curves, iso-loss lines and the budget line for plotting.
    Roc(RocArgs),
    /// Drop the features with the highest mutual information with the label.
    ReduceFeatures(ReduceArgs),
    /// Run a cross-validated budget and feature sweep.
    Sweep(SweepArgs),
    /// Write a built-in synthetic data set as CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Ingest config (key = value). Defaults: label column `label`, positive value `1`.
    #[arg(long)]
    ingest: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Cost of a false negative, c(0,1).
    #[arg(long, default_value_t = 10.0)]
    c_fn: f64,
    /// Cost of a false positive, c(1,0).
    #[arg(long, default_value_t = 1.0)]
    c_fp: f64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BudgetArgs {
    /// Maximum number of positive classifications.
    #[arg(long)]
    budget: Option<usize>,
    /// Budget as a fraction of the data set's positive count (floored).
    #[arg(long)]
    budget_frac: Option<f64>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalBudgetArgs {
    /// Maximum number of positive classifications.
    #[arg(long)]
    budget: Option<usize>,
    /// Budget as a fraction of the data set's positive count (floored).
    #[arg(long)]
    budget_frac: Option<f64>,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 0.0)]
    min_cost_reduction: f64,
    /// Laplace-smoothed leaf scores.
    #[arg(long)]
    laplace: bool,
}

#[derive(Args)]
struct SeedArgs {
    /// Seed for every random choice.
    #[arg(long, env = "ADACSL_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct IngestCheckArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Also write the encoded data set (features plus a 0/1 `label` column).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeKind {
    /// Symmetric unit costs.
    Plain,
    /// The given cost matrix.
    Cost,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    costs: CostArgs,
    #[command(flatten)]
    tree: TreeArgs,
    #[arg(long, value_enum, default_value_t = TreeKind::Cost)]
    kind: TreeKind,
    #[command(flatten)]
    seed: SeedArgs,
    /// Model document to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitAdaptiveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    costs: CostArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    tree: TreeArgs,
    /// Increment of the false-positive cost per iteration.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    #[command(flatten)]
    seed: SeedArgs,
    /// Model document to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Model document.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    costs: CostArgs,
    // Without a budget, instances scoring at or above the static threshold are positive.
    #[command(flatten)]
    budget: OptionalBudgetArgs,
    /// Leave budget unused when the thresholds do not fill it.
    #[arg(long)]
    no_fill: bool,
    #[command(flatten)]
    seed: SeedArgs,
    /// Per-instance CSV: index, score, label, prediction.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RocArgs {
    /// Model documents; each becomes one curve named after its file stem.
    #[arg(long, required = true)]
    model: Vec<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    costs: CostArgs,
    // A budget adds the constraint line and the budgeted optima.
    #[command(flatten)]
    budget: OptionalBudgetArgs,
    /// Curve points: series, fpr, tpr.
    #[arg(long)]
    curves: PathBuf,
    /// Lines: series, slope, intercept, loss.
    #[arg(long)]
    lines: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fraction of features to keep.
    #[arg(long)]
    keep: f64,
    /// Bins for continuous features.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Reduced data set.
    #[arg(long)]
    out: PathBuf,
    /// Mutual information per input feature.
    #[arg(long)]
    info: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config (key = value).
    #[arg(long)]
    config: PathBuf,
    /// Per-run report.
    #[arg(long)]
    out: PathBuf,
    /// Per-cell means and p-values.
    #[arg(long)]
    aggregate: Option<PathBuf>,
    /// Selected hyperparameters per cell and model.
    #[arg(long)]
    selection: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config's base_seed.
    #[arg(long, env = "ADACSL_SEED")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Two binary symptom features over 1000 people, 100 infected.
    RunningExample,
    /// One binary feature splitting 200/800.
    ModelA,
    /// One binary feature splitting 80/920.
    ModelB,
    /// 2000 instances, 15% positives, noisy views of a latent risk.
    Hard,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[command(flatten)]
    seed: SeedArgs,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::IngestCheck(a) => commands::ingest_check(a),
        Command::Fit(a) => commands::fit(a),
        Command::FitAdaptive(a) => commands::fit_adaptive(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Roc(a) => commands::roc(a),
        Command::ReduceFeatures(a) => commands::reduce(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
