//! Repeated cross-validation sweeps over budget and feature fractions,
//! comparing adaptive training against post-hoc allocation baselines.

mod report;
mod stats;

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;

pub use report::{aggregate, write_aggregate, write_report, write_selection, AGGREGATE_HEADER, REPORT_HEADER, SELECTION_HEADER};
pub use stats::{paired_significance, paired_t_test, sign_test, Significance};

use crate::adaptive::{deploy, fit_adaptive, project_budget, AdaptiveConfig, Utilization};
use crate::baselines::{allocate_grouping, run_baseline, train_baseline, BaselineKind};
use crate::config::KeyValues;
use crate::data::{reduce_features, stratified_folds, FoldSplit, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::seed;
use crate::threshold::{classify_with_budget, thresholds};
use crate::tree::{fit, leaf_groups, TreeModel, TreeParams};
use crate::types::{confusion, evaluate, total_cost, BudgetSpec, CostMatrix, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepModel {
    Adacsl,
    PlainTree,
    CostTree,
}

impl SweepModel {
    pub const ALL: [SweepModel; 3] = [SweepModel::Adacsl, SweepModel::PlainTree, SweepModel::CostTree];

    pub fn name(self) -> &'static str {
        match self {
            SweepModel::Adacsl => "adacsl",
            SweepModel::PlainTree => "plain-tree",
            SweepModel::CostTree => "cost-tree",
        }
    }
}

impl fmt::Display for SweepModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameter lists; every combination is tried.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub min_cost_reduction: Vec<f64>,
    pub laplace: bool,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            max_depth: vec![3, 5],
            min_samples_leaf: vec![5, 20],
            min_cost_reduction: vec![0.0],
            laplace: false,
        }
    }
}

impl HyperGrid {
    /// Combinations ordered by depth, then leaf size, then cost reduction.
    pub fn combos(&self) -> Vec<TreeParams<f64>> {
        let mut out = Vec::new();
        for &max_depth in &self.max_depth {
            for &min_samples_leaf in &self.min_samples_leaf {
                for &min_cost_reduction in &self.min_cost_reduction {
                    out.push(TreeParams {
                        max_depth,
                        min_samples_leaf,
                        min_cost_reduction,
                        laplace: self.laplace,
                    });
                }
            }
        }
        out
    }
}

/// Where the CLI should load the sweep data from. Not used by [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepInput {
    pub data: Option<PathBuf>,
    pub ingest: Option<PathBuf>,
    /// Name of a built-in synthetic set (`hard`).
    pub synthetic: Option<String>,
    pub synthetic_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Budgets as fractions of each test fold's positive count.
    pub budget_fractions: Vec<f64>,
    /// Fractions of features kept after dropping the most informative ones.
    pub feature_fractions: Vec<f64>,
    pub k_folds: usize,
    pub repeats: usize,
    pub base_seed: u64,
    pub costs: CostMatrix<f64>,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub grid: HyperGrid,
    pub bins: usize,
    /// Also report sign-test p-values.
    pub sign_test: bool,
    pub utilization: Utilization,
    /// What to do when adaptive training hits `max_iterations`.
    pub nonconvergence: NonConvergencePolicy,
    pub input: SweepInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonConvergencePolicy {
    /// Fail the sweep, naming the cell and run.
    #[default]
    Abort,
    /// Refit the tree at the last false-positive cost tried and use it.
    RefitLast,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            budget_fractions: vec![0.25, 0.5, 0.75],
            feature_fractions: vec![1.0],
            k_folds: 3,
            repeats: 10,
            base_seed: 0,
            costs: CostMatrix::canonical(10.0, 1.0).expect("valid costs"),
            epsilon: 1.0,
            max_iterations: 1000,
            grid: HyperGrid::default(),
            bins: DEFAULT_BINS,
            sign_test: false,
            utilization: Utilization::Full,
            nonconvergence: NonConvergencePolicy::Abort,
            input: SweepInput::default(),
        }
    }
}

impl SweepConfig {
    pub const KEYS: [&'static str; 23] = [
        "budget_fractions",
        "feature_fractions",
        "k_folds",
        "repeats",
        "base_seed",
        "c_fn",
        "c_fp",
        "c_tn",
        "c_tp",
        "epsilon",
        "max_iterations",
        "max_depth",
        "min_samples_leaf",
        "min_cost_reduction",
        "laplace",
        "bins",
        "sign_test",
        "utilization",
        "nonconvergence",
        "data",
        "ingest",
        "synthetic",
        "synthetic_seed",
    ];

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_known(&Self::KEYS)?;
        let d = Self::default();
        let utilization = match kv.get("utilization") {
            None | Some("full") => Utilization::Full,
            Some("threshold") => Utilization::Threshold,
            Some(other) => return Err(Error::Config(format!("utilization must be full or threshold, got '{other}'"))),
        };
        let nonconvergence = match kv.get("nonconvergence") {
            None | Some("abort") => NonConvergencePolicy::Abort,
            Some("refit-last") => NonConvergencePolicy::RefitLast,
            Some(other) => {
                return Err(Error::Config(format!(
                    "nonconvergence must be abort or refit-last, got '{other}'"
                )))
            }
        };
        let config = Self {
            budget_fractions: kv.list("budget_fractions")?.unwrap_or(d.budget_fractions),
            feature_fractions: kv.list("feature_fractions")?.unwrap_or(d.feature_fractions),
            k_folds: kv.parsed("k_folds")?.unwrap_or(d.k_folds),
            repeats: kv.parsed("repeats")?.unwrap_or(d.repeats),
            base_seed: kv.parsed("base_seed")?.unwrap_or(d.base_seed),
            costs: CostMatrix::new(
                kv.parsed("c_tn")?.unwrap_or(0.0),
                kv.parsed("c_fn")?.unwrap_or(d.costs.c01),
                kv.parsed("c_fp")?.unwrap_or(d.costs.c10),
                kv.parsed("c_tp")?.unwrap_or(0.0),
            )?,
            epsilon: kv.parsed("epsilon")?.unwrap_or(d.epsilon),
            max_iterations: kv.parsed("max_iterations")?.unwrap_or(d.max_iterations),
            grid: HyperGrid {
                max_depth: kv.list("max_depth")?.unwrap_or(d.grid.max_depth),
                min_samples_leaf: kv.list("min_samples_leaf")?.unwrap_or(d.grid.min_samples_leaf),
                min_cost_reduction: kv.list("min_cost_reduction")?.unwrap_or(d.grid.min_cost_reduction),
                laplace: kv.parsed("laplace")?.unwrap_or(false),
            },
            bins: kv.parsed("bins")?.unwrap_or(d.bins),
            sign_test: kv.parsed("sign_test")?.unwrap_or(false),
            utilization,
            nonconvergence,
            input: SweepInput {
                data: kv.get("data").map(PathBuf::from),
                ingest: kv.get("ingest").map(PathBuf::from),
                synthetic: kv.get("synthetic").map(String::from),
                synthetic_seed: kv.parsed("synthetic_seed")?.unwrap_or(0),
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |xs: &[f64]| !xs.is_empty() && xs.iter().all(|&x| x > 0.0 && x <= 1.0);
        // Budgets above the positive count are allowed; they clamp to the fold size.
        if self.budget_fractions.is_empty() || !self.budget_fractions.iter().all(|&x| x.is_finite() && x > 0.0) {
            return Err(Error::Config("budget_fractions must be non-empty and positive".into()));
        }
        if !in_unit(&self.feature_fractions) {
            return Err(Error::Config("feature_fractions must be non-empty and in (0, 1]".into()));
        }
        if self.k_folds < 2 {
            return Err(Error::Config("k_folds must be >= 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        let combos = self.grid.combos();
        if combos.is_empty() {
            return Err(Error::Config("hyperparameter grid is empty".into()));
        }
        for params in &combos {
            params.validate()?;
        }
        AdaptiveConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            initial_costs: self.costs,
            hyperparams: combos[0],
        }
        .validate()
    }
}

/// One model's result on one test fold.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub feature_fraction: f64,
    pub budget_fraction: f64,
    pub model: SweepModel,
    pub run: usize,
    pub cost: f64,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub n_positive: usize,
    /// Test-fold budget.
    pub budget: usize,
    /// False when adaptive training hit its iteration cap and the fallback
    /// model was used.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub feature_fraction: f64,
    pub budget_fraction: f64,
    pub model: SweepModel,
    pub runs: usize,
    pub mean_cost: f64,
    pub mean_accuracy: f64,
    /// Mean over runs with a defined precision.
    pub mean_precision: Option<f64>,
    /// Adaptive vs plain tree; set on the adaptive row only.
    pub p_value: Option<f64>,
    pub sign_p_value: Option<f64>,
    pub note: String,
}

/// Hyperparameters chosen for one model in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub feature_fraction: f64,
    pub budget_fraction: f64,
    pub model: SweepModel,
    pub params: TreeParams<f64>,
    pub mean_train_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
    pub selections: Vec<Selection>,
}

struct Outcome {
    train_cost: f64,
    row: RunRow,
}

struct Cell<'a> {
    fi: usize,
    bi: usize,
    feature_fraction: f64,
    budget_fraction: f64,
    data: &'a Dataset,
    splits: &'a [FoldSplit],
}

/// Adaptive fit. Under [`NonConvergencePolicy::RefitLast`], a run that hits
/// the iteration cap uses the tree refit at the last cost tried.
fn adaptive_model(
    train: &Dataset,
    config: &AdaptiveConfig<f64>,
    budget: &BudgetSpec,
    seed: u64,
    policy: NonConvergencePolicy,
) -> Result<(TreeModel<f64>, f64, bool)> {
    match fit_adaptive(train, config, budget, seed) {
        Ok(fit) => {
            let cost = fit.trace.last().map(|r| r.train_cost).unwrap_or(0.0);
            Ok((fit.model, cost, true))
        }
        Err(Error::NonConvergence(nc)) if policy == NonConvergencePolicy::RefitLast => {
            let c10 = nc.trace.last().map(|r| r.c10).unwrap_or(config.initial_costs.c10);
            let model = fit(train, &config.initial_costs.with_fp_cost(c10)?, &config.hyperparams)?;
            let grouping = leaf_groups(&model, train)?;
            let pair = thresholds(&grouping, &model.train_costs, budget)?;
            let labels = classify_with_budget(&grouping, &pair, budget, seed)?;
            let conf = confusion(train.labels(), &labels.labels)?;
            Ok((model, total_cost(&conf, &config.initial_costs), false))
        }
        Err(e) => Err(e),
    }
}

fn run_one(
    cell: &Cell,
    split: &FoldSplit,
    model_kind: SweepModel,
    params: &TreeParams<f64>,
    config: &SweepConfig,
) -> Result<Outcome> {
    let train = cell.data.subset(&split.train)?;
    let test = cell.data.subset(&split.test)?;
    let test_budget = BudgetSpec::from_positive_fraction(cell.budget_fraction, test.n_positive(), test.n_instances())?;
    let train_budget = project_budget(&test_budget, train.n_instances(), test.n_instances())?;
    let run_seed = seed::derive(config.base_seed, &[cell.fi as u64, cell.bi as u64, split.run as u64]);

    let (train_cost, labels, converged) = match model_kind {
        SweepModel::Adacsl => {
            let adaptive = AdaptiveConfig {
                epsilon: config.epsilon,
                max_iterations: config.max_iterations,
                initial_costs: config.costs,
                hyperparams: *params,
            };
            let (model, train_cost, converged) = adaptive_model(&train, &adaptive, &train_budget, run_seed, config.nonconvergence)?;
            let labels = deploy(&model, &test, &test_budget, run_seed, config.utilization)?;
            (train_cost, labels.labels, converged)
        }
        SweepModel::PlainTree | SweepModel::CostTree => {
            let kind = if model_kind == SweepModel::PlainTree {
                BaselineKind::PlainTree
            } else {
                BaselineKind::CostTree
            };
            let model = train_baseline(kind, &train, &config.costs, params)?;
            let train_labels = allocate_grouping(&leaf_groups(&model, &train)?, &train_budget, run_seed);
            let train_cost = total_cost(&confusion(train.labels(), &train_labels.labels)?, &config.costs);
            let outcome = run_baseline(kind, &train, &test, &config.costs, &test_budget, params, run_seed)?;
            (train_cost, outcome.labels.labels, true)
        }
    };
    let eval = evaluate(test.labels(), &labels, &config.costs)?;
    Ok(Outcome {
        train_cost,
        row: RunRow {
            feature_fraction: cell.feature_fraction,
            budget_fraction: cell.budget_fraction,
            model: model_kind,
            run: split.run,
            cost: eval.cost,
            accuracy: eval.metrics.accuracy.unwrap_or(0.0),
            precision: eval.metrics.precision,
            n_positive: eval.confusion.predicted_positive(),
            budget: test_budget.limit,
            converged,
        },
    })
}

/// Runs every (feature fraction, budget fraction) cell over all folds, all
/// three models and the whole grid, then keeps, per cell and model, the grid
/// point with the lowest mean training cost. Output order is fixed by the
/// configuration, never by thread scheduling.
pub fn run_sweep(data: &Dataset, config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let reduced: Vec<Dataset> = config
        .feature_fractions
        .iter()
        .map(|&f| reduce_features(data, f, config.bins))
        .collect::<Result<_>>()?;
    // One fold plan for every cell, so runs are paired across cells and models.
    let plan = stratified_folds(data, config.k_folds, config.repeats, config.base_seed)?;
    let splits = plan.splits();
    let combos = config.grid.combos();

    let mut cells = Vec::new();
    for (fi, &feature_fraction) in config.feature_fractions.iter().enumerate() {
        for (bi, &budget_fraction) in config.budget_fractions.iter().enumerate() {
            cells.push(Cell {
                fi,
                bi,
                feature_fraction,
                budget_fraction,
                data: &reduced[fi],
                splits: &splits,
            });
        }
    }

    let mut tasks = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        for (mi, &model) in SweepModel::ALL.iter().enumerate() {
            for gi in 0..combos.len() {
                for si in 0..cell.splits.len() {
                    tasks.push((ci, mi, model, gi, si));
                }
            }
        }
    }
    let outcomes: Vec<Outcome> = tasks
        .par_iter()
        .map(|&(ci, _, model, gi, si)| {
            let cell = &cells[ci];
            run_one(cell, &cell.splits[si], model, &combos[gi], config).map_err(|e| Error::Sweep {
                feature_fraction: cell.feature_fraction,
                budget_fraction: cell.budget_fraction,
                run: cell.splits[si].run,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let n_runs = splits.len();
    let block = combos.len() * n_runs;
    let mut rows = Vec::new();
    let mut selections = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        for (mi, &model) in SweepModel::ALL.iter().enumerate() {
            let start = (ci * SweepModel::ALL.len() + mi) * block;
            let per_combo = &outcomes[start..start + block];
            let mut best = 0;
            let mut best_cost = f64::INFINITY;
            for gi in 0..combos.len() {
                let runs = &per_combo[gi * n_runs..(gi + 1) * n_runs];
                let mean = runs.iter().map(|o| o.train_cost).sum::<f64>() / n_runs as f64;
                if mean < best_cost {
                    best = gi;
                    best_cost = mean;
                }
            }
            selections.push(Selection {
                feature_fraction: cell.feature_fraction,
                budget_fraction: cell.budget_fraction,
                model,
                params: combos[best],
                mean_train_cost: best_cost,
            });
            rows.extend(per_combo[best * n_runs..(best + 1) * n_runs].iter().map(|o| o.row.clone()));
        }
    }
    let aggregates = aggregate(&rows, config.sign_test)?;
    Ok(SweepReport {
        rows,
        aggregates,
        selections,
    })
}
