//! Adaptive cost-sensitive training under a positive-class budget.
//!
//! Each iteration fits a tree under the current costs, groups the training
//! set by leaf score and computes both thresholds. While the budget forces
//! `tau_d` above `tau`, the false-positive cost `c10` grows by `epsilon` and
//! the tree is refit. The first model whose static threshold alone respects
//! the budget is returned.

use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grouping::LeafGrouping;
use crate::scalar::Scalar;
use crate::threshold::{classify_with_budget, fill_to_budget, thresholds, BudgetedLabels, ThresholdPair};
use crate::tree::{fit, leaf_groups, ModelMetadata, TreeModel, TreeParams};
use crate::types::{confusion, total_cost, BudgetSpec, CostMatrix, Dataset};

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig<T> {
    pub epsilon: T,
    pub max_iterations: usize,
    pub initial_costs: CostMatrix<T>,
    pub hyperparams: TreeParams<T>,
}

impl<T: Scalar> AdaptiveConfig<T> {
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

    /// Step of one cost unit, at most 1000 iterations.
    pub fn new(initial_costs: CostMatrix<T>, hyperparams: TreeParams<T>) -> Self {
        Self {
            epsilon: T::one(),
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            initial_costs,
            hyperparams,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite_value() || self.epsilon <= T::zero() {
            return Err(Error::InvalidInput(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidInput("max_iterations must be >= 1".into()));
        }
        self.hyperparams.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub c10: T,
    pub tau: T,
    pub tau_d: T,
    /// Training cost of the budgeted labels, under the initial costs.
    pub train_cost: T,
    pub n_positive: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdaptiveTrace<T> {
    pub records: Vec<IterationRecord<T>>,
}

pub const TRACE_HEADER: [&str; 6] = ["iteration", "c10", "tau", "tau_d", "train_cost", "n_positive"];

impl<T: Scalar> AdaptiveTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord<T>> {
        self.records.last()
    }

    pub fn to_f64(&self) -> AdaptiveTrace<f64> {
        AdaptiveTrace {
            records: self
                .records
                .iter()
                .map(|r| IterationRecord {
                    iteration: r.iteration,
                    c10: r.c10.as_f64(),
                    tau: r.tau.as_f64(),
                    tau_d: r.tau_d.as_f64(),
                    train_cost: r.train_cost.as_f64(),
                    n_positive: r.n_positive,
                })
                .collect(),
        }
    }

    /// Iterations at which `tau_d` went up relative to the previous one.
    pub fn tau_d_increases(&self) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].tau_d > w[0].tau_d)
            .map(|w| w[1].iteration)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                r.c10.to_string(),
                r.tau.to_string(),
                r.tau_d.to_string(),
                r.train_cost.to_string(),
                r.n_positive.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// The loop hit `max_iterations` with `tau_d` still above `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonConvergence {
    pub max_iterations: usize,
    pub trace: AdaptiveTrace<f64>,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "adaptive training did not converge in {} iterations", self.max_iterations)?;
        if let Some(r) = self.trace.last() {
            write!(f, " (last c10={}, tau={}, tau_d={})", r.c10, r.tau, r.tau_d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveFit<T> {
    pub model: TreeModel<T>,
    pub trace: AdaptiveTrace<T>,
    /// Training grouping and budgeted labels of the returned model.
    pub grouping: LeafGrouping<T>,
    pub thresholds: ThresholdPair<T>,
    pub labels: BudgetedLabels<T>,
}

/// Scales a test budget to the training set: `floor(limit * n_train / n_test)`.
pub fn project_budget(test_budget: &BudgetSpec, n_train: usize, n_test: usize) -> Result<BudgetSpec> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::InvalidInput("training and test sizes must be >= 1".into()));
    }
    let limit = (test_budget.limit as u128 * n_train as u128 / n_test as u128) as usize;
    BudgetSpec::new(limit.min(n_train), n_train)
}

pub fn fit_adaptive<T: Scalar>(
    data: &Dataset,
    config: &AdaptiveConfig<T>,
    budget: &BudgetSpec,
    seed: u64,
) -> Result<AdaptiveFit<T>> {
    config.validate()?;
    if budget.basis_size != data.n_instances() {
        return Err(Error::InvalidInput(format!(
            "budget basis {} does not match the {} training instances; project it first",
            budget.basis_size,
            data.n_instances()
        )));
    }
    let mut costs = config.initial_costs;
    let mut trace = AdaptiveTrace { records: Vec::new() };
    for iteration in 1..=config.max_iterations {
        let model = fit(data, &costs, &config.hyperparams)?.with_metadata(ModelMetadata {
            seed,
            iteration_index: iteration,
        });
        let grouping = leaf_groups(&model, data)?;
        let pair = thresholds(&grouping, &costs, budget)?;
        let labels = classify_with_budget(&grouping, &pair, budget, seed)?;
        let conf = confusion(data.labels(), &labels.labels)?;
        trace.records.push(IterationRecord {
            iteration,
            c10: costs.c10,
            tau: pair.tau,
            tau_d: pair.tau_d,
            train_cost: total_cost(&conf, &config.initial_costs),
            n_positive: labels.n_positive,
        });
        if pair.tau_d <= pair.tau {
            return Ok(AdaptiveFit {
                model,
                trace,
                grouping,
                thresholds: pair,
                labels,
            });
        }
        costs = costs.with_fp_cost(costs.c10 + config.epsilon)?;
    }
    Err(Error::NonConvergence(Box::new(NonConvergence {
        max_iterations: config.max_iterations,
        trace: trace.to_f64(),
    })))
}

/// How many of the budgeted positives a deployment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Utilization {
    /// Threshold classification only; may leave budget unused.
    Threshold,
    /// Threshold classification, then the leftover budget goes to the next
    /// highest-scored instances.
    #[default]
    Full,
}

/// Scores `test`, regroups it by leaf score and classifies it against
/// `test_budget` with thresholds from the model's training costs.
pub fn apply_to_test<T: Scalar>(
    model: &TreeModel<T>,
    test: &Dataset,
    test_budget: &BudgetSpec,
    seed: u64,
) -> Result<BudgetedLabels<T>> {
    let grouping = leaf_groups(model, test)?;
    let pair = thresholds(&grouping, &model.train_costs, test_budget)?;
    classify_with_budget(&grouping, &pair, test_budget, seed)
}

pub fn deploy<T: Scalar>(
    model: &TreeModel<T>,
    data: &Dataset,
    budget: &BudgetSpec,
    seed: u64,
    utilization: Utilization,
) -> Result<BudgetedLabels<T>> {
    let labels = apply_to_test(model, data, budget, seed)?;
    Ok(match utilization {
        Utilization::Threshold => labels,
        Utilization::Full => fill_to_budget(&leaf_groups(model, data)?, labels, budget, seed),
    })
}
