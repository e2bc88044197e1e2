//! Post-hoc allocation: train without the budget, then hand the budget to
//! the highest-scored instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::LeafGrouping;
use crate::scalar::Scalar;
use crate::threshold::{fill_to_budget, static_threshold, BudgetedLabels};
use crate::tree::{fit, score_all, TreeModel, TreeParams};
use crate::types::{evaluate, BudgetSpec, CostMatrix, Dataset, Evaluation};

/// Labels the `min(limit, N)` highest scores positive; equal scores at the
/// boundary are sampled uniformly with `seed`.
pub fn posthoc_allocate<T: Scalar>(scores: &[T], budget: &BudgetSpec, seed: u64) -> Result<BudgetedLabels<T>> {
    let grouping = LeafGrouping::from_scores(scores)?;
    Ok(allocate_grouping(&grouping, budget, seed))
}

pub fn allocate_grouping<T: Scalar>(grouping: &LeafGrouping<T>, budget: &BudgetSpec, seed: u64) -> BudgetedLabels<T> {
    let empty = BudgetedLabels {
        labels: vec![false; grouping.n_instances()],
        n_positive: 0,
        tie_group_score: None,
        tie_fill: 0,
    };
    fill_to_budget(grouping, empty, budget, seed)
}

/// Expected total cost of post-hoc allocation when the boundary group is
/// sampled uniformly at random.
pub fn expected_posthoc_cost<T: Scalar>(
    grouping: &LeafGrouping<T>,
    group_positive_counts: &[usize],
    budget: &BudgetSpec,
    costs: &CostMatrix<T>,
) -> Result<T> {
    if group_positive_counts.len() != grouping.len() {
        return Err(Error::Dimension {
            expected: grouping.len(),
            actual: group_positive_counts.len(),
        });
    }
    let mut remaining = budget.limit;
    let mut tp = T::zero();
    let mut fp = T::zero();
    for (g, &pos) in grouping.groups().iter().zip(group_positive_counts) {
        if pos > g.size() {
            return Err(Error::InvalidInput(format!(
                "group has {pos} positives but only {} members",
                g.size()
            )));
        }
        if remaining == 0 {
            break;
        }
        let take = remaining.min(g.size());
        let expected_tp = T::from_count(take) * T::from_count(pos) / T::from_count(g.size());
        tp = tp + expected_tp;
        fp = fp + T::from_count(take) - expected_tp;
        remaining -= take;
    }
    let n_pos = T::from_count(group_positive_counts.iter().sum());
    let n_neg = T::from_count(grouping.n_instances()) - n_pos;
    Ok(costs.c01 * (n_pos - tp) + costs.c10 * fp + costs.c11 * tp + costs.c00 * (n_neg - fp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// Symmetric unit costs.
    PlainTree,
    /// The supplied cost matrix.
    CostTree,
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome<T> {
    pub model: TreeModel<T>,
    pub labels: BudgetedLabels<T>,
    pub evaluation: Evaluation<T>,
    /// Test instances scoring at or above the training threshold, before allocation.
    pub unconstrained_positives: usize,
}

pub fn train_baseline<T: Scalar>(
    kind: BaselineKind,
    data: &Dataset,
    costs: &CostMatrix<T>,
    hyperparams: &TreeParams<T>,
) -> Result<TreeModel<T>> {
    match kind {
        BaselineKind::PlainTree => fit(data, &CostMatrix::unit(), hyperparams),
        BaselineKind::CostTree => fit(data, costs, hyperparams),
    }
}

/// Trains the baseline on `train`, allocates `budget` on `test` by score and
/// evaluates the result under `costs`.
pub fn run_baseline<T: Scalar>(
    kind: BaselineKind,
    train: &Dataset,
    test: &Dataset,
    costs: &CostMatrix<T>,
    budget: &BudgetSpec,
    hyperparams: &TreeParams<T>,
    seed: u64,
) -> Result<BaselineOutcome<T>> {
    let model = train_baseline(kind, train, costs, hyperparams)?;
    let scores = score_all(&model, test)?;
    let tau = static_threshold(&model.train_costs)?;
    let unconstrained_positives = scores.iter().filter(|&&s| s >= tau).count();
    let labels = posthoc_allocate(&scores, budget, seed)?;
    let evaluation = evaluate(test.labels(), &labels.labels, costs)?;
    Ok(BaselineOutcome {
        model,
        labels,
        evaluation,
        unconstrained_positives,
    })
}
