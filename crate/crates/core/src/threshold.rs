//! Thresholds for budgeted classification over score-equal groups.
//!
//! The static threshold `tau` depends on costs alone. The classifier
//! dependent threshold `tau_d` is the highest group score at or above `tau`
//! whose cumulative mass (all groups scoring at least as high) reaches the
//! budget, or `tau` when no group qualifies. Groups above `tau_d` are
//! labelled positive, groups below negative, and the group at `tau_d`
//! receives exactly the remaining budget.

use crate::error::{Error, Result};
use crate::grouping::LeafGrouping;
use crate::scalar::Scalar;
use crate::seed;
use crate::types::{BudgetSpec, CostMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair<T> {
    pub tau: T,
    pub tau_d: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetedLabels<T> {
    pub labels: Vec<bool>,
    pub n_positive: usize,
    /// Score of the group that was only partly labelled positive.
    pub tie_group_score: Option<T>,
    /// Members of the tie group labelled positive.
    pub tie_fill: usize,
}

impl<T> BudgetedLabels<T> {
    fn from_labels(labels: Vec<bool>, tie_group_score: Option<T>, tie_fill: usize) -> Self {
        let n_positive = labels.iter().filter(|&&y| y).count();
        Self {
            labels,
            n_positive,
            tie_group_score,
            tie_fill,
        }
    }
}

/// Step function with `theta(0) = 1`.
fn theta<T: Scalar>(z: T) -> bool {
    z >= T::zero()
}

/// Cost-minimizing score cutoff for a binary cost matrix.
pub fn static_threshold<T: Scalar>(costs: &CostMatrix<T>) -> Result<T> {
    let den = costs.c01 + costs.c10 - costs.c00 - costs.c11;
    if den <= T::zero() {
        return Err(Error::DegenerateCost(format!(
            "c01 + c10 - c00 - c11 must be positive, got {den}"
        )));
    }
    let tau = (costs.c10 - costs.c00) / den;
    if tau < T::zero() || tau > T::one() {
        return Err(Error::DegenerateCost(format!("threshold {tau} outside [0, 1]")));
    }
    Ok(tau)
}

/// Classifier dependent threshold for `grouping` under `budget`.
pub fn classifier_threshold<T: Scalar>(grouping: &LeafGrouping<T>, tau: T, budget: &BudgetSpec) -> T {
    let mut cumulative = 0usize;
    for g in grouping.groups() {
        cumulative += g.size();
        if theta(g.score - tau) && cumulative >= budget.limit {
            // Scores descend, so the first qualifying group is the maximum.
            return g.score.max_of(tau);
        }
    }
    tau
}

/// Fraction of the group scoring exactly `tau_d` that the budget leaves room
/// for, clamped to `[0, 1]`.
pub fn tie_proportion<T: Scalar>(grouping: &LeafGrouping<T>, tau_d: T, budget: &BudgetSpec) -> Result<T> {
    let k = grouping
        .position_of(tau_d)
        .ok_or_else(|| Error::Logic(format!("no group scores exactly {tau_d}")))?;
    let above = T::from_count(grouping.mass_above(tau_d));
    let size = T::from_count(grouping.groups()[k].size());
    Ok(((T::from_count(budget.limit) - above) / size).clamp_unit())
}

pub fn thresholds<T: Scalar>(
    grouping: &LeafGrouping<T>,
    costs: &CostMatrix<T>,
    budget: &BudgetSpec,
) -> Result<ThresholdPair<T>> {
    let tau = static_threshold(costs)?;
    Ok(ThresholdPair {
        tau,
        tau_d: classifier_threshold(grouping, tau, budget),
    })
}

/// Labels instances from their group scores and the threshold pair.
///
/// The tie group gets `min(size, limit - above)` positives chosen uniformly
/// without replacement, so the positive count is exact for every seed.
pub fn classify_with_budget<T: Scalar>(
    grouping: &LeafGrouping<T>,
    pair: &ThresholdPair<T>,
    budget: &BudgetSpec,
    seed: u64,
) -> Result<BudgetedLabels<T>> {
    let mut labels = vec![false; grouping.n_instances()];
    let tie = grouping.position_of(pair.tau_d);
    if tie.is_none() && pair.tau_d > pair.tau {
        return Err(Error::Logic(format!(
            "tau_d = {} exceeds tau but matches no group score",
            pair.tau_d
        )));
    }
    let mut above = 0usize;
    let mut tie_fill = 0usize;
    let mut rng = seed::rng(seed);
    for (k, g) in grouping.groups().iter().enumerate() {
        if g.score > pair.tau_d {
            for &i in &g.members {
                labels[i] = true;
            }
            above += g.size();
        } else if Some(k) == tie {
            tie_fill = budget.limit.saturating_sub(above).min(g.size());
            for i in seed::sample_without_replacement(&g.members, tie_fill, &mut rng) {
                labels[i] = true;
            }
        }
    }
    let tie_score = tie.filter(|_| tie_fill > 0).map(|k| grouping.groups()[k].score);
    Ok(BudgetedLabels::from_labels(labels, tie_score, tie_fill))
}

/// Tops up `labels` to `min(limit, N)` positives, taking still-negative
/// instances in descending score order and sampling within the boundary group.
pub fn fill_to_budget<T: Scalar>(
    grouping: &LeafGrouping<T>,
    mut labels: BudgetedLabels<T>,
    budget: &BudgetSpec,
    seed: u64,
) -> BudgetedLabels<T> {
    let target = budget.limit.min(grouping.n_instances());
    let mut remaining = target.saturating_sub(labels.n_positive);
    if remaining == 0 {
        return labels;
    }
    let mut rng = seed::rng(seed::derive(seed, &[0xF111]));
    for g in grouping.groups() {
        if remaining == 0 {
            break;
        }
        let free: Vec<usize> = g.members.iter().copied().filter(|&i| !labels.labels[i]).collect();
        if free.is_empty() {
            continue;
        }
        let take = remaining.min(free.len());
        let chosen = if take == free.len() {
            free
        } else {
            labels.tie_group_score = Some(g.score);
            labels.tie_fill = take;
            seed::sample_without_replacement(&free, take, &mut rng)
        };
        for i in chosen {
            labels.labels[i] = true;
        }
        remaining -= take;
    }
    labels.n_positive = target;
    labels
}
