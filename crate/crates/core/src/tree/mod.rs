//! Cost-sensitive binary decision tree.
//!
//! Splits minimize the summed expected cost of the children, where each
//! child is charged `min_l sum_j c(l, j) * n_j` (the cost of its
//! cost-optimal label). Leaves carry raw positive fractions as scores, so
//! instances in a leaf share one score and leaves with identical fractions
//! collapse into one [`LeafGrouping`] group.

mod persist;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use persist::{from_document, to_document, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::grouping::LeafGrouping;
use crate::scalar::Scalar;
use crate::types::{CostMatrix, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams<T> {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// A split must reduce node cost by at least this much (and by a strictly positive amount).
    pub min_cost_reduction: T,
    /// Laplace-smoothed leaf scores `(n_pos + 1) / (n + 2)`.
    #[serde(default)]
    pub laplace: bool,
}

impl<T: Scalar> Default for TreeParams<T> {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_samples_leaf: 1,
            min_cost_reduction: T::zero(),
            laplace: false,
        }
    }
}

impl<T: Scalar> TreeParams<T> {
    pub fn new(max_depth: usize, min_samples_leaf: usize) -> Self {
        Self {
            max_depth,
            min_samples_leaf,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidInput("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidInput("min_samples_leaf must be >= 1".into()));
        }
        if !self.min_cost_reduction.is_finite_value() || self.min_cost_reduction < T::zero() {
            return Err(Error::InvalidInput("min_cost_reduction must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<T> {
    /// `value < threshold` goes left, `value >= threshold` right.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
    Leaf { n_pos: usize, n_neg: usize, score: T },
}

impl<T: Scalar> TreeNode<T> {
    fn route(&self, x: &[f64]) -> &TreeNode<T> {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if x[*feature] < *threshold { left } else { right };
        }
        node
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TreeNode<T>>) {
        match self {
            TreeNode::Leaf { .. } => out.push(self),
            TreeNode::Split { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub iteration_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel<T> {
    pub feature_names: Vec<String>,
    pub hyperparams: TreeParams<T>,
    pub train_costs: CostMatrix<T>,
    pub metadata: ModelMetadata,
    pub root: TreeNode<T>,
}

impl<T: Scalar> TreeModel<T> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&TreeNode<T>> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match &self.root {
            TreeNode::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            TreeNode::Leaf { .. } => None,
        }
    }

    pub fn with_metadata(mut self, metadata: ModelMetadata) -> Self {
        self.metadata = metadata;
        self
    }
}

/// Expected cost of a node under its cost-optimal label.
pub fn node_cost<T: Scalar>(costs: &CostMatrix<T>, n_neg: usize, n_pos: usize) -> T {
    let neg = T::from_count(n_neg);
    let pos = T::from_count(n_pos);
    let as_negative = costs.c00 * neg + costs.c01 * pos;
    let as_positive = costs.c10 * neg + costs.c11 * pos;
    as_negative.min_of(as_positive)
}

/// A point strictly above `lo` and at most `hi`.
fn split_point(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate<T> {
    pub feature: usize,
    pub threshold: f64,
    pub cost: T,
}

/// Cheapest admissible split of the rows in `idx`, ties going to the lowest
/// feature index and then the lowest threshold.
pub fn best_split<T: Scalar>(
    data: &Dataset,
    idx: &[usize],
    costs: &CostMatrix<T>,
    min_samples_leaf: usize,
) -> Option<SplitCandidate<T>> {
    let labels = data.labels();
    let n = idx.len();
    let total_pos = idx.iter().filter(|&&i| labels[i]).count();
    let total_neg = n - total_pos;
    let mut best: Option<SplitCandidate<T>> = None;
    let mut sorted: Vec<(f64, bool)> = Vec::with_capacity(n);

    for feature in 0..data.n_features() {
        sorted.clear();
        sorted.extend(idx.iter().map(|&i| (data.value(i, feature), labels[i])));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

        let (mut left_pos, mut left_neg) = (0usize, 0usize);
        for i in 0..n.saturating_sub(1) {
            if sorted[i].1 {
                left_pos += 1;
            } else {
                left_neg += 1;
            }
            if sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let left_n = i + 1;
            if left_n < min_samples_leaf || n - left_n < min_samples_leaf {
                continue;
            }
            let cost = node_cost(costs, left_neg, left_pos)
                + node_cost(costs, total_neg - left_neg, total_pos - left_pos);
            if best.is_none_or(|b| cost < b.cost) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: split_point(sorted[i].0, sorted[i + 1].0),
                    cost,
                });
            }
        }
    }
    best
}

/// Whether a split reducing node cost from `parent` to `children` is taken.
pub fn accepts_reduction<T: Scalar>(parent: T, children: T, params: &TreeParams<T>) -> bool {
    let reduction = parent - children;
    reduction > T::tolerance() && reduction >= params.min_cost_reduction
}

struct Grower<'a, T> {
    data: &'a Dataset,
    costs: &'a CostMatrix<T>,
    params: &'a TreeParams<T>,
}

impl<T: Scalar> Grower<'_, T> {
    fn leaf(&self, n_pos: usize, n_neg: usize) -> TreeNode<T> {
        let score = if self.params.laplace {
            T::from_count(n_pos + 1) / T::from_count(n_pos + n_neg + 2)
        } else {
            T::from_count(n_pos) / T::from_count(n_pos + n_neg)
        };
        TreeNode::Leaf { n_pos, n_neg, score }
    }

    fn grow(&self, idx: Vec<usize>, depth: usize) -> TreeNode<T> {
        let labels = self.data.labels();
        let n_pos = idx.iter().filter(|&&i| labels[i]).count();
        let n_neg = idx.len() - n_pos;
        if n_pos == 0 || n_neg == 0 || depth >= self.params.max_depth {
            return self.leaf(n_pos, n_neg);
        }
        let Some(split) = best_split(self.data, &idx, self.costs, self.params.min_samples_leaf) else {
            return self.leaf(n_pos, n_neg);
        };
        let parent = node_cost(self.costs, n_neg, n_pos);
        if !accepts_reduction(parent, split.cost, self.params) {
            return self.leaf(n_pos, n_neg);
        }
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.data.value(i, split.feature) < split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }
}

/// Grows a tree on `data` under `costs`. Deterministic in its inputs.
pub fn fit<T: Scalar>(data: &Dataset, costs: &CostMatrix<T>, params: &TreeParams<T>) -> Result<TreeModel<T>> {
    params.validate()?;
    if data.n_instances() == 0 {
        return Err(Error::InvalidInput("cannot fit on an empty dataset".into()));
    }
    let grower = Grower { data, costs, params };
    let root = grower.grow((0..data.n_instances()).collect(), 0);
    Ok(TreeModel {
        feature_names: data.feature_names().to_vec(),
        hyperparams: *params,
        train_costs: *costs,
        metadata: ModelMetadata::default(),
        root,
    })
}

/// Positive-class score of the leaf `instance` routes to.
pub fn score<T: Scalar>(model: &TreeModel<T>, instance: &[f64]) -> Result<T> {
    if instance.len() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: instance.len(),
        });
    }
    match model.root.route(instance) {
        TreeNode::Leaf { score, .. } => Ok(*score),
        TreeNode::Split { .. } => unreachable!("route always ends at a leaf"),
    }
}

pub fn score_all<T: Scalar>(model: &TreeModel<T>, data: &Dataset) -> Result<Vec<T>> {
    (0..data.n_instances()).map(|i| score(model, data.row(i))).collect()
}

/// Instances of `data` grouped by the score of the leaf they reach.
pub fn leaf_groups<T: Scalar>(model: &TreeModel<T>, data: &Dataset) -> Result<LeafGrouping<T>> {
    LeafGrouping::from_scores(&score_all(model, data)?)
}
