//! Budget-constrained cost-sensitive classification.
//!
//! A cost-sensitive decision tree scores instances; a budget caps how many
//! may be labelled positive. [`threshold`] turns leaf scores and a budget
//! into labels, [`adaptive`] retrains the tree with a growing false-positive
//! cost until the budget no longer binds, and [`baselines`] allocate the
//! budget after the fact. [`roc`] holds the ROC-space geometry and
//! [`harness`] the cross-validated comparison.
//!
//! Costs, scores and thresholds are generic over [`Scalar`] (`f64`, `f32`
//! or exact rationals); feature values are always `f64`.

pub mod adaptive;
pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod grouping;
pub mod harness;
pub mod roc;
pub mod scalar;
pub mod seed;
pub mod threshold;
pub mod tree;
pub mod types;

pub use adaptive::{
    apply_to_test, deploy, fit_adaptive, project_budget, AdaptiveConfig, AdaptiveFit, AdaptiveTrace, IterationRecord,
    NonConvergence, Utilization,
};
pub use baselines::{posthoc_allocate, run_baseline, BaselineKind, BaselineOutcome};
pub use error::{Error, Result};
pub use grouping::{LeafGroup, LeafGrouping};
pub use scalar::Scalar;
pub use threshold::{
    classifier_threshold, classify_with_budget, fill_to_budget, static_threshold, thresholds, tie_proportion,
    BudgetedLabels, ThresholdPair,
};
pub use tree::{TreeModel, TreeNode, TreeParams};
pub use types::{evaluate, BudgetSpec, ConfusionCounts, CostMatrix, Dataset, Evaluation, Metrics};

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type CostMatrix64 = CostMatrix<f64>;
pub type CostMatrix32 = CostMatrix<f32>;
pub type ExactCostMatrix = CostMatrix<Exact>;
pub type LeafGrouping64 = LeafGrouping<f64>;
pub type ExactLeafGrouping = LeafGrouping<Exact>;
pub type TreeModel64 = TreeModel<f64>;
pub type TreeParams64 = TreeParams<f64>;
pub type AdaptiveConfig64 = AdaptiveConfig<f64>;
pub type AdaptiveFit64 = AdaptiveFit<f64>;
pub type ExactTreeModel = TreeModel<Exact>;
