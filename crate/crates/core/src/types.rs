//! Shared domain types: labelled data, cost matrices, budgets and
//! confusion counts with the metrics derived from them.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<bool>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>, feature_names: Vec<String>) -> Result<Self> {
        let k = feature_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        let mut features = Vec::with_capacity(rows.len() * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Dimension {
                    expected: k,
                    actual: row.len(),
                });
            }
            features.extend(row);
        }
        Self::from_flat(features, labels, feature_names)
    }

    pub fn from_flat(features: Vec<f64>, labels: Vec<bool>, feature_names: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let k = feature_names.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no instances".into()));
        }
        if features.len() != n * k {
            return Err(Error::Dimension {
                expected: n * k,
                actual: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite feature value at row {}, column {}",
                pos / k.max(1),
                pos % k.max(1)
            )));
        }
        let mut seen = HashSet::with_capacity(k);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate feature name '{name}'")));
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.n_features();
        &self.features[i * k..(i + 1) * k]
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.n_features() + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_instances()).map(|i| self.value(i, feature)).collect()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn n_negative(&self) -> usize {
        self.n_instances() - self.n_positive()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let k = self.n_features();
        let mut features = Vec::with_capacity(indices.len() * k);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::from_flat(features, labels, self.feature_names.clone())
    }

    /// Keeps the listed feature columns, in the given order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(self.n_instances() * columns.len());
        for i in 0..self.n_instances() {
            let row = self.row(i);
            features.extend(columns.iter().map(|&c| row[c]));
        }
        let names = columns.iter().map(|&c| self.feature_names[c].clone()).collect();
        Self::from_flat(features, self.labels.clone(), names)
    }
}

/// Binary cost matrix; `cLJ` is the cost of predicting `L` when the truth is `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix<T> {
    pub c00: T,
    pub c01: T,
    pub c10: T,
    pub c11: T,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(c00: T, c01: T, c10: T, c11: T) -> Result<Self> {
        for (name, v) in [("c00", c00), ("c01", c01), ("c10", c10), ("c11", c11)] {
            if !v.is_finite_value() || v < T::zero() {
                return Err(Error::InvalidInput(format!("{name} must be a finite nonnegative cost, got {v}")));
            }
        }
        Ok(Self { c00, c01, c10, c11 })
    }

    /// Zero-diagonal matrix from the false-negative and false-positive costs.
    pub fn canonical(fn_cost: T, fp_cost: T) -> Result<Self> {
        Self::new(T::zero(), fn_cost, fp_cost, T::zero())
    }

    /// Symmetric unit costs (plain misclassification error).
    pub fn unit() -> Self {
        Self {
            c00: T::zero(),
            c01: T::one(),
            c10: T::one(),
            c11: T::zero(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.c00 == T::zero() && self.c11 == T::zero()
    }

    pub fn cost(&self, predicted: bool, actual: bool) -> T {
        match (predicted, actual) {
            (false, false) => self.c00,
            (false, true) => self.c01,
            (true, false) => self.c10,
            (true, true) => self.c11,
        }
    }

    pub fn fn_cost(&self) -> T {
        self.c01
    }

    pub fn fp_cost(&self) -> T {
        self.c10
    }

    pub fn with_fp_cost(&self, c10: T) -> Result<Self> {
        Self::new(self.c00, self.c01, c10, self.c11)
    }

    pub fn to_f64(&self) -> CostMatrix<f64> {
        CostMatrix {
            c00: self.c00.as_f64(),
            c01: self.c01.as_f64(),
            c10: self.c10.as_f64(),
            c11: self.c11.as_f64(),
        }
    }
}

/// Upper bound on positive classifications over a data set of `basis_size` instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub limit: usize,
    pub basis_size: usize,
}

impl BudgetSpec {
    pub fn new(limit: usize, basis_size: usize) -> Result<Self> {
        if limit > basis_size {
            return Err(Error::InvalidInput(format!(
                "budget limit {limit} exceeds basis size {basis_size}"
            )));
        }
        Ok(Self { limit, basis_size })
    }

    /// `floor(fraction * n_positive)` positives over `basis_size` instances.
    pub fn from_positive_fraction(fraction: f64, n_positive: usize, basis_size: usize) -> Result<Self> {
        if !(fraction.is_finite() && fraction >= 0.0) {
            return Err(Error::InvalidInput(format!("budget fraction must be >= 0, got {fraction}")));
        }
        let limit = (fraction * n_positive as f64 + 1e-9).floor() as usize;
        Self::new(limit.min(basis_size), basis_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn actual_positive(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn actual_negative(&self) -> usize {
        self.fp + self.tn
    }

    pub fn predicted_positive(&self) -> usize {
        self.tp + self.fp
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(labels_true: &[bool], labels_pred: &[bool]) -> Result<ConfusionCounts> {
    if labels_true.len() != labels_pred.len() {
        return Err(Error::Dimension {
            expected: labels_true.len(),
            actual: labels_pred.len(),
        });
    }
    if labels_true.is_empty() {
        return Err(Error::InvalidInput("no labels to compare".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&y, &p) in labels_true.iter().zip(labels_pred) {
        match (p, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Total misclassification cost of a set of predictions.
pub fn total_cost<T: Scalar>(conf: &ConfusionCounts, costs: &CostMatrix<T>) -> T {
    costs.c01 * T::from_count(conf.fn_)
        + costs.c10 * T::from_count(conf.fp)
        + costs.c11 * T::from_count(conf.tp)
        + costs.c00 * T::from_count(conf.tn)
}

/// Confusion-derived ratios. `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    pub accuracy: Option<T>,
    pub precision: Option<T>,
    pub tpr: Option<T>,
    pub fpr: Option<T>,
}

fn ratio<T: Scalar>(num: usize, den: usize) -> Option<T> {
    (den > 0).then(|| T::from_count(num) / T::from_count(den))
}

pub fn metrics<T: Scalar>(conf: &ConfusionCounts) -> Metrics<T> {
    Metrics {
        accuracy: ratio(conf.tp + conf.tn, conf.total()),
        precision: ratio(conf.tp, conf.predicted_positive()),
        tpr: ratio(conf.tp, conf.actual_positive()),
        fpr: ratio(conf.fp, conf.actual_negative()),
    }
}

/// Confusion counts, cost and ratios of one set of predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub confusion: ConfusionCounts,
    pub cost: T,
    pub metrics: Metrics<T>,
}

pub fn evaluate<T: Scalar>(labels_true: &[bool], labels_pred: &[bool], costs: &CostMatrix<T>) -> Result<Evaluation<T>> {
    let confusion = confusion(labels_true, labels_pred)?;
    Ok(Evaluation {
        confusion,
        cost: total_cost(&confusion, costs),
        metrics: metrics(&confusion),
    })
}

#[cfg(test)]
mod tests {
    use num_rational::Ratio;

    use super::*;

    /// 1000 people, 100 infected; 200 flagged, 80 of them correctly.
    fn model_a_vectors() -> (Vec<bool>, Vec<bool>) {
        let mut truth = vec![false; 1000];
        let mut pred = vec![false; 1000];
        truth[..100].iter_mut().for_each(|y| *y = true);
        pred[..80].iter_mut().for_each(|p| *p = true);
        pred[100..220].iter_mut().for_each(|p| *p = true);
        (truth, pred)
    }

    #[test]
    fn one_of_each_cell() {
        let c = confusion(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 1 });
    }

    #[test]
    fn model_a_counts() {
        let (truth, pred) = model_a_vectors();
        let c = confusion(&truth, &pred).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 80, fp: 120, tn: 780, fn_: 20 });
        assert_eq!(c.total(), 1000);
    }

    #[test]
    fn identity_predictions() {
        let truth = [true, false, true, true, false];
        let c = confusion(&truth, &truth).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let costs = CostMatrix::canonical(19.0, 1.0).unwrap();
        assert_eq!(total_cost(&c, &costs), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(confusion(&[true], &[true, false]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn running_example_costs() {
        let exact = CostMatrix::canonical(Ratio::from_integer(19i64), Ratio::from_integer(1)).unwrap();
        let a = ConfusionCounts { tp: 80, fp: 120, tn: 780, fn_: 20 };
        let b = ConfusionCounts { tp: 60, fp: 20, tn: 880, fn_: 40 };
        assert_eq!(total_cost(&a, &exact), Ratio::from_integer(500));
        assert_eq!(total_cost(&b, &exact), Ratio::from_integer(780));
    }

    #[test]
    fn model_metrics() {
        let a = ConfusionCounts { tp: 80, fp: 120, tn: 780, fn_: 20 };
        let m = metrics::<Ratio<i64>>(&a);
        assert_eq!(m.precision, Some(Ratio::new(2, 5)));
        assert_eq!(m.tpr, Some(Ratio::new(4, 5)));
        assert_eq!(m.fpr, Some(Ratio::new(120, 900)));
        assert_eq!(m.accuracy, Some(Ratio::new(86, 100)));

        let b = ConfusionCounts { tp: 60, fp: 20, tn: 880, fn_: 40 };
        assert_eq!(metrics::<f64>(&b).precision, Some(0.75));
    }

    #[test]
    fn undefined_precision_is_explicit() {
        let c = ConfusionCounts { tp: 0, fp: 0, tn: 5, fn_: 2 };
        let m = metrics::<f64>(&c);
        assert_eq!(m.precision, None);
        assert_eq!(m.tpr, Some(0.0));
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(CostMatrix::new(0.0, -1.0, 1.0, 0.0).is_err());
        assert!(CostMatrix::new(0.0, f64::NAN, 1.0, 0.0).is_err());
        let c = CostMatrix::new(1.0, 5.0, 2.0, 0.0).unwrap();
        assert!(!c.is_canonical());
        assert_eq!(c.cost(true, false), 2.0);
    }

    #[test]
    fn dataset_invariants() {
        let names = vec!["a".to_string(), "a".to_string()];
        assert!(Dataset::new(vec![vec![1.0, 2.0]], vec![true], names).is_err());
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::new(vec![vec![1.0]], vec![true], names.clone()).is_err());
        assert!(Dataset::new(vec![], vec![], names.clone()).is_err());
        let d = Dataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![true, false], names).unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.column(0), vec![1.0, 3.0]);
        assert_eq!(d.select_features(&[1]).unwrap().feature_names(), &["b".to_string()]);
    }

    #[test]
    fn budget_bounds() {
        assert!(BudgetSpec::new(11, 10).is_err());
        let b = BudgetSpec::from_positive_fraction(0.25, 112, 746).unwrap();
        assert_eq!(b.limit, 28);
    }
}
