//! Repeated stratified k-fold plans.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;
use crate::types::Dataset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k_folds: usize,
    /// `assignments[r][i]` is the test fold of instance `i` in repeat `r`.
    pub assignments: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    /// `repeat * k_folds + fold`.
    pub run: usize,
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldPlan {
    pub fn repeats(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_runs(&self) -> usize {
        self.repeats() * self.k_folds
    }

    /// All (train, test) pairs, ordered by repeat and then fold.
    pub fn splits(&self) -> Vec<FoldSplit> {
        let mut out = Vec::with_capacity(self.n_runs());
        for (repeat, folds) in self.assignments.iter().enumerate() {
            for fold in 0..self.k_folds {
                let (test, train): (Vec<usize>, Vec<usize>) = (0..folds.len()).partition(|&i| folds[i] == fold);
                out.push(FoldSplit {
                    run: repeat * self.k_folds + fold,
                    repeat,
                    fold,
                    train,
                    test,
                });
            }
        }
        out
    }
}

/// Shuffles each class with a per-repeat seed and deals it round-robin over
/// the folds, positives first, so per-fold class counts differ by at most one.
pub fn stratified_folds(data: &Dataset, k_folds: usize, repeats: usize, base_seed: u64) -> Result<FoldPlan> {
    if k_folds < 2 {
        return Err(Error::Stratification("need at least 2 folds".into()));
    }
    let labels = data.labels();
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let negatives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if positives.len() < k_folds || negatives.len() < k_folds {
        return Err(Error::Stratification(format!(
            "{} positives and {} negatives cannot fill {k_folds} folds",
            positives.len(),
            negatives.len()
        )));
    }
    let mut assignments = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut rng = seed::rng(seed::derive(base_seed, &[0xF01D, r as u64]));
        let mut pos = positives.clone();
        let mut neg = negatives.clone();
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let mut folds = vec![0; labels.len()];
        for (slot, &i) in pos.iter().chain(&neg).enumerate() {
            folds[i] = slot % k_folds;
        }
        assignments.push(folds);
    }
    Ok(FoldPlan { k_folds, assignments })
}
