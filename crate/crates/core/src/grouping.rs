//! Score-equal subsets of a data set, ordered by descending score.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LeafGroup<T> {
    pub score: T,
    /// Instance indices, ascending.
    pub members: Vec<usize>,
}

impl<T> LeafGroup<T> {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Partition of `0..n_instances` into groups with strictly decreasing scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafGrouping<T> {
    groups: Vec<LeafGroup<T>>,
    n_instances: usize,
}

fn check_score<T: Scalar>(s: T) -> Result<()> {
    if !s.is_finite_value() || s < T::zero() || s > T::one() {
        return Err(Error::InvalidInput(format!("score {s} outside [0, 1]")));
    }
    Ok(())
}

impl<T: Scalar> LeafGrouping<T> {
    /// Groups instances whose scores are exactly equal.
    pub fn from_scores(scores: &[T]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidInput("no scores to group".into()));
        }
        for &s in scores {
            check_score(s)?;
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut groups: Vec<LeafGroup<T>> = Vec::new();
        for i in order {
            match groups.last_mut() {
                Some(g) if g.score == scores[i] => g.members.push(i),
                _ => groups.push(LeafGroup {
                    score: scores[i],
                    members: vec![i],
                }),
            }
        }
        Ok(Self {
            groups,
            n_instances: scores.len(),
        })
    }

    /// Builds a grouping from per-group scores and sizes; members are
    /// numbered consecutively from the first group.
    pub fn from_sizes(scores: &[T], sizes: &[usize]) -> Result<Self> {
        if scores.len() != sizes.len() {
            return Err(Error::Dimension {
                expected: scores.len(),
                actual: sizes.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::InvalidInput("no groups".into()));
        }
        let mut groups = Vec::with_capacity(scores.len());
        let mut next = 0;
        for (k, (&score, &size)) in scores.iter().zip(sizes).enumerate() {
            check_score(score)?;
            if size == 0 {
                return Err(Error::InvalidInput(format!("group {k} is empty")));
            }
            if k > 0 && score >= scores[k - 1] {
                return Err(Error::InvalidInput("group scores must be strictly decreasing".into()));
            }
            groups.push(LeafGroup {
                score,
                members: (next..next + size).collect(),
            });
            next += size;
        }
        Ok(Self {
            groups,
            n_instances: next,
        })
    }

    pub fn groups(&self) -> &[LeafGroup<T>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    pub fn scores(&self) -> Vec<T> {
        self.groups.iter().map(|g| g.score).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(LeafGroup::size).collect()
    }

    /// Number of instances in groups scoring strictly above `t`.
    pub fn mass_above(&self, t: T) -> usize {
        self.groups.iter().take_while(|g| g.score > t).map(LeafGroup::size).sum()
    }

    pub fn position_of(&self, score: T) -> Option<usize> {
        self.groups.iter().position(|g| g.score == score)
    }

    /// Count of label-1 members per group.
    pub fn positives_per_group(&self, labels: &[bool]) -> Result<Vec<usize>> {
        if labels.len() != self.n_instances {
            return Err(Error::Dimension {
                expected: self.n_instances,
                actual: labels.len(),
            });
        }
        Ok(self
            .groups
            .iter()
            .map(|g| g.members.iter().filter(|&&i| labels[i]).count())
            .collect())
    }

    /// Per-instance score vector.
    pub fn instance_scores(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_instances];
        for g in &self.groups {
            for &i in &g.members {
                out[i] = g.score;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_scores_merge() {
        let scores = [0.7, 0.2, 0.7, 0.2, 0.7, 0.2, 0.7, 0.2, 0.7, 0.2];
        let g = LeafGrouping::from_scores(&scores).unwrap();
        assert_eq!(g.scores(), vec![0.7, 0.2]);
        assert_eq!(g.sizes(), vec![5, 5]);
        assert_eq!(g.groups()[0].members, vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn from_sizes_rejects_unsorted() {
        assert!(LeafGrouping::from_sizes(&[0.5, 0.7], &[1, 1]).is_err());
        assert!(LeafGrouping::from_sizes(&[0.5, 0.5], &[1, 1]).is_err());
        let g = LeafGrouping::from_sizes(&[0.8, 0.7, 0.6, 0.5], &[5, 4, 3, 2]).unwrap();
        assert_eq!(g.n_instances(), 14);
        assert_eq!(g.mass_above(0.6), 9);
        assert_eq!(g.instance_scores()[13], 0.5);
    }

    #[test]
    fn rejects_out_of_range_scores() {
        assert!(LeafGrouping::from_scores(&[1.5]).is_err());
        assert!(LeafGrouping::from_scores(&[f64::NAN]).is_err());
    }
}
