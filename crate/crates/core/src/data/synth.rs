//! Synthetic data sets: leaf-profile fixtures with a known tree structure,
//! and a noisy latent-variable set for the sweep.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed;
use crate::types::Dataset;

/// One region of feature space: `size` instances, `positives` of them labelled 1,
/// all sharing `signature` on the signature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafProfile {
    pub size: usize,
    pub positives: usize,
    pub signature: Vec<f64>,
}

impl LeafProfile {
    pub fn new(size: usize, positives: usize, signature: &[f64]) -> Self {
        Self {
            size,
            positives,
            signature: signature.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub n_pos: usize,
    pub leaves: Vec<LeafProfile>,
    pub signature_names: Vec<String>,
    /// Uniform `[0, 1)` columns appended after the signature columns.
    pub noise_columns: usize,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.leaves.is_empty() {
            return Err(Error::InvalidInput("profile has no leaves".into()));
        }
        let size: usize = self.leaves.iter().map(|l| l.size).sum();
        let pos: usize = self.leaves.iter().map(|l| l.positives).sum();
        if size != self.n || pos != self.n_pos {
            return Err(Error::InvalidInput(format!(
                "leaves hold {size} instances and {pos} positives, spec says {} and {}",
                self.n, self.n_pos
            )));
        }
        for (k, leaf) in self.leaves.iter().enumerate() {
            if leaf.positives > leaf.size || leaf.size == 0 {
                return Err(Error::InvalidInput(format!("leaf {k} has an invalid size/positive count")));
            }
            if leaf.signature.len() != self.signature_names.len() {
                return Err(Error::InvalidInput(format!("leaf {k} signature has the wrong length")));
            }
        }
        Ok(())
    }
}

/// Generates instances leaf by leaf, then shuffles their order with `seed`.
pub fn synth_generate(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let mut rows: Vec<(Vec<f64>, bool)> = Vec::with_capacity(spec.n);
    for leaf in &spec.leaves {
        for i in 0..leaf.size {
            let mut row = leaf.signature.clone();
            row.extend((0..spec.noise_columns).map(|_| rng.random::<f64>()));
            rows.push((row, i < leaf.positives));
        }
    }
    rows.shuffle(&mut rng);
    let mut names = spec.signature_names.clone();
    names.extend((0..spec.noise_columns).map(|j| format!("noise_{j}")));
    let (rows, labels): (Vec<Vec<f64>>, Vec<bool>) = rows.into_iter().unzip();
    Dataset::new(rows, labels, names)
}

fn binary_names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("f{j}")).collect()
}

/// 1000 people, 100 infected; high fever (`f1`) marks 200 of them, 80 infected.
pub fn model_a_profile() -> SynthSpec {
    SynthSpec {
        n: 1000,
        n_pos: 100,
        leaves: vec![LeafProfile::new(200, 80, &[1.0]), LeafProfile::new(800, 20, &[0.0])],
        signature_names: binary_names(1),
        noise_columns: 2,
    }
}

/// Loss of taste (`f1`) marks 80 people, 60 infected.
pub fn model_b_profile() -> SynthSpec {
    SynthSpec {
        n: 1000,
        n_pos: 100,
        leaves: vec![LeafProfile::new(80, 60, &[1.0]), LeafProfile::new(920, 40, &[0.0])],
        signature_names: binary_names(1),
        noise_columns: 2,
    }
}

/// Both symptoms together. Columns: `f1` loss of taste (80 people, 60
/// infected), `f2` high fever (200 people, 80 infected).
pub fn running_example_profile() -> SynthSpec {
    SynthSpec {
        n: 1000,
        n_pos: 100,
        leaves: vec![
            LeafProfile::new(60, 50, &[1.0, 1.0]),
            LeafProfile::new(20, 10, &[1.0, 0.0]),
            LeafProfile::new(140, 30, &[0.0, 1.0]),
            LeafProfile::new(780, 10, &[0.0, 0.0]),
        ],
        signature_names: binary_names(2),
        noise_columns: 2,
    }
}

/// A weak-signal data set: a latent risk drives the labels, and features
/// observe it through heavy noise.
#[derive(Debug, Clone, PartialEq)]
pub struct HardSpec {
    pub n: usize,
    pub positive_rate: f64,
    /// Noise standard deviation of each continuous view of the latent risk.
    pub view_noise: Vec<f64>,
    /// Binary indicators `latent + noise > 1`, one per listed noise level.
    pub indicator_noise: Vec<f64>,
    pub noise_columns: usize,
    /// Noise added to the latent risk before ranking instances into classes.
    pub label_noise: f64,
}

impl Default for HardSpec {
    fn default() -> Self {
        Self {
            n: 2000,
            positive_rate: 0.15,
            view_noise: vec![1.0, 1.5, 2.0],
            indicator_noise: vec![1.0, 1.5],
            noise_columns: 3,
            label_noise: 0.5,
        }
    }
}

/// Exactly `round(positive_rate * n)` positives: the instances with the
/// highest noisy latent risk.
pub fn hard_dataset(spec: &HardSpec, seed: u64) -> Result<Dataset> {
    if spec.n < 2 || !(spec.positive_rate > 0.0 && spec.positive_rate < 1.0) {
        return Err(Error::InvalidInput("need n >= 2 and a positive rate in (0, 1)".into()));
    }
    let bad = |s: &f64| !(s.is_finite() && *s >= 0.0);
    if spec.view_noise.iter().chain(&spec.indicator_noise).any(bad) || bad(&spec.label_noise) {
        return Err(Error::InvalidInput("noise levels must be finite and nonnegative".into()));
    }
    let mut rng = seed::rng(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let latent: Vec<f64> = (0..spec.n).map(|_| std_normal.sample(&mut rng)).collect();
    let utility: Vec<f64> = latent
        .iter()
        .map(|z| z + spec.label_noise * std_normal.sample(&mut rng))
        .collect();
    let n_pos = ((spec.positive_rate * spec.n as f64).round() as usize).clamp(1, spec.n - 1);
    let mut order: Vec<usize> = (0..spec.n).collect();
    order.sort_by(|&a, &b| utility[b].total_cmp(&utility[a]).then(a.cmp(&b)));
    let mut labels = vec![false; spec.n];
    for &i in &order[..n_pos] {
        labels[i] = true;
    }

    let mut names = Vec::new();
    names.extend((0..spec.view_noise.len()).map(|j| format!("view_{j}")));
    names.extend((0..spec.indicator_noise.len()).map(|j| format!("flag_{j}")));
    names.extend((0..spec.noise_columns).map(|j| format!("noise_{j}")));
    let mut rows = Vec::with_capacity(spec.n);
    for &z in &latent {
        let mut row = Vec::with_capacity(names.len());
        for &s in &spec.view_noise {
            // Round to keep ties (and therefore split candidates) manageable.
            row.push(((z + s * std_normal.sample(&mut rng)) * 100.0).round() / 100.0);
        }
        for &s in &spec.indicator_noise {
            row.push(if z + s * std_normal.sample(&mut rng) > 1.0 { 1.0 } else { 0.0 });
        }
        for _ in 0..spec.noise_columns {
            row.push((rng.random::<f64>() * 100.0).round() / 100.0);
        }
        rows.push(row);
    }
    Dataset::new(rows, labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_counts() {
        let d = synth_generate(&model_a_profile(), 1).unwrap();
        assert_eq!(d.n_instances(), 1000);
        assert_eq!(d.n_positive(), 100);
        let marked: Vec<usize> = (0..1000).filter(|&i| d.value(i, 0) == 1.0).collect();
        assert_eq!(marked.len(), 200);
        assert_eq!(marked.iter().filter(|&&i| d.labels()[i]).count(), 80);
    }

    #[test]
    fn running_example_margins() {
        let d = synth_generate(&running_example_profile(), 2).unwrap();
        let count = |col: usize| {
            let rows: Vec<usize> = (0..1000).filter(|&i| d.value(i, col) == 1.0).collect();
            (rows.len(), rows.iter().filter(|&&i| d.labels()[i]).count())
        };
        assert_eq!(count(0), (80, 60));
        assert_eq!(count(1), (200, 80));
    }

    #[test]
    fn all_positive_profile() {
        let spec = SynthSpec {
            n: 5,
            n_pos: 5,
            leaves: vec![LeafProfile::new(5, 5, &[])],
            signature_names: vec![],
            noise_columns: 1,
        };
        assert_eq!(synth_generate(&spec, 0).unwrap().n_positive(), 5);
    }

    #[test]
    fn inconsistent_profiles_fail() {
        let mut spec = model_a_profile();
        spec.n_pos = 99;
        assert!(synth_generate(&spec, 0).is_err());
        let mut spec = model_a_profile();
        spec.leaves[0].positives = 300;
        spec.leaves[0].size = 200;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn hard_dataset_shape() {
        let d = hard_dataset(&HardSpec::default(), 3).unwrap();
        assert_eq!(d.n_instances(), 2000);
        assert_eq!(d.n_positive(), 300);
        assert_eq!(d.n_features(), 8);
        assert_eq!(d, hard_dataset(&HardSpec::default(), 3).unwrap());
    }
}
