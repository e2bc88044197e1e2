//! Mutual information between a feature and the binary label, and
//! MI-ranked feature removal.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::Dataset;

pub const DEFAULT_BINS: usize = 10;

/// Equal-frequency bin index per value. Tied values share the bin of their
/// first rank.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut codes = vec![0; n];
    let mut run_bin = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank == 0 || values[i] != values[order[rank - 1]] {
            run_bin = rank * bins / n;
        }
        codes[i] = run_bin;
    }
    codes
}

fn discrete_codes(values: &[f64]) -> Vec<usize> {
    let mut levels: Vec<f64> = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    values
        .iter()
        .map(|v| levels.binary_search_by(|l| l.total_cmp(v)).expect("value is a level"))
        .collect()
}

/// Mutual information in bits. Features with at most `bins` distinct values
/// are treated as discrete; others are binned by equal frequency.
pub fn mutual_information(feature: &[f64], labels: &[bool], bins: usize) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: feature.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidInput("no instances".into()));
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(Error::DegenerateData("label vector is constant".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    let mut distinct: Vec<f64> = feature.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let codes = if distinct.len() <= bins {
        discrete_codes(feature)
    } else {
        equal_frequency_bins(feature, bins)
    };

    let n = labels.len() as f64;
    let mut joint: BTreeMap<(usize, bool), usize> = BTreeMap::new();
    let mut marginal: BTreeMap<usize, usize> = BTreeMap::new();
    for (&c, &y) in codes.iter().zip(labels) {
        *joint.entry((c, y)).or_default() += 1;
        *marginal.entry(c).or_default() += 1;
    }
    let n_pos = labels.iter().filter(|&&y| y).count() as f64;
    let mut mi = 0.0;
    for (&(c, y), &count) in &joint {
        let p_xy = count as f64 / n;
        let p_x = marginal[&c] as f64 / n;
        let p_y = if y { n_pos / n } else { 1.0 - n_pos / n };
        mi += p_xy * (p_xy / (p_x * p_y)).log2();
    }
    Ok(mi.max(0.0))
}

/// `(feature name, MI)` for every column, in column order.
pub fn feature_information(data: &Dataset, bins: usize) -> Result<Vec<(String, f64)>> {
    (0..data.n_features())
        .map(|j| Ok((data.feature_names()[j].clone(), mutual_information(&data.column(j), data.labels(), bins)?)))
        .collect()
}

/// Drops the `ceil((1 - keep_fraction) * k)` features that carry the most
/// information about the label, keeping the remaining columns in order.
/// Removing the strongest features makes the task harder on purpose.
pub fn reduce_features(data: &Dataset, keep_fraction: f64, bins: usize) -> Result<Dataset> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("keep_fraction must be in (0, 1], got {keep_fraction}")));
    }
    let k = data.n_features();
    let n_drop = (((1.0 - keep_fraction) * k as f64) - 1e-9).ceil().max(0.0) as usize;
    if n_drop == 0 {
        return Ok(data.clone());
    }
    let info = feature_information(data, bins)?;
    let mut ranked: Vec<usize> = (0..k).collect();
    ranked.sort_by(|&a, &b| {
        info[b]
            .1
            .partial_cmp(&info[a].1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| info[a].0.cmp(&info[b].0))
    });
    let dropped = &ranked[..n_drop.min(k)];
    let kept: Vec<usize> = (0..k).filter(|j| !dropped.contains(j)).collect();
    data.select_features(&kept)
}
