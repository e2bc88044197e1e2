//! Sweep aggregation and CSV output.

use std::io::Write;

use super::stats::{paired_t_test, sign_test};
use super::{AggregateRow, RunRow, Selection, SweepModel};
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 8] = [
    "feature_fraction",
    "budget_fraction",
    "model",
    "run",
    "cost",
    "accuracy",
    "precision",
    "n_positive",
];

pub const AGGREGATE_HEADER: [&str; 9] = [
    "feature_fraction",
    "budget_fraction",
    "model",
    "mean_cost",
    "mean_accuracy",
    "mean_precision",
    "p_value",
    "sign_p_value",
    "note",
];

pub const SELECTION_HEADER: [&str; 8] = [
    "feature_fraction",
    "budget_fraction",
    "model",
    "max_depth",
    "min_samples_leaf",
    "min_cost_reduction",
    "laplace",
    "mean_train_cost",
];

/// Written for ratios with a zero denominator.
const UNDEFINED: &str = "undefined";

fn opt(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), |x| x.to_string())
}

type CellKey = (u64, u64);

fn key(row: &RunRow) -> CellKey {
    (row.feature_fraction.to_bits(), row.budget_fraction.to_bits())
}

/// Per-(cell, model) means in first-appearance order, with the adaptive vs
/// plain-tree cost comparison on the adaptive row. Every model present in a
/// cell must cover the same runs, each exactly once.
pub fn aggregate(rows: &[RunRow], with_sign_test: bool) -> Result<Vec<AggregateRow>> {
    let mut cells: Vec<CellKey> = Vec::new();
    for r in rows {
        if !cells.contains(&key(r)) {
            cells.push(key(r));
        }
    }
    let mut out = Vec::new();
    for cell in cells {
        let in_cell: Vec<&RunRow> = rows.iter().filter(|r| key(r) == cell).collect();
        let (ff, bf) = (in_cell[0].feature_fraction, in_cell[0].budget_fraction);
        let mut models: Vec<SweepModel> = Vec::new();
        for r in &in_cell {
            if !models.contains(&r.model) {
                models.push(r.model);
            }
        }
        let runs_of = |m: SweepModel| {
            let mut runs: Vec<&RunRow> = in_cell.iter().copied().filter(|r| r.model == m).collect();
            runs.sort_by_key(|r| r.run);
            runs
        };
        let reference: Vec<usize> = runs_of(models[0]).iter().map(|r| r.run).collect();
        for &m in &models {
            let runs: Vec<usize> = runs_of(m).iter().map(|r| r.run).collect();
            if runs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Aggregation(format!(
                    "cell (feature_fraction={ff}, budget_fraction={bf}): model {m} repeats a run"
                )));
            }
            if runs != reference {
                return Err(Error::Aggregation(format!(
                    "cell (feature_fraction={ff}, budget_fraction={bf}): model {m} covers different runs than {}",
                    models[0]
                )));
            }
        }

        let cost_vector = |m: SweepModel| runs_of(m).iter().map(|r| r.cost).collect::<Vec<f64>>();
        let comparison = if models.contains(&SweepModel::Adacsl) && models.contains(&SweepModel::PlainTree) {
            let (a, b) = (cost_vector(SweepModel::Adacsl), cost_vector(SweepModel::PlainTree));
            if a.len() >= 2 {
                let sign = if with_sign_test { Some(sign_test(&a, &b)?) } else { None };
                Some((paired_t_test(&a, &b)?, sign))
            } else {
                None
            }
        } else {
            None
        };

        for &m in &models {
            let runs = runs_of(m);
            let n = runs.len() as f64;
            let precisions: Vec<f64> = runs.iter().filter_map(|r| r.precision).collect();
            let mut notes = Vec::new();
            let (mut p_value, mut sign_p_value) = (None, None);
            if m == SweepModel::Adacsl {
                match &comparison {
                    Some((sig, sign)) => {
                        p_value = Some(sig.p_value);
                        sign_p_value = *sign;
                        if sig.no_difference {
                            notes.push("no difference".to_string());
                        }
                        if sig.degenerate {
                            notes.push("degenerate: constant nonzero difference".to_string());
                        }
                    }
                    None => notes.push("no p-value: needs plain-tree pairs and at least 2 runs".to_string()),
                }
                let fallbacks = runs.iter().filter(|r| !r.converged).count();
                if fallbacks > 0 {
                    notes.push(format!("{fallbacks} runs did not converge"));
                }
            }
            let undefined = runs.len() - precisions.len();
            if undefined > 0 {
                notes.push(format!("precision undefined in {undefined} runs"));
            }
            out.push(AggregateRow {
                feature_fraction: ff,
                budget_fraction: bf,
                model: m,
                runs: runs.len(),
                mean_cost: runs.iter().map(|r| r.cost).sum::<f64>() / n,
                mean_accuracy: runs.iter().map(|r| r.accuracy).sum::<f64>() / n,
                mean_precision: (!precisions.is_empty())
                    .then(|| precisions.iter().sum::<f64>() / precisions.len() as f64),
                p_value,
                sign_p_value,
                note: notes.join("; "),
            });
        }
    }
    Ok(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<report>", e))
}

pub fn write_report<W: Write>(out: W, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record([
            r.feature_fraction.to_string(),
            r.budget_fraction.to_string(),
            r.model.to_string(),
            r.run.to_string(),
            r.cost.to_string(),
            r.accuracy.to_string(),
            opt(r.precision, UNDEFINED),
            r.n_positive.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_aggregate<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.feature_fraction.to_string(),
            r.budget_fraction.to_string(),
            r.model.to_string(),
            r.mean_cost.to_string(),
            r.mean_accuracy.to_string(),
            opt(r.mean_precision, UNDEFINED),
            opt(r.p_value, ""),
            opt(r.sign_p_value, ""),
            r.note.clone(),
        ])?;
    }
    finish(w)
}

pub fn write_selection<W: Write>(out: W, rows: &[Selection]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SELECTION_HEADER)?;
    for s in rows {
        w.write_record([
            s.feature_fraction.to_string(),
            s.budget_fraction.to_string(),
            s.model.to_string(),
            s.params.max_depth.to_string(),
            s.params.min_samples_leaf.to_string(),
            s.params.min_cost_reduction.to_string(),
            s.params.laplace.to_string(),
            s.mean_train_cost.to_string(),
        ])?;
    }
    finish(w)
}
