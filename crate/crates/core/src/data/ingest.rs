//! CSV ingestion with categorical encoding and missing-value handling.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::types::Dataset;

pub const MISSING_CATEGORY: &str = "__missing__";

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub label_column: String,
    pub positive_value: String,
    pub drop_columns: Vec<String>,
    /// Categorical columns with at most this many levels are one-hot encoded;
    /// wider ones are frequency encoded.
    pub max_onehot_cardinality: usize,
    /// Omit the first level of each one-hot encoded column.
    pub drop_first: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            label_column: "label".into(),
            positive_value: "1".into(),
            drop_columns: Vec::new(),
            max_onehot_cardinality: 10,
            drop_first: false,
        }
    }
}

impl IngestConfig {
    const KEYS: [&'static str; 5] = [
        "label_column",
        "positive_value",
        "drop_columns",
        "max_onehot_cardinality",
        "drop_first",
    ];

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_known(&Self::KEYS)?;
        let defaults = Self::default();
        Ok(Self {
            label_column: kv.require("label_column")?.to_string(),
            positive_value: kv.require("positive_value")?.to_string(),
            drop_columns: kv.list::<String>("drop_columns")?.unwrap_or_default(),
            max_onehot_cardinality: kv
                .parsed("max_onehot_cardinality")?
                .unwrap_or(defaults.max_onehot_cardinality),
            drop_first: kv.parsed("drop_first")?.unwrap_or(false),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Rows dropped because the label was missing.
    pub missing_labels: usize,
    /// Rows skipped because their field count did not match the header.
    pub malformed_rows: usize,
}

/// Rows with a wrong field count tolerated before ingestion fails.
const MAX_MALFORMED_FRACTION: f64 = 0.01;

fn is_missing(v: &str) -> bool {
    matches!(
        v.to_ascii_lowercase().as_str(),
        "" | "na" | "n/a" | "nan" | "null" | "none"
    )
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn load_csv(path: &Path, config: &IngestConfig) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path, config)
}

pub fn read_csv<R: Read>(input: R, path: &Path, config: &IngestConfig) -> Result<Ingested> {
    let fail = |message: String| Error::Ingest {
        path: PathBuf::from(path),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| fail(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = header
        .iter()
        .position(|h| *h == config.label_column)
        .ok_or_else(|| fail(format!("label column '{}' not found", config.label_column)))?;
    for d in &config.drop_columns {
        if !header.contains(d) {
            return Err(fail(format!("drop column '{d}' not found")));
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut total = 0usize;
    let mut malformed = 0usize;
    let mut missing_labels = 0usize;
    for record in reader.records() {
        total += 1;
        let record = match record {
            Ok(r) if r.len() == header.len() => r,
            Ok(_) => {
                malformed += 1;
                continue;
            }
            Err(e) if e.is_io_error() => return Err(fail(e.to_string())),
            Err(_) => {
                malformed += 1;
                continue;
            }
        };
        if is_missing(record[label_idx].trim()) {
            missing_labels += 1;
            continue;
        }
        rows.push(record.iter().map(|v| v.trim().to_string()).collect());
    }
    if total > 0 && malformed as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(fail(format!("{malformed} of {total} rows are malformed")));
    }
    if rows.is_empty() {
        return Err(fail("no usable rows".into()));
    }
    let labels: Vec<bool> = rows.iter().map(|r| r[label_idx] == config.positive_value).collect();
    if !labels.iter().any(|&y| y) {
        return Err(fail(format!(
            "positive value '{}' never occurs in column '{}'",
            config.positive_value, config.label_column
        )));
    }

    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == label_idx || config.drop_columns.contains(name) {
            continue;
        }
        let raw: Vec<&str> = rows.iter().map(|r| r[c].as_str()).collect();
        encode_column(name, &raw, config, &mut names, &mut columns);
    }

    let n = rows.len();
    let mut features = Vec::with_capacity(n * columns.len());
    for i in 0..n {
        features.extend(columns.iter().map(|col| col[i]));
    }
    let dataset = Dataset::from_flat(features, labels, names).map_err(|e| fail(e.to_string()))?;
    Ok(Ingested {
        dataset,
        missing_labels,
        malformed_rows: malformed,
    })
}

fn encode_column(
    name: &str,
    raw: &[&str],
    config: &IngestConfig,
    names: &mut Vec<String>,
    columns: &mut Vec<Vec<f64>>,
) {
    let parsed: Vec<Option<f64>> = raw
        .iter()
        .map(|v| if is_missing(v) { None } else { v.parse::<f64>().ok().filter(|x| x.is_finite()) })
        .collect();
    let numeric = raw
        .iter()
        .zip(&parsed)
        .all(|(v, p)| is_missing(v) || p.is_some())
        && parsed.iter().any(Option::is_some);

    if numeric {
        let mut present: Vec<f64> = parsed.iter().flatten().copied().collect();
        let fill = median(&mut present);
        names.push(name.to_string());
        columns.push(parsed.iter().map(|p| p.unwrap_or(fill)).collect());
        return;
    }

    let levels: Vec<&str> = raw
        .iter()
        .map(|v| if is_missing(v) { MISSING_CATEGORY } else { v })
        .collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &l in &levels {
        *counts.entry(l).or_default() += 1;
    }
    if counts.len() <= config.max_onehot_cardinality {
        for (j, level) in counts.keys().enumerate() {
            if config.drop_first && j == 0 {
                continue;
            }
            names.push(format!("{name}={level}"));
            columns.push(levels.iter().map(|l| if l == level { 1.0 } else { 0.0 }).collect());
        }
    } else {
        let n = levels.len() as f64;
        names.push(name.to_string());
        columns.push(levels.iter().map(|l| counts[l] as f64 / n).collect());
    }
}
