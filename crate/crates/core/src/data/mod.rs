//! Loading, synthesizing, reducing and splitting data sets.

mod folds;
mod ingest;
mod mi;
mod synth;

use std::io::Write;
use std::path::Path;

pub use folds::{stratified_folds, FoldPlan, FoldSplit};
pub use ingest::{load_csv, read_csv, IngestConfig, Ingested, MISSING_CATEGORY};
pub use mi::{equal_frequency_bins, feature_information, mutual_information, reduce_features, DEFAULT_BINS};
pub use synth::{
    hard_dataset, model_a_profile, model_b_profile, running_example_profile, synth_generate, HardSpec, LeafProfile,
    SynthSpec,
};

use crate::error::{Error, Result};
use crate::types::Dataset;

/// Name of the label column written by [`write_dataset`].
pub const LABEL_COLUMN: &str = "label";

/// Writes the features and a trailing `label` column of 0/1 values. The
/// output reads back with [`IngestConfig::default`].
pub fn write_dataset<W: Write>(out: W, data: &Dataset) -> Result<()> {
    if data.feature_names().iter().any(|n| n == LABEL_COLUMN) {
        return Err(Error::InvalidInput(format!("a feature is already named '{LABEL_COLUMN}'")));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)?;
    for i in 0..data.n_instances() {
        let mut record: Vec<String> = data.row(i).iter().map(f64::to_string).collect();
        record.push(if data.labels()[i] { "1" } else { "0" }.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<dataset>", e))
}

pub fn save_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn written_data_reads_back() {
        let d = Dataset::new(
            vec![vec![1.5, 0.0], vec![-2.0, 1.0], vec![0.25, 1.0]],
            vec![true, false, true],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = read_csv(buf.as_slice(), Path::new("mem.csv"), &IngestConfig::default()).unwrap();
        assert_eq!(back.dataset, d);
    }
}
