//! Labelled tabular samples and the preprocessing applied before encoding.

mod balance;
mod csv_io;
mod selection;
mod synthetic;

use thiserror::Error;

pub use balance::{alpha_ratio, smote_replicate, stratified_kfold, ClassBalance, FoldSplit};
pub use csv_io::{load_csv, write_csv, CsvSchema};
pub use selection::{
    discretize_equal_frequency, mrmr_rank, mrmr_select, mutual_information, sample_variance, variance_filter, MrmrPick,
    DEFAULT_MI_BINS, DEFAULT_VARIANCE_THRESHOLD,
};
pub use synthetic::{gen_synthetic, SyntheticSpec};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: missing header row (expected `sample_id,...,label`)")]
    MissingHeader { path: String },
    #[error("non-numeric feature value {value:?} at row {row}, column {col}")]
    NonNumericFeature { row: usize, col: usize, value: String },
    #[error("label {value:?} at row {row} is not a class index below {num_classes}")]
    UnknownLabelValue {
        row: usize,
        value: String,
        num_classes: usize,
    },
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("class {0} has no samples")]
    MissingClass(usize),
    #[error("inconsistent dataset shape: {0}")]
    Shape(String),
    #[error("variance filter removed every feature")]
    AllFeaturesRemoved,
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("requested {k} features but only {available} exist")]
    KTooLarge { k: usize, available: usize },
    #[error("operation needs a binary dataset, found {0} classes")]
    NotBinary(usize),
    #[error("class ratio {current:.4} already above target {target:.4}")]
    AlreadyAboveTarget { current: f64, target: f64 },
    #[error("class {class} has {count} samples, fewer than k = {k}")]
    TooFewSamplesPerClass { class: usize, count: usize, k: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// Labelled samples with numeric features, stored row-major.
///
/// Rows appended by [`smote_replicate`] carry `synthetic == true` and must be
/// excluded from any scored set.
#[derive(Debug, Clone, PartialEq)]
pub struct OmicsDataset {
    sample_ids: Vec<String>,
    features: Vec<f64>,
    feature_names: Vec<String>,
    labels: Vec<usize>,
    num_classes: usize,
    synthetic: Vec<bool>,
}

impl OmicsDataset {
    /// Build a dataset from rows, checking every invariant.
    pub fn new(
        sample_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = rows.len();
        let synthetic = vec![false; n];
        let width = feature_names.len();
        let mut features = Vec::with_capacity(n * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(DatasetError::Shape(format!(
                    "row {i} has {} values, expected {width}",
                    row.len()
                )));
            }
            features.extend(row);
        }
        Self::from_parts(sample_ids, features, feature_names, labels, num_classes, synthetic)
    }

    pub(crate) fn from_parts(
        sample_ids: Vec<String>,
        features: Vec<f64>,
        feature_names: Vec<String>,
        labels: Vec<usize>,
        num_classes: usize,
        synthetic: Vec<bool>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(DatasetError::EmptyDataset);
        }
        if num_classes == 0 {
            return Err(DatasetError::Shape("num_classes must be positive".into()));
        }
        if sample_ids.len() != n || synthetic.len() != n {
            return Err(DatasetError::Shape(format!(
                "{} sample ids and {} synthetic flags for {n} labels",
                sample_ids.len(),
                synthetic.len()
            )));
        }
        if features.len() != n * feature_names.len() {
            return Err(DatasetError::Shape(format!(
                "{} feature values for {n} rows x {} columns",
                features.len(),
                feature_names.len()
            )));
        }
        if let Some(bad) = features.iter().position(|v| !v.is_finite()) {
            let width = feature_names.len().max(1);
            return Err(DatasetError::Shape(format!(
                "non-finite value at row {}, column {}",
                bad / width,
                bad % width
            )));
        }
        let mut seen = vec![false; num_classes];
        for (row, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(DatasetError::UnknownLabelValue {
                    row,
                    value: label.to_string(),
                    num_classes,
                });
            }
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(DatasetError::MissingClass(missing));
        }
        Ok(Self {
            sample_ids,
            features,
            feature_names,
            labels,
            num_classes,
            synthetic,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn synthetic_flags(&self) -> &[bool] {
        &self.synthetic
    }

    pub fn num_synthetic(&self) -> usize {
        self.synthetic.iter().filter(|s| **s).count()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.num_features();
        &self.features[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// One feature's values over all samples.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows (in order, repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let w = self.num_features();
        let mut features = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self::from_parts(
            indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            features,
            self.feature_names.clone(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.num_classes,
            indices.iter().map(|&i| self.synthetic[i]).collect(),
        )
    }

    /// New dataset restricted to the given feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.num_features()) {
            return Err(DatasetError::InvalidArgument(format!(
                "column {bad} out of range ({} features)",
                self.num_features()
            )));
        }
        let mut features = Vec::with_capacity(self.len() * columns.len());
        for row in self.rows() {
            features.extend(columns.iter().map(|&c| row[c]));
        }
        Self::from_parts(
            self.sample_ids.clone(),
            features,
            columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            self.labels.clone(),
            self.num_classes,
            self.synthetic.clone(),
        )
    }

    /// Index of a feature by name.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Rows that came from the original data (not oversampled copies).
    pub fn original_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.synthetic[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> OmicsDataset {
        OmicsDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec!["x".into(), "y".into()],
            vec![0, 1, 0],
            2,
        )
        .unwrap()
    }

    #[test]
    fn accessors_agree_with_rows() {
        let d = tiny();
        assert_eq!(d.len(), 3);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.column(1), vec![2.0, 4.0, 6.0]);
        assert_eq!(d.class_counts(), vec![2, 1]);
    }

    #[test]
    fn rejects_missing_class_and_bad_labels() {
        let err = OmicsDataset::new(vec!["a".into()], vec![vec![1.0]], vec!["x".into()], vec![0], 2).unwrap_err();
        assert!(matches!(err, DatasetError::MissingClass(1)));
        let err = OmicsDataset::new(vec!["a".into()], vec![vec![1.0]], vec!["x".into()], vec![3], 2).unwrap_err();
        assert!(matches!(err, DatasetError::UnknownLabelValue { .. }));
    }

    #[test]
    fn rejects_non_finite_values() {
        let err = OmicsDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![f64::NAN], vec![1.0]],
            vec!["x".into()],
            vec![0, 1],
            2,
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::Shape(_)));
    }

    #[test]
    fn column_selection_reorders() {
        let d = tiny().select_columns(&[1, 0]).unwrap();
        assert_eq!(d.feature_names(), &["y".to_string(), "x".to_string()]);
        assert_eq!(d.row(2), &[6.0, 5.0]);
        assert!(tiny().select_columns(&[2]).is_err());
    }
}
