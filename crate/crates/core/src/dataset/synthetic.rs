//! Class-conditional Gaussian data standing in for omics tables.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DatasetError, OmicsDataset, Result};

/// Parameters of a synthetic imbalanced dataset.
///
/// Class 0 is the majority with all means at zero; class 1 is the minority
/// with mean `separation` on each of the first `n_informative` coordinates.
/// Every coordinate has unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_majority: usize,
    pub n_minority: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub separation: f64,
}

impl SyntheticSpec {
    pub fn new(n_majority: usize, n_minority: usize, n_features: usize, separation: f64) -> Self {
        Self {
            n_majority,
            n_minority,
            n_features,
            n_informative: n_features,
            separation,
        }
    }

    pub fn with_informative(mut self, n_informative: usize) -> Self {
        self.n_informative = n_informative;
        self
    }
}

/// Rows are generated majority first, then minority; sample ids are `s0000...`
/// and feature names `f00...`.
pub fn gen_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<OmicsDataset> {
    if spec.n_majority == 0 || spec.n_minority == 0 || spec.n_features == 0 {
        return Err(DatasetError::InvalidArgument(
            "synthetic counts must all be positive".into(),
        ));
    }
    if spec.n_informative > spec.n_features || !(spec.separation >= 0.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "invalid synthetic spec {spec:?}"
        )));
    }
    let n = spec.n_majority + spec.n_minority;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = usize::from(i >= spec.n_majority);
        let row = (0..spec.n_features)
            .map(|j| {
                let z: f64 = rng.sample(StandardNormal);
                if label == 1 && j < spec.n_informative {
                    z + spec.separation
                } else {
                    z
                }
            })
            .collect();
        rows.push(row);
        labels.push(label);
    }
    let width = if spec.n_features > 99 { 3 } else { 2 };
    OmicsDataset::new(
        (0..n).map(|i| format!("s{i:04}")).collect(),
        rows,
        (0..spec.n_features).map(|j| format!("f{j:0width$}")).collect(),
        labels,
        2,
    )
}
