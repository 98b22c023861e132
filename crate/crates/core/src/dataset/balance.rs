//! Class ratio, replication oversampling and stratified folds.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DatasetError, OmicsDataset, Result};

/// Minority/majority bookkeeping for a binary dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassBalance {
    pub minority_class: usize,
    pub majority_class: usize,
    pub minority_count: usize,
    pub majority_count: usize,
    /// `minority_count / majority_count`
    pub alpha: f64,
}

impl ClassBalance {
    /// Classify two counts; on a tie class 0 is reported as the minority.
    pub fn from_counts(count0: usize, count1: usize) -> Self {
        let (minority_class, minority_count, majority_class, majority_count) = if count0 <= count1 {
            (0, count0, 1, count1)
        } else {
            (1, count1, 0, count0)
        };
        let alpha = if majority_count == 0 {
            1.0
        } else {
            minority_count as f64 / majority_count as f64
        };
        Self {
            minority_class,
            majority_class,
            minority_count,
            majority_count,
            alpha,
        }
    }
}

pub fn alpha_ratio(d: &OmicsDataset) -> Result<ClassBalance> {
    if d.num_classes() != 2 {
        return Err(DatasetError::NotBinary(d.num_classes()));
    }
    let counts = d.class_counts();
    Ok(ClassBalance::from_counts(counts[0], counts[1]))
}

/// Number of minority rows needed to reach `target_alpha`.
fn target_minority_count(target_alpha: f64, majority: usize) -> usize {
    // tolerance so that e.g. 0.33 * 100 does not round up to 34
    (target_alpha * majority as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Oversample the minority class by uniform replication (with replacement)
/// until it holds `ceil(target_alpha * C_M)` rows. Copies are appended after
/// the original rows and flagged synthetic.
pub fn smote_replicate<R: Rng + ?Sized>(d: &OmicsDataset, target_alpha: f64, rng: &mut R) -> Result<OmicsDataset> {
    let balance = alpha_ratio(d)?;
    if !(target_alpha > 0.0 && target_alpha <= 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "target alpha must lie in (0, 1], got {target_alpha}"
        )));
    }
    if balance.alpha > target_alpha + 1e-12 {
        return Err(DatasetError::AlreadyAboveTarget {
            current: balance.alpha,
            target: target_alpha,
        });
    }
    let wanted = target_minority_count(target_alpha, balance.majority_count);
    let extra = wanted.saturating_sub(balance.minority_count);
    let pool: Vec<usize> = (0..d.len())
        .filter(|&i| d.labels()[i] == balance.minority_class && !d.synthetic_flags()[i])
        .collect();
    let pool = if pool.is_empty() {
        (0..d.len())
            .filter(|&i| d.labels()[i] == balance.minority_class)
            .collect()
    } else {
        pool
    };

    let mut indices: Vec<usize> = (0..d.len()).collect();
    indices.extend((0..extra).map(|_| pool[rng.random_range(0..pool.len())]));
    let mut out = d.select_rows(&indices)?;
    for flag in &mut out.synthetic[d.len()..] {
        *flag = true;
    }
    Ok(out)
}

/// Per-sample fold indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub fold_assignments: Vec<usize>,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_assignments.len())
            .filter(|&i| self.fold_assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_assignments.len())
            .filter(|&i| self.fold_assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold split: each class is shuffled and dealt round-robin,
/// continuing the rotation across classes so fold sizes differ by at most one.
pub fn stratified_kfold<R: Rng + ?Sized>(d: &OmicsDataset, k: usize, rng: &mut R) -> Result<FoldSplit> {
    if k < 2 {
        return Err(DatasetError::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    for (class, &count) in d.class_counts().iter().enumerate() {
        if count < k {
            return Err(DatasetError::TooFewSamplesPerClass { class, count, k });
        }
    }
    let mut fold_assignments = vec![0; d.len()];
    let mut position = 0;
    for class in 0..d.num_classes() {
        let mut members: Vec<usize> = (0..d.len()).filter(|&i| d.labels()[i] == class).collect();
        members.shuffle(rng);
        for i in members {
            fold_assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldSplit { k, fold_assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn counts_dataset(n0: usize, n1: usize) -> OmicsDataset {
        let n = n0 + n1;
        OmicsDataset::new(
            (0..n).map(|i| format!("s{i}")).collect(),
            (0..n).map(|i| vec![i as f64]).collect(),
            vec!["f".into()],
            (0..n).map(|i| usize::from(i >= n0)).collect(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_ratio(&counts_dataset(100, 10)).unwrap().alpha - 0.10).abs() < 1e-15);
        let b = alpha_ratio(&counts_dataset(50, 50)).unwrap();
        assert_eq!(b.alpha, 1.0);
        assert_eq!(b.minority_class, 0);
        let b = alpha_ratio(&counts_dataset(500, 33)).unwrap();
        assert!((b.alpha - 0.066).abs() < 1e-12);
        assert_eq!((b.minority_class, b.minority_count, b.majority_count), (1, 33, 500));
    }

    #[test]
    fn replication_to_half() {
        let d = counts_dataset(100, 10);
        let out = smote_replicate(&d, 0.5, &mut rng_from_seed(1)).unwrap();
        assert_eq!(out.class_counts(), vec![100, 50]);
        assert_eq!(out.num_synthetic(), 40);
        assert!(out.synthetic_flags()[..110].iter().all(|s| !s));
        for i in 0..110 {
            assert_eq!(out.row(i), d.row(i));
        }
        let full = smote_replicate(&d, 1.0, &mut rng_from_seed(1)).unwrap();
        assert_eq!(full.class_counts(), vec![100, 100]);
    }

    #[test]
    fn replication_targets_round_sensibly() {
        let d = counts_dataset(100, 10);
        let out = smote_replicate(&d, 0.33, &mut rng_from_seed(1)).unwrap();
        assert_eq!(out.class_counts()[1], 33);
    }

    #[test]
    fn replication_is_seeded() {
        let d = counts_dataset(100, 10);
        let a = smote_replicate(&d, 0.7, &mut rng_from_seed(9)).unwrap();
        let b = smote_replicate(&d, 0.7, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replication_errors() {
        let d = counts_dataset(100, 60);
        assert!(matches!(
            smote_replicate(&d, 0.5, &mut rng_from_seed(1)),
            Err(DatasetError::AlreadyAboveTarget { .. })
        ));
        let three = OmicsDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec!["f".into()],
            vec![0, 1, 2],
            3,
        )
        .unwrap();
        assert!(matches!(
            smote_replicate(&three, 1.0, &mut rng_from_seed(1)),
            Err(DatasetError::NotBinary(3))
        ));
    }

    #[test]
    fn kfold_examples() {
        let d = counts_dataset(4, 4);
        let split = stratified_kfold(&d, 4, &mut rng_from_seed(3)).unwrap();
        assert_eq!(split.fold_sizes(), vec![2, 2, 2, 2]);
        for f in 0..4 {
            let classes: Vec<usize> = split.test_indices(f).iter().map(|&i| d.labels()[i]).collect();
            assert_eq!(classes.iter().filter(|&&c| c == 1).count(), 1);
        }

        let d = counts_dataset(8, 2);
        let split = stratified_kfold(&d, 2, &mut rng_from_seed(3)).unwrap();
        for f in 0..2 {
            let minority = split.test_indices(f).iter().filter(|&&i| d.labels()[i] == 1).count();
            assert_eq!(minority, 1);
        }

        let d = counts_dataset(10, 3);
        assert!(matches!(
            stratified_kfold(&d, 4, &mut rng_from_seed(3)),
            Err(DatasetError::TooFewSamplesPerClass {
                class: 1,
                count: 3,
                k: 4
            })
        ));
    }
}
