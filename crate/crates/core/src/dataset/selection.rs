//! Variance filtering and mRMR feature ranking.

use super::{DatasetError, OmicsDataset, Result};

/// Absolute sample-variance cut-off used by default.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.002;

/// Equal-frequency bins used to discretize continuous features before MI.
pub const DEFAULT_MI_BINS: usize = 8;

/// Bessel-corrected variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Keep the columns whose sample variance is at least `threshold`.
pub fn variance_filter(d: &OmicsDataset, threshold: f64) -> Result<OmicsDataset> {
    if !(threshold >= 0.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "variance threshold must be non-negative, got {threshold}"
        )));
    }
    let keep: Vec<usize> = (0..d.num_features())
        .filter(|&j| sample_variance(&d.column(j)) >= threshold)
        .collect();
    if keep.is_empty() {
        return Err(DatasetError::AllFeaturesRemoved);
    }
    d.select_columns(&keep)
}

/// Rank-based equal-frequency binning. Tied values always share a bin (the
/// bin of the first tied element in sorted order).
pub fn discretize_equal_frequency(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let bins = bins.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0; n];
    let mut current_bin = 0;
    for (pos, &i) in order.iter().enumerate() {
        let tied = pos > 0 && values[order[pos - 1]] == values[i];
        if !tied {
            current_bin = pos * bins / n;
        }
        out[i] = current_bin;
    }
    out
}

/// Compact a discrete sequence to indices `0..k` in ascending value order.
fn compact(values: &[usize]) -> (Vec<usize>, usize) {
    let mut uniq: Vec<usize> = values.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let idx = values
        .iter()
        .map(|v| uniq.binary_search(v).expect("value present"))
        .collect();
    (idx, uniq.len())
}

/// Mutual information in bits from the empirical joint distribution.
pub fn mutual_information(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(DatasetError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let n = x.len();
    let (xi, kx) = compact(x);
    let (yi, ky) = compact(y);
    let mut joint = vec![0usize; kx * ky];
    let mut cx = vec![0usize; kx];
    let mut cy = vec![0usize; ky];
    for (&a, &b) in xi.iter().zip(&yi) {
        joint[a * ky + b] += 1;
        cx[a] += 1;
        cy[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..kx {
        for b in 0..ky {
            let c = joint[a * ky + b];
            if c == 0 {
                continue;
            }
            // integer products are exact, so a factorized cell contributes exactly 0
            let ratio = (c as f64 * nf) / (cx[a] as f64 * cy[b] as f64);
            mi += (c as f64 / nf) * ratio.log2();
        }
    }
    Ok(mi.max(0.0))
}

/// One greedy mRMR pick with the quantities that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct MrmrPick {
    pub feature: usize,
    pub relevance: f64,
    /// Relevance minus mean redundancy at the time of the pick (equal to the
    /// relevance for the first pick).
    pub score: f64,
}

/// Greedy minimum-redundancy maximum-relevance selection (difference form).
pub fn mrmr_select(d: &OmicsDataset, k: usize) -> Result<Vec<MrmrPick>> {
    let m = d.num_features();
    if k > m {
        return Err(DatasetError::KTooLarge { k, available: m });
    }
    if d.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let binned: Vec<Vec<usize>> = (0..m)
        .map(|j| discretize_equal_frequency(&d.column(j), DEFAULT_MI_BINS))
        .collect();
    let relevance: Vec<f64> = binned
        .iter()
        .map(|f| mutual_information(f, d.labels()))
        .collect::<Result<_>>()?;

    let mut picks: Vec<MrmrPick> = Vec::with_capacity(k);
    let mut chosen = vec![false; m];
    let mut redundancy_sum = vec![0.0; m];
    for step in 0..k {
        if let Some(last) = picks.last() {
            let last_bins = &binned[last.feature];
            for j in (0..m).filter(|&j| !chosen[j]) {
                redundancy_sum[j] += mutual_information(&binned[j], last_bins)?;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for j in (0..m).filter(|&j| !chosen[j]) {
            let score = if step == 0 {
                relevance[j]
            } else {
                relevance[j] - redundancy_sum[j] / step as f64
            };
            // strict comparison keeps the lowest index on ties
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let (feature, score) = best.expect("k <= feature count");
        chosen[feature] = true;
        picks.push(MrmrPick {
            feature,
            relevance: relevance[feature],
            score,
        });
    }
    Ok(picks)
}

/// Indices of the top `k` features in greedy mRMR order.
pub fn mrmr_rank(d: &OmicsDataset, k: usize) -> Result<Vec<usize>> {
    Ok(mrmr_select(d, k)?.into_iter().map(|p| p.feature).collect())
}
