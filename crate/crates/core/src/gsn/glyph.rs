//! Mapping expression values to glyph size and rotation.

use crate::dataset::OmicsDataset;

use super::{GsnError, Result};

/// z-scores are clamped to `[-Z_CLAMP, Z_CLAMP]` before the affine maps.
pub const Z_CLAMP: f64 = 3.0;

/// Per-feature mean and sample standard deviation, fitted on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn fit(train: &OmicsDataset) -> Self {
        let n = train.len() as f64;
        let m = train.num_features();
        let mut mean = vec![0.0; m];
        for row in train.rows() {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m];
        for row in train.rows() {
            for j in 0..m {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let denom = (n - 1.0).max(1.0);
        let std = var.into_iter().map(|v| (v / denom).sqrt()).collect();
        Self { mean, std }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn zscore(&self, j: usize, value: f64) -> Result<f64> {
        let s = self.std[j];
        if !(s > 0.0) {
            return Err(GsnError::ZeroVarianceFeature(j));
        }
        Ok((value - self.mean[j]) / s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeRange {
    pub min_px: f64,
    pub max_px: f64,
}

impl SizeRange {
    pub fn new(min_px: f64, max_px: f64) -> Result<Self> {
        if !(min_px > 0.0 && max_px >= min_px) {
            return Err(GsnError::InvalidConfig(format!(
                "bad glyph size range ({min_px}, {max_px})"
            )));
        }
        Ok(Self { min_px, max_px })
    }
}

/// Drawing parameters for one feature of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Glyph {
    /// Diagonal of the diamond in pixels.
    pub size: f64,
    /// Degrees in `[0, 180)`.
    pub rotation_deg: f64,
}

pub fn glyph_for_value(z: f64, range: SizeRange) -> Glyph {
    let t = (z.clamp(-Z_CLAMP, Z_CLAMP) + Z_CLAMP) / (2.0 * Z_CLAMP);
    let size = range.min_px + t * (range.max_px - range.min_px);
    let rotation = (t * 180.0) % 180.0;
    Glyph {
        size,
        rotation_deg: rotation,
    }
}

/// Glyphs for every sample (outer) and feature (inner) of `d`, using
/// statistics fitted elsewhere.
pub fn glyph_params(d: &OmicsDataset, range: SizeRange, stats: &FeatureStats) -> Result<Vec<Vec<Glyph>>> {
    if stats.len() != d.num_features() {
        return Err(GsnError::DimensionMismatch {
            expected: d.num_features(),
            found: stats.len(),
        });
    }
    d.rows().map(|row| glyphs_for_row(row, range, stats)).collect()
}

pub(crate) fn glyphs_for_row(row: &[f64], range: SizeRange, stats: &FeatureStats) -> Result<Vec<Glyph>> {
    row.iter()
        .enumerate()
        .map(|(j, &v)| Ok(glyph_for_value(stats.zscore(j, v)?, range)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range() -> SizeRange {
        SizeRange::new(3.0, 11.0).unwrap()
    }

    #[test]
    fn affine_examples() {
        let g = glyph_for_value(0.0, range());
        assert_eq!((g.size, g.rotation_deg), (7.0, 90.0));
        let g = glyph_for_value(-3.0, range());
        assert_eq!((g.size, g.rotation_deg), (3.0, 0.0));
        let g = glyph_for_value(-17.0, range());
        assert_eq!((g.size, g.rotation_deg), (3.0, 0.0));
        let g = glyph_for_value(1.5, range());
        assert!((g.size - 9.0).abs() < 1e-12);
        assert!((g.rotation_deg - 135.0).abs() < 1e-12);
        let g = glyph_for_value(5.0, range());
        assert_eq!(g.size, 11.0);
        assert!(g.rotation_deg < 180.0);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let d = OmicsDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![1.0, 2.0]],
            vec!["x".into(), "y".into()],
            vec![0, 1],
            2,
        )
        .unwrap();
        let stats = FeatureStats::fit(&d);
        assert!(matches!(
            glyph_params(&d, range(), &stats),
            Err(GsnError::ZeroVarianceFeature(0))
        ));
    }

    #[test]
    fn stats_come_from_the_fitted_split_only() {
        let train = OmicsDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0], vec![2.0]],
            vec!["x".into()],
            vec![0, 1],
            2,
        )
        .unwrap();
        let test = OmicsDataset::new(
            vec!["c".into(), "d".into()],
            vec![vec![1.0], vec![100.0]],
            vec!["x".into()],
            vec![0, 1],
            2,
        )
        .unwrap();
        let stats = FeatureStats::fit(&train);
        let g = glyph_params(&test, range(), &stats).unwrap();
        // value 1.0 is the training mean
        assert_eq!(g[0][0].size, 7.0);
        assert_eq!(g[1][0].size, 11.0);
    }
}
