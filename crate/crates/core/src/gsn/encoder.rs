//! Fitting a layout on a training split and turning rows into images.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::OmicsDataset;

use super::glyph::glyphs_for_row;
use super::{
    assign_layout, render_gsn, train_som, FeatureLayout, FeatureStats, GsnError, GsnImage, ImageGeometry, Result,
    SizeRange, SomConfig,
};

/// Where the SOM layout is fitted in cross-validated experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutSource {
    /// Fit on each fold's training split only.
    #[default]
    PerFold,
    /// Fit once on every original sample.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GsnConfig {
    pub image_width: usize,
    pub image_height: usize,
    pub min_glyph_px: f64,
    pub max_glyph_px: f64,
    pub som: SomConfig,
    pub layout_source: LayoutSource,
}

impl Default for GsnConfig {
    fn default() -> Self {
        Self {
            image_width: 176,
            image_height: 128,
            min_glyph_px: 6.0,
            max_glyph_px: 20.0,
            som: SomConfig::default(),
            layout_source: LayoutSource::PerFold,
        }
    }
}

impl GsnConfig {
    pub fn size_range(&self) -> Result<SizeRange> {
        SizeRange::new(self.min_glyph_px, self.max_glyph_px)
    }

    /// The grid spans the image minus half the largest glyph on every side.
    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry {
            width: self.image_width,
            height: self.image_height,
            margin: self.max_glyph_px / 2.0,
        }
    }
}

/// A fitted layout plus the training statistics used for z-scoring.
#[derive(Debug, Clone)]
pub struct GsnEncoder {
    pub layout: FeatureLayout,
    pub stats: FeatureStats,
    pub config: GsnConfig,
    /// Quantization error before/after SOM training, when a SOM was trained.
    pub som_errors: Option<(f64, f64)>,
}

impl GsnEncoder {
    /// Standardize each feature over `train`, train the SOM on the feature
    /// profiles and assign every feature a grid cell.
    pub fn fit<R: Rng + ?Sized>(train: &OmicsDataset, config: &GsnConfig, rng: &mut R) -> Result<Self> {
        let stats = FeatureStats::fit(train);
        let profiles = feature_profiles(train, &stats)?;
        let training = train_som(&profiles, &config.som, rng)?;
        let mut layout = assign_layout(&training.grid, &profiles)?;
        layout.feature_names = train.feature_names().to_vec();
        Ok(Self {
            layout,
            stats,
            config: config.clone(),
            som_errors: Some((training.initial_quantization_error, training.final_quantization_error)),
        })
    }

    /// Reuse an existing layout; only the z-score statistics are fitted.
    pub fn with_layout(train: &OmicsDataset, layout: FeatureLayout, config: &GsnConfig) -> Result<Self> {
        if layout.feature_names != train.feature_names() {
            return Err(GsnError::InvalidConfig(
                "layout feature names do not match the dataset columns".into(),
            ));
        }
        Ok(Self {
            layout,
            stats: FeatureStats::fit(train),
            config: config.clone(),
            som_errors: None,
        })
    }

    pub fn encode_row(&self, row: &[f64]) -> Result<GsnImage> {
        if row.len() != self.stats.len() {
            return Err(GsnError::DimensionMismatch {
                expected: self.stats.len(),
                found: row.len(),
            });
        }
        let glyphs = glyphs_for_row(row, self.config.size_range()?, &self.stats)?;
        render_gsn(&self.layout, &glyphs, &self.config.geometry())
    }

    pub fn encode_dataset(&self, d: &OmicsDataset) -> Result<Vec<GsnImage>> {
        d.rows().map(|r| self.encode_row(r)).collect()
    }
}

/// One row per feature: its z-scored values over the training samples.
pub fn feature_profiles(train: &OmicsDataset, stats: &FeatureStats) -> Result<Vec<Vec<f64>>> {
    (0..train.num_features())
        .map(|j| train.rows().map(|r| stats.zscore(j, r[j])).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_synthetic, SyntheticSpec};
    use crate::seed::rng_from_seed;

    #[test]
    fn fit_and_encode_are_deterministic() {
        let d = gen_synthetic(&SyntheticSpec::new(30, 10, 11, 2.0), &mut rng_from_seed(1)).unwrap();
        let cfg = GsnConfig::default();
        let a = GsnEncoder::fit(&d, &cfg, &mut rng_from_seed(4)).unwrap();
        let b = GsnEncoder::fit(&d, &cfg, &mut rng_from_seed(4)).unwrap();
        assert_eq!(a.layout, b.layout);
        let (before, after) = a.som_errors.unwrap();
        assert!(after <= before);
        let img = a.encode_row(d.row(3)).unwrap();
        assert_eq!((img.width, img.height), (176, 128));
        assert_eq!(img, b.encode_row(d.row(3)).unwrap());
        assert!(img.count_white() > 0);
    }

    #[test]
    fn reused_layout_must_match_columns() {
        let d = gen_synthetic(&SyntheticSpec::new(10, 5, 3, 1.0), &mut rng_from_seed(1)).unwrap();
        let layout = FeatureLayout::new(2, 2, vec![(0, 0); 3], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert!(GsnEncoder::with_layout(&d, layout, &GsnConfig::default()).is_err());
    }
}
