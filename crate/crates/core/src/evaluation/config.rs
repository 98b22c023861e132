//! Configuration shared by every experiment driver.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::DEFAULT_VARIANCE_THRESHOLD;
use crate::decoding::DecoderKind;
use crate::gsn::{GsnConfig, SomConfig};
use crate::spike_codec::EncoderConfig;
use crate::wta_network::NetworkConfig;

use super::{EvalError, Result};

/// Training-set class ratio requested for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaTarget {
    /// Train on the fold as it comes.
    Native,
    /// Replicate minority rows until `C_m / C_M` reaches this value. Folds
    /// already at or above it are left alone.
    Ratio(f64),
}

impl AlphaTarget {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "native" {
            return Some(Self::Native);
        }
        s.parse().ok().filter(|v: &f64| *v > 0.0 && *v <= 1.0).map(Self::Ratio)
    }
}

impl std::fmt::Display for AlphaTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Native => f.write_str("native"),
            Self::Ratio(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for AlphaTarget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Native => s.serialize_str("native"),
            Self::Ratio(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaTarget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => AlphaTarget::parse(&v.to_string()),
            Raw::Text(t) => AlphaTarget::parse(&t),
        };
        parsed.ok_or_else(|| serde::de::Error::custom("alpha must be \"native\" or a number in (0, 1]"))
    }
}

/// Where the neuron-class assignment comes from in the bias experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ZSource {
    /// Assignment built from the fold's training responses.
    #[default]
    Train,
    /// Assignment built from the very subset being scored, reproducing the
    /// small-test-set bias.
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub variance_threshold: f64,
    pub top_k: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            top_k: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub logistic_learning_rate: f64,
    pub logistic_standardize: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 1,
            logistic_learning_rate: 0.05,
            logistic_standardize: false,
        }
    }
}

/// Named set of feature columns for the ablation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub alpha_grid: Vec<AlphaTarget>,
    pub decoders: Vec<DecoderKind>,
    pub subset_sizes: Vec<usize>,
    pub bias_repetitions: usize,
    pub bias_z_source: ZSource,
    pub bias_decoder: DecoderKind,
    pub ablation_alpha: AlphaTarget,
    /// Groups to run; empty means every defined group.
    pub ablation_groups: Vec<String>,
    /// Per-fold mRMR columns kept within each group; 0 keeps the whole group.
    pub ablation_top_k: usize,
    pub feature_groups: Vec<FeatureGroup>,
    pub ksweep_max_k: usize,
    pub ksweep_epochs: usize,
    pub ksweep_learning_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            folds: 4,
            alpha_grid: vec![
                AlphaTarget::Native,
                AlphaTarget::Ratio(0.33),
                AlphaTarget::Ratio(0.66),
                AlphaTarget::Ratio(1.0),
            ],
            decoders: DecoderKind::ALL.to_vec(),
            subset_sizes: vec![1, 2, 4, 8, 16],
            bias_repetitions: 10,
            bias_z_source: ZSource::Train,
            bias_decoder: DecoderKind::ClassAverage,
            ablation_alpha: AlphaTarget::Native,
            ablation_groups: Vec::new(),
            ablation_top_k: 0,
            feature_groups: Vec::new(),
            ksweep_max_k: 20,
            ksweep_epochs: 50,
            ksweep_learning_rate: 0.05,
        }
    }
}

/// Every tunable of the pipeline, grouped by stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub selection: SelectionConfig,
    pub gsn: GsnConfig,
    pub encoder: EncoderConfig,
    pub network: NetworkConfig,
    pub training: TrainingConfig,
    pub experiment: ExperimentConfig,
}

/// Names accepted by [`PipelineConfig::preset`].
pub const PIPELINE_PRESETS: [&str; 3] = ["paper", "paper-16", "reduced"];

impl PipelineConfig {
    /// Network topology preset with matching image and glyph geometry.
    pub fn preset(name: &str) -> Option<Self> {
        let network = NetworkConfig::preset(name)?;
        let mut cfg = Self {
            network,
            ..Self::default()
        };
        if name == "reduced" {
            cfg.gsn = GsnConfig {
                image_width: 44,
                image_height: 32,
                min_glyph_px: 3.0,
                max_glyph_px: 9.0,
                som: SomConfig {
                    width: 5,
                    height: 4,
                    ..SomConfig::default()
                },
                ..GsnConfig::default()
            };
        }
        Some(cfg)
    }

    /// Cross-stage consistency checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EvalError::InvalidConfig(msg));
        self.network.validate()?;
        self.gsn.size_range()?;
        let (n, g, e) = (&self.network, &self.gsn, &self.encoder);
        if (g.image_width, g.image_height) != (n.image_width, n.image_height) {
            return bad(format!(
                "gsn image {}x{} differs from network input {}x{}",
                g.image_width, g.image_height, n.image_width, n.image_height
            ));
        }
        if e.duration_ms != n.presentation_ms || e.dt_ms != n.dt_ms {
            return bad(format!(
                "encoder.duration_ms/dt_ms ({}, {}) must equal network.presentation_ms/dt_ms ({}, {})",
                e.duration_ms, e.dt_ms, n.presentation_ms, n.dt_ms
            ));
        }
        if e.complement != n.complement_inputs {
            return bad("encoder.complement must equal network.complement_inputs".into());
        }
        if self.training.epochs == 0 {
            return bad("training.epochs must be at least 1".into());
        }
        if !(self.training.logistic_learning_rate > 0.0) {
            return bad("training.logistic_learning_rate must be positive".into());
        }
        let x = &self.experiment;
        if x.folds < 2 {
            return bad("experiment.folds must be at least 2".into());
        }
        if x.decoders.is_empty() {
            return bad("experiment.decoders is empty".into());
        }
        if x.alpha_grid.is_empty() {
            return bad("experiment.alpha_grid is empty".into());
        }
        if !x.bias_decoder.uses_assignment() {
            return bad("experiment.bias_decoder must read the neuron-class assignment".into());
        }
        Ok(())
    }
}
