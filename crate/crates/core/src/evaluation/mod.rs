//! Metrics and the experiment drivers.
//!
//! * [`run_imbalance_sweep`]: decoder scores across training class ratios.
//! * [`run_assignment_analysis`]: how the class ratio of the neuron
//!   assignment follows the training class ratio.
//! * [`run_bias_experiment`]: accuracy of an untrained network when the
//!   assignment is built from the scored samples themselves.
//! * [`run_feature_ablation`]: the pipeline on named feature groups, plus a
//!   logistic sweep over the number of mRMR-ranked features.

mod config;
mod experiments;
mod metrics;
mod results;

use thiserror::Error;

pub use config::{
    AlphaTarget, ExperimentConfig, FeatureGroup, PipelineConfig, SelectionConfig, TrainingConfig, ZSource,
    PIPELINE_PRESETS,
};
pub use experiments::{
    run_assignment_analysis, run_bias_experiment, run_cell, run_feature_ablation, run_imbalance_cells,
    run_imbalance_sweep, run_logistic_ksweep, synthetic_groups, AssignmentSummary, CellOutcome, DecoderPredictions,
};
pub use metrics::{accuracy, average_ranks, f1_score, pearson, spearman, ConfusionMatrix};
pub use results::{
    bias_csv_string, BiasRow, ExperimentResult, ExperimentRow, BIAS_COLUMNS, POOLED_FOLD, RESULT_COLUMNS,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no samples to score")]
    EmptySet,
    #[error("correlation needs two series of equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
    #[error("unknown feature group {0:?}")]
    UnknownFeatureGroup(String),
    #[error("feature group {group:?} names unknown column {column:?}")]
    UnknownFeature { group: String, column: String },
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
    #[error(transparent)]
    Gsn(#[from] crate::gsn::GsnError),
    #[error(transparent)]
    Network(#[from] crate::wta_network::NetworkError),
    #[error(transparent)]
    Decode(#[from] crate::decoding::DecodeError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;
