//! Gene-similarity-network images.
//!
//! Features are placed on a grid by a Kohonen map trained on their expression
//! profiles; each sample is then drawn as one diamond per feature whose size
//! and rotation follow that sample's z-scored expression.

mod encoder;
mod glyph;
mod io;
mod render;
mod som;

use thiserror::Error;

pub use encoder::{feature_profiles, GsnConfig, GsnEncoder, LayoutSource};
pub use glyph::{glyph_for_value, glyph_params, FeatureStats, Glyph, SizeRange, Z_CLAMP};
pub use io::{read_layout_csv, read_pbm, write_layout_csv, write_pbm};
pub use render::{canonical_rotation_deg, glyph_contains, rasterize_glyph, render_gsn, GsnImage, ImageGeometry};
pub use som::{train_som, SomConfig, SomGrid, SomTraining};

#[derive(Debug, Error)]
pub enum GsnError {
    #[error("no input rows")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature {0} has zero variance in the training split")]
    ZeroVarianceFeature(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed {kind} file: {reason}")]
    Malformed { kind: &'static str, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GsnError>;

/// Grid position for each feature. Several features may share a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub grid_width: usize,
    pub grid_height: usize,
    pub coords: Vec<(usize, usize)>,
    pub feature_names: Vec<String>,
}

impl FeatureLayout {
    pub fn new(
        grid_width: usize,
        grid_height: usize,
        coords: Vec<(usize, usize)>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if coords.len() != feature_names.len() {
            return Err(GsnError::DimensionMismatch {
                expected: coords.len(),
                found: feature_names.len(),
            });
        }
        if let Some(&(x, y)) = coords.iter().find(|&&(x, y)| x >= grid_width || y >= grid_height) {
            return Err(GsnError::InvalidConfig(format!(
                "coordinate ({x}, {y}) outside {grid_width}x{grid_height} grid"
            )));
        }
        Ok(Self {
            grid_width,
            grid_height,
            coords,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Map each feature vector to its best matching node. Features are named
/// `feature{j}` until [`FeatureLayout::feature_names`] is replaced.
pub fn assign_layout(som: &SomGrid, feature_vectors: &[Vec<f64>]) -> Result<FeatureLayout> {
    let coords = feature_vectors
        .iter()
        .map(|v| som.best_matching(v).map(|(node, _)| som.coords(node)))
        .collect::<Result<Vec<_>>>()?;
    let names = (0..coords.len()).map(|j| format!("feature{j}")).collect();
    FeatureLayout::new(som.width, som.height, coords, names)
}
