//! Rectangular Kohonen map used to place features on a 2-D grid.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GsnError, Result};

/// Node weights of a trained map. Node `i` sits at grid `(i % width, i / width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SomGrid {
    pub width: usize,
    pub height: usize,
    pub dim: usize,
    weights: Vec<f64>,
    pub epochs_trained: usize,
}

/// Training schedule. Learning rate and neighbourhood radius decay linearly
/// from their initial values to their floors over all presentations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SomConfig {
    pub width: usize,
    pub height: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Final learning rate as a fraction of the initial one.
    pub learning_rate_floor: f64,
    /// Smallest Gaussian neighbourhood radius, in grid cells.
    pub radius_floor: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            width: 6,
            height: 4,
            epochs: 5,
            learning_rate: 0.05,
            learning_rate_floor: 0.01,
            radius_floor: 0.25,
        }
    }
}

/// A trained map plus the quantization error before and after training.
#[derive(Debug, Clone)]
pub struct SomTraining {
    pub grid: SomGrid,
    pub initial_quantization_error: f64,
    pub final_quantization_error: f64,
}

impl SomGrid {
    pub fn from_weights(width: usize, height: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(GsnError::InvalidConfig("SOM grid must be non-empty".into()));
        }
        if weights.len() != width * height * dim {
            return Err(GsnError::DimensionMismatch {
                expected: width * height * dim,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(GsnError::InvalidConfig("SOM weights must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            dim,
            weights,
            epochs_trained: 0,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.width * self.height
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.width, i / self.width)
    }

    /// Best matching node by Euclidean distance; ties go to the lowest index.
    pub fn best_matching(&self, x: &[f64]) -> Result<(usize, f64)> {
        if x.len() != self.dim {
            return Err(GsnError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut best = (0, f64::INFINITY);
        for i in 0..self.num_nodes() {
            let d2: f64 = self.node(i).iter().zip(x).map(|(w, v)| (w - v) * (w - v)).sum();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        Ok((best.0, best.1.sqrt()))
    }

    /// Mean distance from each input to its best matching node.
    pub fn quantization_error(&self, data: &[Vec<f64>]) -> Result<f64> {
        if data.is_empty() {
            return Err(GsnError::EmptyInput);
        }
        let mut total = 0.0;
        for x in data {
            total += self.best_matching(x)?.1;
        }
        Ok(total / data.len() as f64)
    }
}

/// Train a map on `data` (one row per item to place).
pub fn train_som<R: Rng + ?Sized>(data: &[Vec<f64>], cfg: &SomConfig, rng: &mut R) -> Result<SomTraining> {
    if data.is_empty() {
        return Err(GsnError::EmptyInput);
    }
    if cfg.epochs == 0 || !(cfg.learning_rate > 0.0) || cfg.width == 0 || cfg.height == 0 {
        return Err(GsnError::InvalidConfig(format!("bad SOM schedule {cfg:?}")));
    }
    let dim = data[0].len();
    if let Some(bad) = data.iter().find(|r| r.len() != dim) {
        return Err(GsnError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    // uniform initialisation inside the data's bounding box
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in data {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let nodes = cfg.width * cfg.height;
    let mut weights = Vec::with_capacity(nodes * dim);
    for _ in 0..nodes {
        for j in 0..dim {
            let u: f64 = rng.random();
            weights.push(lo[j] + u * (hi[j] - lo[j]));
        }
    }
    let mut grid = SomGrid::from_weights(cfg.width, cfg.height, dim, weights)?;
    let initial = grid.quantization_error(data)?;

    let radius0 = (cfg.width.max(cfg.height) as f64 / 2.0).max(cfg.radius_floor);
    let lr_floor = cfg.learning_rate * cfg.learning_rate_floor;
    let total = (cfg.epochs * data.len()) as f64;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for &idx in &order {
            let frac = t as f64 / total;
            let lr = (cfg.learning_rate * (1.0 - frac)).max(lr_floor);
            let radius = (radius0 * (1.0 - frac)).max(cfg.radius_floor);
            let x = &data[idx];
            let (bmu, _) = grid.best_matching(x)?;
            let (bx, by) = grid.coords(bmu);
            for node in 0..nodes {
                let (nx, ny) = grid.coords(node);
                let d2 = (nx as f64 - bx as f64).powi(2) + (ny as f64 - by as f64).powi(2);
                let h = (-d2 / (2.0 * radius * radius)).exp();
                let step = lr * h;
                if step < 1e-12 {
                    continue;
                }
                let w = &mut grid.weights[node * dim..(node + 1) * dim];
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += step * (xj - *wj);
                }
            }
            t += 1;
        }
        grid.epochs_trained += 1;
    }
    let final_qe = grid.quantization_error(data)?;
    if final_qe > initial {
        log::warn!("SOM quantization error rose during training ({initial:.6} -> {final_qe:.6})");
    }
    Ok(SomTraining {
        grid,
        initial_quantization_error: initial,
        final_quantization_error: final_qe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identical_inputs_have_zero_error() {
        let data = vec![vec![0.3, -1.2, 4.0]; 7];
        let cfg = SomConfig {
            width: 3,
            height: 2,
            ..SomConfig::default()
        };
        let t = train_som(&data, &cfg, &mut rng_from_seed(1)).unwrap();
        assert!(t.final_quantization_error.abs() < 1e-9);
    }

    #[test]
    fn single_node_tracks_the_mean() {
        let mut rng = rng_from_seed(11);
        let data: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mean: Vec<f64> = (0..3).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / 20.0).collect();
        let cfg = SomConfig {
            width: 1,
            height: 1,
            epochs: 400,
            learning_rate: 0.5,
            learning_rate_floor: 0.001,
            radius_floor: 0.25,
        };
        let t = train_som(&data, &cfg, &mut rng_from_seed(2)).unwrap();
        for j in 0..3 {
            assert!((t.grid.node(0)[j] - mean[j]).abs() < 1e-2, "dim {j}");
        }
        assert!(t.final_quantization_error <= t.initial_quantization_error);
    }

    #[test]
    fn ties_resolve_to_lowest_node() {
        let grid = SomGrid::from_weights(2, 1, 1, vec![0.0, 2.0]).unwrap();
        assert_eq!(grid.best_matching(&[1.0]).unwrap().0, 0);
        assert_eq!(grid.best_matching(&[2.0]).unwrap().0, 1);
        assert!(grid.best_matching(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            train_som(&[], &SomConfig::default(), &mut rng_from_seed(0)),
            Err(GsnError::EmptyInput)
        ));
    }
}
