//! Online binary logistic regression on response vectors.

use serde::{Deserialize, Serialize};

use super::{DecodeError, Result};

/// `1 / (1 + exp(-x))` without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Welford running mean and variance per input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStandardizer {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStandardizer {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn observe(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    /// Centre and scale; inputs with no spread yet are only centred.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let var = if self.count > 1 {
                    self.m2[j] / (self.count - 1) as f64
                } else {
                    0.0
                };
                let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
                (v - self.mean[j]) / sd
            })
            .collect()
    }
}

/// Logistic regression trained by one gradient step per stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub eta: f64,
    pub updates_seen: u64,
    /// Present when inputs are standardized with running statistics.
    pub standardizer: Option<RunningStandardizer>,
}

impl LogisticModel {
    pub fn new(dim: usize, eta: f64, standardize: bool) -> Self {
        Self {
            w: vec![0.0; dim],
            b: 0.0,
            eta,
            updates_seen: 0,
            standardizer: standardize.then(|| RunningStandardizer::new(dim)),
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.w.len() {
            return Err(DecodeError::LengthMismatch {
                expected: self.w.len(),
                found: len,
            });
        }
        Ok(())
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardizer {
            Some(s) => s.transform(x),
            None => x.to_vec(),
        }
    }

    fn probability_of(&self, features: &[f64]) -> f64 {
        let logit: f64 = self.w.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + self.b;
        sigmoid(logit)
    }

    /// One cross-entropy gradient step toward label `y` (0 or 1).
    pub fn update_features(&mut self, x: &[f64], y: usize) -> Result<()> {
        self.check(x.len())?;
        if y > 1 {
            return Err(DecodeError::LabelOutOfRange {
                label: y,
                num_classes: 2,
            });
        }
        if let Some(s) = &mut self.standardizer {
            s.observe(x);
        }
        let features = self.features(x);
        let err = y as f64 - self.probability_of(&features);
        for (w, v) in self.w.iter_mut().zip(&features) {
            *w += self.eta * err * v;
        }
        self.b += self.eta * err;
        self.updates_seen += 1;
        Ok(())
    }

    /// Probability of class 1 and the predicted class (1 iff p >= 0.5).
    pub fn predict_features(&self, x: &[f64]) -> Result<(f64, usize)> {
        self.check(x.len())?;
        let p = self.probability_of(&self.features(x));
        Ok((p, usize::from(p >= 0.5)))
    }

    pub fn update(&mut self, r: &[u32], y: usize) -> Result<()> {
        self.update_features(&to_f64(r), y)
    }

    pub fn predict(&self, r: &[u32]) -> Result<(f64, usize)> {
        self.predict_features(&to_f64(r))
    }
}

fn to_f64(r: &[u32]) -> Vec<f64> {
    r.iter().map(|&c| c as f64).collect()
}
