//! Poisson rate coding of binary images and spike counting.
//!
//! The Poisson process is realized per timestep as independent Bernoulli
//! draws with probability `rate_hz * dt_ms / 1000`. White pixels fire at
//! `rate_hz`, black pixels at `background_rate_hz`. With `complement`
//! enabled each pixel gets a second OFF channel (index `P + p`) that fires
//! at `rate_hz` while the pixel is black.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gsn::GsnImage;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("spike probability {0} per step exceeds 1; lower the rate or dt")]
    RateTooHighForDt(f64),
    #[error("invalid encoder parameter: {0}")]
    InvalidParameter(String),
    #[error("empty response window [{0}, {1})")]
    EmptyWindow(usize, usize),
    #[error("window end {end} beyond the {timesteps} simulated steps")]
    WindowOutOfRange { end: usize, timesteps: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CodecError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub rate_hz: f64,
    pub duration_ms: f64,
    pub dt_ms: f64,
    pub background_rate_hz: f64,
    pub complement: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            rate_hz: 200.0,
            duration_ms: 150.0,
            dt_ms: 1.0,
            background_rate_hz: 0.0,
            complement: false,
        }
    }
}

impl EncoderConfig {
    pub fn timesteps(&self) -> usize {
        (self.duration_ms / self.dt_ms).round() as usize
    }

    pub fn channels_per_pixel(&self) -> usize {
        if self.complement {
            2
        } else {
            1
        }
    }

    fn probability(&self, rate_hz: f64) -> Result<f64> {
        let p = rate_hz * self.dt_ms / 1000.0;
        if p > 1.0 {
            return Err(CodecError::RateTooHighForDt(p));
        }
        if !(p >= 0.0) {
            return Err(CodecError::InvalidParameter(format!("negative rate {rate_hz}")));
        }
        Ok(p)
    }

    fn validate(&self) -> Result<(f64, f64)> {
        if !(self.duration_ms > 0.0) || !(self.dt_ms > 0.0) {
            return Err(CodecError::InvalidParameter(format!(
                "duration {} ms and dt {} ms must be positive",
                self.duration_ms, self.dt_ms
            )));
        }
        Ok((
            self.probability(self.rate_hz)?,
            self.probability(self.background_rate_hz)?,
        ))
    }
}

/// Binary `T x P` event matrix stored as the sorted active channels of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    pub channels: usize,
    pub dt_ms: f64,
    active: Vec<Vec<u32>>,
}

impl SpikeTrain {
    pub fn from_active(channels: usize, dt_ms: f64, active: Vec<Vec<u32>>) -> Self {
        debug_assert!(active.iter().flatten().all(|&c| (c as usize) < channels));
        Self {
            channels,
            dt_ms,
            active,
        }
    }

    pub fn timesteps(&self) -> usize {
        self.active.len()
    }

    /// Channels that spiked at step `t`, ascending.
    pub fn active_at(&self, t: usize) -> &[u32] {
        &self.active[t]
    }

    pub fn get(&self, t: usize, channel: usize) -> bool {
        self.active[t].binary_search(&(channel as u32)).is_ok()
    }

    pub fn channel_count(&self, channel: usize) -> usize {
        (0..self.timesteps()).filter(|&t| self.get(t, channel)).count()
    }

    pub fn total_spikes(&self) -> usize {
        self.active.iter().map(Vec::len).sum()
    }

    /// Dense 0/1 CSV, one row per timestep.
    pub fn write_dense_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        for t in 0..self.timesteps() {
            let mut row = vec!['0'; self.channels];
            for &c in self.active_at(t) {
                row[c as usize] = '1';
            }
            let line: Vec<String> = row.into_iter().map(String::from).collect();
            writeln!(out, "{}", line.join(",")).expect("string write");
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Encode one image as a fresh spike train.
pub fn encode_poisson<R: Rng + ?Sized>(img: &GsnImage, cfg: &EncoderConfig, rng: &mut R) -> Result<SpikeTrain> {
    let (p_on, p_background) = cfg.validate()?;
    let pixels = img.pixels();
    let n = pixels.len();
    let channels = n * cfg.channels_per_pixel();
    let steps = cfg.timesteps();
    let mut active = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut row = Vec::new();
        for (p, &white) in pixels.iter().enumerate() {
            let prob = if white { p_on } else { p_background };
            if prob > 0.0 && rng.random::<f64>() < prob {
                row.push(p as u32);
            }
        }
        if cfg.complement {
            for (p, &white) in pixels.iter().enumerate() {
                if !white && p_on > 0.0 && rng.random::<f64>() < p_on {
                    row.push((n + p) as u32);
                }
            }
        }
        active.push(row);
    }
    Ok(SpikeTrain::from_active(channels, cfg.dt_ms, active))
}

/// One output spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub t: usize,
    pub neuron: usize,
}

/// Time-indexed spikes of a population over `timesteps` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeRecord {
    pub num_neurons: usize,
    pub timesteps: usize,
    pub events: Vec<SpikeEvent>,
}

/// Spike counts of N neurons in one response window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseVector {
    pub counts: Vec<u32>,
}

impl ResponseVector {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Count each neuron's events with `t0 <= t < t1`.
pub fn count_spikes(record: &SpikeRecord, t0: usize, t1: usize) -> Result<ResponseVector> {
    if t0 >= t1 {
        return Err(CodecError::EmptyWindow(t0, t1));
    }
    if t1 > record.timesteps {
        return Err(CodecError::WindowOutOfRange {
            end: t1,
            timesteps: record.timesteps,
        });
    }
    let mut counts = vec![0u32; record.num_neurons];
    for e in record.events.iter().filter(|e| e.t >= t0 && e.t < t1) {
        counts[e.neuron] += 1;
    }
    Ok(ResponseVector { counts })
}
