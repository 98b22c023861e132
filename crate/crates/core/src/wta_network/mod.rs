//! Hierarchical winner-take-all spiking network.
//!
//! The input image is cut into equal tiles. Each tile feeds one hidden WTA
//! circuit; every hidden neuron feeds a single output WTA circuit. A circuit
//! integrates `u_h = sum_p w_hp x_p` over the afferent spikes it receives.
//! Once at least `trigger_threshold` afferent spikes have arrived since the
//! last reset, one winner is drawn from `softmax(u)`, it spikes, and every
//! potential in the circuit returns to `baseline_potential`.
//!
//! Learning applies the exponential-depression rule
//! `dw = eta * (exp(-w) * x - 1)` to the winner's afferent weights, where `x`
//! marks the afferents that spiked since the previous reset, followed by
//! clamping to `[weight_min, weight_max]`. At equilibrium `exp(w)` equals the
//! probability that the afferent was active when the neuron won.
//!
//! Optional top-down modulation adds `top_down_gain * w_td[h, o]` to hidden
//! neuron `h` at selection time, where `o` is the most recent output winner.
//! The top-down weights learn with the same rule.
//!
//! This is a documented reimplementation in the spirit of stochastic WTA
//! networks with STDP, not a port of any particular simulator.

mod persist;
mod sim;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use persist::{load_model, model_string, parse_model, save_model, MODEL_HEADER};
pub use sim::{sample_softmax, stdp_update, PresentationResult};
pub use train::{collect_responses, train_epochs, train_epochs_with};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("spike train has {found} channels, network expects {expected}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("no stimuli to train on")]
    EmptyStimuli,
    #[error("network has not been trained; train for at least one epoch first")]
    UntrainedNetwork,
    #[error("{0} labels for {1} stimuli")]
    LabelMismatch(usize, usize),
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Codec(#[from] crate::spike_codec::CodecError),
    #[error(transparent)]
    Decode(#[from] crate::decoding::DecodeError),
    #[error("training observer failed: {0}")]
    Observer(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub image_width: usize,
    pub image_height: usize,
    pub tile_width: usize,
    pub tile_height: usize,
    pub hidden_per_tile: usize,
    pub output_neurons: usize,
    pub num_classes: usize,
    /// Inputs carry an OFF channel per pixel after the ON channels.
    pub complement_inputs: bool,
    pub learning_rate: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    /// Initial weights are drawn uniformly from `[init_min, init_max]`.
    pub init_min: f64,
    pub init_max: f64,
    /// Afferent spikes needed since the last reset before a circuit selects a winner.
    pub trigger_threshold: usize,
    pub baseline_potential: f64,
    pub top_down_enabled: bool,
    pub top_down_gain: f64,
    pub presentation_ms: f64,
    pub dt_ms: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            image_width: 176,
            image_height: 128,
            tile_width: 11,
            tile_height: 8,
            hidden_per_tile: 32,
            output_neurons: 100,
            num_classes: 2,
            complement_inputs: false,
            learning_rate: 0.01,
            weight_min: -5.0,
            weight_max: 5.0,
            init_min: -5.0,
            init_max: 5.0,
            trigger_threshold: 10,
            baseline_potential: 0.0,
            top_down_enabled: false,
            top_down_gain: 1.0,
            presentation_ms: 150.0,
            dt_ms: 1.0,
        }
    }
}

/// Named topologies selectable from the command line.
pub const PRESETS: [&str; 3] = ["paper", "paper-16", "reduced"];

impl NetworkConfig {
    /// `paper`: 256 tiles of 11x8. `paper-16`: 16 tiles of 44x32.
    /// `reduced`: a 44x32 image in 4 tiles with 20 output neurons.
    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::default();
        match name {
            "paper" => Some(base),
            "paper-16" => Some(Self {
                tile_width: 44,
                tile_height: 32,
                ..base
            }),
            "reduced" => Some(Self {
                image_width: 44,
                image_height: 32,
                tile_width: 22,
                tile_height: 16,
                ..base
            }),
            _ => None,
        }
    }

    pub fn tiles_x(&self) -> usize {
        self.image_width / self.tile_width
    }

    pub fn tiles_y(&self) -> usize {
        self.image_height / self.tile_height
    }

    pub fn num_tiles(&self) -> usize {
        self.tiles_x() * self.tiles_y()
    }

    pub fn tile_pixels(&self) -> usize {
        self.tile_width * self.tile_height
    }

    pub fn tile_inputs(&self) -> usize {
        self.tile_pixels() * if self.complement_inputs { 2 } else { 1 }
    }

    pub fn num_pixels(&self) -> usize {
        self.image_width * self.image_height
    }

    pub fn input_channels(&self) -> usize {
        self.num_pixels() * if self.complement_inputs { 2 } else { 1 }
    }

    pub fn total_hidden(&self) -> usize {
        self.num_tiles() * self.hidden_per_tile
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NetworkError::InvalidConfig(msg));
        if self.tile_width == 0 || self.tile_height == 0 || self.image_width == 0 || self.image_height == 0 {
            return bad("image and tile dimensions must be positive".into());
        }
        if !self.image_width.is_multiple_of(self.tile_width) || !self.image_height.is_multiple_of(self.tile_height) {
            return bad(format!(
                "tile {}x{} does not divide image {}x{}",
                self.tile_width, self.tile_height, self.image_width, self.image_height
            ));
        }
        if self.hidden_per_tile == 0 {
            return bad("hidden_per_tile must be positive".into());
        }
        if self.output_neurons < self.num_classes || self.num_classes < 2 {
            return bad(format!(
                "{} output neurons cannot cover {} classes",
                self.output_neurons, self.num_classes
            ));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.weight_min < self.weight_max) || !self.weight_min.is_finite() || !self.weight_max.is_finite() {
            return bad(format!("weight bounds [{}, {}]", self.weight_min, self.weight_max));
        }
        if !(self.weight_min <= self.init_min && self.init_min <= self.init_max && self.init_max <= self.weight_max) {
            return bad(format!(
                "init range [{}, {}] must lie within the weight bounds",
                self.init_min, self.init_max
            ));
        }
        if self.trigger_threshold == 0 {
            return bad("trigger_threshold must be at least 1".into());
        }
        if !self.baseline_potential.is_finite() || !self.top_down_gain.is_finite() {
            return bad("potentials and gains must be finite".into());
        }
        if !(self.dt_ms > 0.0) || !(self.presentation_ms >= self.dt_ms) {
            return bad(format!(
                "presentation {} ms with dt {} ms",
                self.presentation_ms, self.dt_ms
            ));
        }
        Ok(())
    }

    /// `(tile, local input index)` of every input channel.
    fn channel_map(&self) -> Vec<(u32, u32)> {
        let pixels = self.num_pixels();
        let tile_pixels = self.tile_pixels();
        (0..self.input_channels())
            .map(|c| {
                let (p, offset) = if c < pixels { (c, 0) } else { (c - pixels, tile_pixels) };
                let (x, y) = (p % self.image_width, p / self.image_width);
                let tile = (y / self.tile_height) * self.tiles_x() + x / self.tile_width;
                let local = (y % self.tile_height) * self.tile_width + x % self.tile_width + offset;
                (tile as u32, local as u32)
            })
            .collect()
    }
}

/// Weights of a network plus its configuration.
///
/// `hidden[t]` is the `hidden_per_tile x tile_inputs` matrix of tile `t`,
/// `output` is `output_neurons x total_hidden`, and `top_down`, when
/// enabled, is `total_hidden x output_neurons`. All row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub config: NetworkConfig,
    pub hidden: Vec<Vec<f32>>,
    pub output: Vec<f32>,
    pub top_down: Option<Vec<f32>>,
    pub trained_epochs: usize,
    channel_map: Vec<(u32, u32)>,
}

pub fn init_network<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<NetworkState> {
    cfg.validate()?;
    let (lo, hi) = (cfg.init_min, cfg.init_max);
    let mut draw = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| {
                if lo == hi {
                    lo as f32
                } else {
                    rng.random_range(lo..=hi) as f32
                }
            })
            .collect()
    };
    let hidden = (0..cfg.num_tiles())
        .map(|_| draw(cfg.hidden_per_tile * cfg.tile_inputs()))
        .collect();
    let output = draw(cfg.output_neurons * cfg.total_hidden());
    let top_down = cfg
        .top_down_enabled
        .then(|| draw(cfg.total_hidden() * cfg.output_neurons));
    NetworkState::from_parts(cfg.clone(), hidden, output, top_down, 0)
}

impl NetworkState {
    pub fn from_parts(
        config: NetworkConfig,
        hidden: Vec<Vec<f32>>,
        output: Vec<f32>,
        top_down: Option<Vec<f32>>,
        trained_epochs: usize,
    ) -> Result<Self> {
        config.validate()?;
        let shape_err = |what: &str| NetworkError::InvalidConfig(format!("{what} has the wrong shape"));
        if hidden.len() != config.num_tiles()
            || hidden
                .iter()
                .any(|m| m.len() != config.hidden_per_tile * config.tile_inputs())
        {
            return Err(shape_err("hidden weights"));
        }
        if output.len() != config.output_neurons * config.total_hidden() {
            return Err(shape_err("output weights"));
        }
        match (&top_down, config.top_down_enabled) {
            (Some(td), true) if td.len() == config.total_hidden() * config.output_neurons => {}
            (None, false) => {}
            _ => return Err(shape_err("top-down weights")),
        }
        let channel_map = config.channel_map();
        let state = Self {
            config,
            hidden,
            output,
            top_down,
            trained_epochs,
            channel_map,
        };
        if !state.weights_in_bounds() {
            return Err(NetworkError::InvalidConfig(
                "weights outside the configured bounds".into(),
            ));
        }
        Ok(state)
    }

    /// Every weight is finite and inside `[weight_min, weight_max]`.
    pub fn weights_in_bounds(&self) -> bool {
        let (lo, hi) = (self.config.weight_min as f32, self.config.weight_max as f32);
        let ok = |w: &f32| w.is_finite() && *w >= lo && *w <= hi;
        self.hidden.iter().flatten().all(ok) && self.output.iter().all(ok) && self.top_down.iter().flatten().all(ok)
    }

    pub fn hidden_weight(&self, tile: usize, h: usize, input: usize) -> f32 {
        self.hidden[tile][h * self.config.tile_inputs() + input]
    }

    pub fn output_weight(&self, n: usize, hidden: usize) -> f32 {
        self.output[n * self.config.total_hidden() + hidden]
    }
}
