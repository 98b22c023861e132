//! One stimulus presentation.

use rand::Rng;

use crate::spike_codec::{count_spikes, ResponseVector, SpikeEvent, SpikeRecord, SpikeTrain};

use super::{NetworkError, NetworkState, Result};

/// What the network did during one presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationResult {
    /// Output spike counts over the whole presentation.
    pub response: ResponseVector,
    pub output: SpikeRecord,
    /// Spike count of every hidden neuron, indexed `tile * hidden_per_tile + h`.
    pub hidden_counts: Vec<u32>,
    pub hidden_cycles: u64,
    pub output_cycles: u64,
}

impl PresentationResult {
    /// Inhibition events across all circuits.
    pub fn total_cycles(&self) -> u64 {
        self.hidden_cycles + self.output_cycles
    }
}

/// Draw an index with probability `softmax(u)`.
pub fn sample_softmax<R: Rng + ?Sized>(u: &[f64], rng: &mut R) -> usize {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = u.iter().map(|v| (v - max).exp()).sum();
    let mut target = rng.random::<f64>() * total;
    for (i, v) in u.iter().enumerate() {
        target -= (v - max).exp();
        if target < 0.0 {
            return i;
        }
    }
    // rounding left a sliver of mass: fall back to the last neuron with nonzero weight
    u.iter().rposition(|v| (v - max).exp() > 0.0).unwrap_or(0)
}

/// Apply `w += eta * (exp(-w) * x - 1)` to each weight, then clamp.
pub fn stdp_update(weights: &mut [f32], presyn: &[bool], eta: f64, bounds: (f64, f64)) {
    debug_assert_eq!(weights.len(), presyn.len());
    for (w, &x) in weights.iter_mut().zip(presyn) {
        *w = stdp_step(*w, x, eta, bounds);
    }
}

#[inline]
fn stdp_step(w: f32, active: bool, eta: f64, (lo, hi): (f64, f64)) -> f32 {
    let w64 = w as f64;
    let dw = if active { eta * ((-w64).exp() - 1.0) } else { -eta };
    (w64 + dw).clamp(lo, hi) as f32
}

/// Update one weight row where only the listed afferents were active.
fn stdp_sparse(row: &mut [f32], active: &[u32], mark: &mut [bool], eta: f64, bounds: (f64, f64)) {
    for &a in active {
        mark[a as usize] = true;
    }
    for (w, m) in row.iter_mut().zip(mark.iter()) {
        *w = stdp_step(*w, *m, eta, bounds);
    }
    for &a in active {
        mark[a as usize] = false;
    }
}

/// Weight access for a presentation: read-only or learning.
pub(super) enum Weights<'a> {
    Frozen(&'a NetworkState),
    Plastic(&'a mut NetworkState),
}

impl Weights<'_> {
    fn state(&self) -> &NetworkState {
        match self {
            Weights::Frozen(s) => s,
            Weights::Plastic(s) => s,
        }
    }
}

impl NetworkState {
    /// Present a spike train, learning when `learn` is set.
    pub fn present<R: Rng + ?Sized>(
        &mut self,
        train: &SpikeTrain,
        learn: bool,
        rng: &mut R,
    ) -> Result<PresentationResult> {
        if learn {
            simulate(Weights::Plastic(self), train, rng)
        } else {
            simulate(Weights::Frozen(self), train, rng)
        }
    }

    /// Inference-only presentation; never touches the weights.
    pub fn respond<R: Rng + ?Sized>(&self, train: &SpikeTrain, rng: &mut R) -> Result<PresentationResult> {
        simulate(Weights::Frozen(self), train, rng)
    }
}

pub(super) fn simulate<R: Rng + ?Sized>(
    mut weights: Weights<'_>,
    train: &SpikeTrain,
    rng: &mut R,
) -> Result<PresentationResult> {
    let cfg = weights.state().config.clone();
    if train.channels != cfg.input_channels() {
        return Err(NetworkError::ChannelMismatch {
            expected: cfg.input_channels(),
            found: train.channels,
        });
    }
    let tiles = cfg.num_tiles();
    let h_per = cfg.hidden_per_tile;
    let inputs = cfg.tile_inputs();
    let total_hidden = cfg.total_hidden();
    let n_out = cfg.output_neurons;
    let baseline = cfg.baseline_potential;
    let threshold = cfg.trigger_threshold;
    let eta = cfg.learning_rate;
    let bounds = (cfg.weight_min, cfg.weight_max);
    let gain = cfg.top_down_gain;

    let mut hidden_pot = vec![baseline; total_hidden];
    let mut hidden_pending: Vec<Vec<u32>> = vec![Vec::new(); tiles];
    let mut out_pot = vec![baseline; n_out];
    let mut out_pending: Vec<u32> = Vec::new();
    let mut mark = vec![false; inputs.max(total_hidden).max(n_out)];
    let mut touched: Vec<usize> = Vec::new();
    let mut tile_seen = vec![false; tiles];
    let mut hidden_spikes: Vec<u32> = Vec::new();
    let mut u = vec![0.0f64; h_per];
    let mut td_presyn = vec![false; n_out];

    let mut hidden_counts = vec![0u32; total_hidden];
    let mut events = Vec::new();
    let mut hidden_cycles = 0u64;
    let mut output_cycles = 0u64;
    let mut last_output: Option<usize> = None;

    for t in 0..train.timesteps() {
        touched.clear();
        {
            let state = weights.state();
            for &c in train.active_at(t) {
                let (tile, local) = state.channel_map[c as usize];
                let (tile, local) = (tile as usize, local as usize);
                let w = &state.hidden[tile];
                let pot = &mut hidden_pot[tile * h_per..(tile + 1) * h_per];
                for (h, p) in pot.iter_mut().enumerate() {
                    *p += w[h * inputs + local] as f64;
                }
                hidden_pending[tile].push(local as u32);
                if !tile_seen[tile] {
                    tile_seen[tile] = true;
                    touched.push(tile);
                }
            }
        }

        hidden_spikes.clear();
        for &tile in &touched {
            tile_seen[tile] = false;
            if hidden_pending[tile].len() < threshold {
                continue;
            }
            let base = tile * h_per;
            u.copy_from_slice(&hidden_pot[base..base + h_per]);
            if let (Some(td), Some(o)) = (&weights.state().top_down, last_output) {
                for (h, uh) in u.iter_mut().enumerate() {
                    *uh += gain * td[(base + h) * n_out + o] as f64;
                }
            }
            let winner = sample_softmax(&u, rng);
            let gh = base + winner;
            hidden_counts[gh] += 1;
            hidden_cycles += 1;
            hidden_spikes.push(gh as u32);
            if let Weights::Plastic(state) = &mut weights {
                let row = &mut state.hidden[tile][winner * inputs..(winner + 1) * inputs];
                stdp_sparse(row, &hidden_pending[tile], &mut mark, eta, bounds);
                if let Some(td) = &mut state.top_down {
                    if let Some(o) = last_output {
                        td_presyn[o] = true;
                    }
                    stdp_update(&mut td[gh * n_out..(gh + 1) * n_out], &td_presyn, eta, bounds);
                    if let Some(o) = last_output {
                        td_presyn[o] = false;
                    }
                }
            }
            hidden_pot[base..base + h_per].fill(baseline);
            hidden_pending[tile].clear();
        }

        if hidden_spikes.is_empty() {
            continue;
        }
        {
            let state = weights.state();
            for &gh in &hidden_spikes {
                for (n, p) in out_pot.iter_mut().enumerate() {
                    *p += state.output[n * total_hidden + gh as usize] as f64;
                }
            }
        }
        out_pending.extend_from_slice(&hidden_spikes);
        if out_pending.len() < threshold {
            continue;
        }
        let winner = sample_softmax(&out_pot, rng);
        events.push(SpikeEvent { t, neuron: winner });
        output_cycles += 1;
        if let Weights::Plastic(state) = &mut weights {
            let row = &mut state.output[winner * total_hidden..(winner + 1) * total_hidden];
            stdp_sparse(row, &out_pending, &mut mark, eta, bounds);
        }
        out_pot.fill(baseline);
        out_pending.clear();
        last_output = Some(winner);
    }

    debug_assert_eq!(hidden_counts.iter().map(|&c| c as u64).sum::<u64>(), hidden_cycles);
    debug_assert_eq!(events.len() as u64, output_cycles);
    let output = SpikeRecord {
        num_neurons: n_out,
        timesteps: train.timesteps(),
        events,
    };
    let response = if train.timesteps() == 0 {
        ResponseVector { counts: vec![0; n_out] }
    } else {
        count_spikes(&output, 0, train.timesteps())?
    };
    Ok(PresentationResult {
        response,
        output,
        hidden_counts,
        hidden_cycles,
        output_cycles,
    })
}
