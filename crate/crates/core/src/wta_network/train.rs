//! Training epochs and response collection.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::decoding::ResponseMatrix;
use crate::gsn::GsnImage;
use crate::seed::rng_from_seed;
use crate::spike_codec::{encode_poisson, EncoderConfig};

use super::{NetworkError, NetworkState, Result};

fn check_timing(state: &NetworkState, encoder: &EncoderConfig) -> Result<()> {
    let cfg = &state.config;
    if encoder.dt_ms != cfg.dt_ms || encoder.duration_ms != cfg.presentation_ms {
        return Err(NetworkError::InvalidConfig(format!(
            "encoder runs {} ms at dt {} ms, network expects {} ms at dt {} ms",
            encoder.duration_ms, encoder.dt_ms, cfg.presentation_ms, cfg.dt_ms
        )));
    }
    if encoder.complement != cfg.complement_inputs {
        return Err(NetworkError::InvalidConfig(
            "encoder and network disagree on complement channels".into(),
        ));
    }
    Ok(())
}

/// Present every image once per epoch, in a fresh shuffled order, with
/// learning on. Each presentation draws a new spike train.
pub fn train_epochs<R: Rng + ?Sized>(
    state: &mut NetworkState,
    images: &[GsnImage],
    encoder: &EncoderConfig,
    epochs: usize,
    rng: &mut R,
) -> Result<()> {
    train_epochs_with(state, images, encoder, epochs, rng, |_, _, _| Ok(()))
}

/// As [`train_epochs`], calling `observer(state, image_index, rng)` after
/// every learning presentation.
pub fn train_epochs_with<R, F>(
    state: &mut NetworkState,
    images: &[GsnImage],
    encoder: &EncoderConfig,
    epochs: usize,
    rng: &mut R,
    mut observer: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&NetworkState, usize, &mut R) -> Result<()>,
{
    if images.is_empty() {
        return Err(NetworkError::EmptyStimuli);
    }
    if epochs == 0 {
        return Err(NetworkError::InvalidConfig("epochs must be at least 1".into()));
    }
    check_timing(state, encoder)?;
    let mut order: Vec<usize> = (0..images.len()).collect();
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            let train = encode_poisson(&images[i], encoder, rng)?;
            state.present(&train, true, rng)?;
            debug_assert!(state.weights_in_bounds());
            observer(state, i, rng)?;
        }
        state.trained_epochs += 1;
    }
    Ok(())
}

/// Inference responses to every image. One stream seed per image is drawn
/// from `rng` up front, so the result does not depend on thread count.
pub fn collect_responses<R: Rng + ?Sized>(
    state: &NetworkState,
    images: &[GsnImage],
    labels: &[usize],
    encoder: &EncoderConfig,
    rng: &mut R,
    allow_untrained: bool,
) -> Result<ResponseMatrix> {
    if state.trained_epochs == 0 && !allow_untrained {
        return Err(NetworkError::UntrainedNetwork);
    }
    if images.len() != labels.len() {
        return Err(NetworkError::LabelMismatch(labels.len(), images.len()));
    }
    check_timing(state, encoder)?;
    let seeds: Vec<u64> = (0..images.len()).map(|_| rng.random()).collect();
    let rows = images
        .par_iter()
        .zip(seeds)
        .map(|(img, seed)| {
            let mut local = rng_from_seed(seed);
            let train = encode_poisson(img, encoder, &mut local)?;
            Ok(state.respond(&train, &mut local)?.response.counts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseMatrix::new(
        state.config.output_neurons,
        state.config.num_classes,
        rows,
        labels.to_vec(),
    )?)
}
