//! Population decoding workbench for hierarchical winner-take-all spiking networks.
//!
//! The pipeline runs from labelled tabular data to class predictions:
//!
//! 1. [`dataset`]: ingestion, variance filtering, mRMR ranking, replication
//!    oversampling, stratified folds and a synthetic generator.
//! 2. [`gsn`]: a Kohonen map lays features out on a grid and each sample is
//!    rendered as a binary image of rotated, scaled diamonds.
//! 3. [`spike_codec`]: binary images become Bernoulli/Poisson spike trains and
//!    output spike records become count vectors.
//! 4. [`wta_network`]: tiled hidden WTA circuits feeding one output WTA circuit,
//!    trained with an exponential-depression STDP rule.
//! 5. [`decoding`]: neuron-class assignment and the five population decoders.
//! 6. [`evaluation`]: metrics and the experiment drivers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod decoding;
pub mod evaluation;
pub mod gsn;
pub mod seed;
pub mod spike_codec;
pub mod wta_network;

mod error;

pub use error::{Error, Result};
