//! Seed derivation for reproducible experiment cells.
//!
//! Every random stream is derived from one master seed by hashing the
//! component name and the cell coordinates:
//!
//! ```text
//! stream_seed = first 8 bytes (LE) of SHA-256(master_le || component || 0x00 || coord_le...)
//! ```
//!
//! so the seed of a cell never depends on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used by every stochastic component.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a 64-bit stream seed from the master seed, a component name and
/// integer cell coordinates.
pub fn derive_seed(master: u64, component: &str, coords: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(component.as_bytes());
    hasher.update([0u8]);
    for c in coords {
        hasher.update(c.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn derive_rng(master: u64, component: &str, coords: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(master, component, coords))
}
