//! Deterministic per-task random streams.
//!
//! Every stochastic task (one agent's training, one agent's evaluation, one
//! batch of Monte Carlo runs) draws from its own ChaCha stream keyed by a
//! SHA-256 digest of `(master_seed, index, purpose_tag)`. Results therefore do
//! not depend on how tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub fn seed_stream(master_seed: u64, index: u64, purpose_tag: &str) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(index.to_le_bytes());
    hasher.update((purpose_tag.len() as u64).to_le_bytes());
    hasher.update(purpose_tag.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Derives a child master seed, e.g. one per grid point of a sweep.
pub fn derive_seed(master_seed: u64, index: u64, purpose_tag: &str) -> u64 {
    use rand::RngCore;
    seed_stream(master_seed, index, purpose_tag).next_u64()
}
