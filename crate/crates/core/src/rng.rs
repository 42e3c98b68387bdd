//! Seeded random streams.
//!
//! A run owns one [`ChaCha8Rng`] seeded from its 64-bit seed. Batches derive
//! per-trial seeds from `(master, index)` through ChaCha's independent stream
//! selector, so trials can execute in any order or in parallel.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn seeded(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `index` in a batch keyed by `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}
