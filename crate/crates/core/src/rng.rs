//! Seed derivation for reproducible, independent random streams.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`]. Per-trial seeds are
//! derived from `(root_seed, index)` with the SplitMix64 counter construction:
//! the counter `root_seed + (index + 1) * GOLDEN` is distinct for every index
//! and the finalizer is a bijection on `u64`, so no two trials of one root
//! share a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    mix64(root.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Seed for a named sub-purpose (graph generation, state sampling, ...).
pub fn derive_labeled(root: u64, label: &str) -> u64 {
    let tag = label
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    mix64(root ^ mix64(tag))
}

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
