//! Deterministic seed derivation.
//!
//! Every run, round and worker derives its own stream from a root seed so
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for substream `index` of `root`.
pub fn derive(root: u64, index: u64) -> u64 {
    mix64(mix64(root.wrapping_add(GOLDEN)) ^ index.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019))
}

/// Hash of a seed, a tag and a real vector (bitwise).
pub fn hash_point(seed: u64, tag: u64, coords: &[f64]) -> u64 {
    let mut h = derive(seed, tag);
    for c in coords {
        h = mix64(h ^ c.to_bits().wrapping_add(GOLDEN));
    }
    h
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
