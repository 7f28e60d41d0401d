//! Seed derivation for reproducible, independently-streamed RNGs.
//!
//! Every unit of randomized work (a trial, a grid point, a sampler call)
//! owns a `ChaCha8Rng` whose seed is derived from a master seed and a
//! list of integer tags. Identical (seed, tags) always yield the same
//! stream; distinct tags yield statistically independent streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a full-avalanche mix of a 64-bit word.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(tag.wrapping_mul(0xa24b_aed4_963e_e407)))
}

/// Derive a child seed from a master seed and a sequence of tags.
pub fn mix_all(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(seed, |acc, &t| mix(acc, t))
}

/// A deterministic counter-based RNG for the given (seed, tags) stream.
pub fn rng_from(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_all(seed, tags))
}
