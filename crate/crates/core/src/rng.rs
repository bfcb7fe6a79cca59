//! Counter-based randomness: a stateless mix of `(seed, counter)`.
//!
//! Every vertex, trial or sweep row gets its bits from a pure function of its
//! own index, so any sub-range can be generated independently and parallel
//! schedules produce the same result as a serial loop.

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

/// Pseudorandom word for position `counter` of stream `seed`.
#[inline]
pub fn hash2(seed: u64, counter: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(GOLDEN)) ^ counter.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
}

/// Seed of the `index`-th child stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    hash2(seed ^ 0x5EED_5EED_5EED_5EED, index)
}

/// Independent generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}
