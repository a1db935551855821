//! Seed derivation.
//!
//! Every random graph is generated from a single ChaCha8 stream seeded with
//! a 64-bit value. Experiments derive one such value per trial with
//! [`derive_seed`], so that each `(stream, grid point, trial)` triple owns an
//! independent stream and scheduling order cannot change any result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `base`: `h0 = mix64(base)`, `h(i+1) = mix64(h(i) ^ (part(i) + GOLDEN_GAMMA * (i + 1)))`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().enumerate().fold(mix64(base), |h, (i, &p)| {
        mix64(h ^ p.wrapping_add(GOLDEN_GAMMA.wrapping_mul(i as u64 + 1)))
    })
}

/// The generator used for all sampling.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
