//! Seeded randomness.
//!
//! All sampling uses [`ChaCha8Rng`], seeded with
//! `SeedableRng::seed_from_u64`. Child seeds come from a SplitMix64
//! finalizer applied to the parent seed and a stream index, so replication
//! `j` of a run always sees the same stream regardless of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type QbsRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QbsRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
