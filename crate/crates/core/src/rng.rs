//! Seeded randomness. Every random draw in the crate goes through [`seeded`], so
//! results are a pure function of the 64-bit seeds involved.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout; recorded in output metadata as [`GENERATOR_ID`].
pub type Rng = ChaCha8Rng;

pub const GENERATOR_ID: &str = "chacha8-rand_chacha-0.9";

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for stream `index` of `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Named sub-streams of a trial seed, so adding a new draw never shifts the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Data = 1,
    Secret = 2,
    Noise = 3,
    Probe = 4,
    Perturbation = 5,
}

pub fn stream_seed(trial_seed: u64, stream: Stream) -> u64 {
    derive_seed(trial_seed, stream as u64)
}
