//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from a 64-bit value mixed out of a parent seed and a few labels, so
//! results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Name recorded in run metadata.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.3), seeds mixed with SplitMix64";

/// Stream labels used below a realization seed.
pub mod stream {
    pub const TRAINING_DATA: u64 = 0x7472_6169_6e00;
    pub const PREDICTION_DATA: u64 = 0x7072_6564_0000;
    pub const INPUT_WEIGHTS: u64 = 0x7769_6e00;
    pub const COUPLING: u64 = 0x7769_6e74;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a parent seed with an ordered list of labels.
pub fn derive(parent: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(parent), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
