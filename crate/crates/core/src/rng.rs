//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded through
//! [`derive_seed`], which mixes a master seed with a path of stream labels
//! (fold id, generation, ...) using the SplitMix64 finaliser. ChaCha8 output is
//! specified bit-for-bit, so results do not depend on platform or thread count.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Stream labels used when deriving sub-seeds.
pub mod stream {
    pub const OUTER_FOLDS: u64 = 0x01;
    pub const WRAPPER: u64 = 0x02;
    pub const FIT: u64 = 0x03;
    pub const FITNESS_FOLDS: u64 = 0x04;
    pub const GA: u64 = 0x05;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed for the stream identified by `path`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, path))
}
