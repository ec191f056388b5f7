//! Counter-based seed derivation.
//!
//! Stream `i` of a master seed is
//!
//! ```text
//! split(master, i) = fmix64(master + (i + 1) * 0x9E3779B97F4A7C15)
//! ```
//!
//! where `fmix64` is the SplitMix64 output finalizer and all arithmetic wraps
//! modulo 2^64. This is exactly the `i`-th output of a SplitMix64 generator
//! seeded with `master`, so any implementation can reproduce it. Every random
//! choice in the crate draws from a ChaCha8 generator seeded with a derived
//! seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mix::fmix64;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Sub-stream tags used inside a single game.
pub mod stream {
    pub const SET: u64 = 0;
    pub const BUILD: u64 = 1;
    pub const ADVERSARY: u64 = 2;
}

pub fn split(master: u64, index: u64) -> u64 {
    fmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
