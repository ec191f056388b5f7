//! Keyed bijection on `[0, domain_size)`.
//!
//! A balanced Feistel network over `2w` bits, where `2w` is the domain width
//! rounded up to an even number, with [`ROUNDS`] rounds. Each round function
//! is a keyed mixer whose key depends on the secret key and the round index.
//! When `domain_size < 2^(2w)` the network is re-applied until the value
//! lands back in the domain (cycle walking); since the domain covers at least
//! a quarter of the network's range the expected number of extra passes is
//! below 3.
//!
//! No cryptographic strength is claimed.

use rand::Rng;

use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::mix::{fmix64, keyed_mix};
use crate::params::Element;

pub const ROUNDS: usize = 4;

#[derive(Clone, PartialEq, Eq)]
pub struct PermKey {
    /// Exactly `lambda` bits, packed little-endian into words; unused high
    /// bits of the last word are zero.
    words: Vec<u64>,
    lambda: u32,
    domain_size: u128,
    half_bits: u32,
    round_keys: [u64; ROUNDS],
}

impl std::fmt::Debug for PermKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PermKey")
            .field("lambda", &self.lambda)
            .field("domain_size", &self.domain_size)
            .finish_non_exhaustive()
    }
}

impl PermKey {
    /// Fresh uniform key of `lambda` bits.
    pub fn generate<R: Rng + ?Sized>(lambda: u32, domain_size: u128, rng: &mut R) -> Result<Self> {
        let words = (0..lambda.div_ceil(64)).map(|_| rng.gen()).collect();
        Self::from_words(words, lambda, domain_size)
    }

    pub fn from_words(mut words: Vec<u64>, lambda: u32, domain_size: u128) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::InvalidParams("key length must be positive".into()));
        }
        if words.len() != lambda.div_ceil(64) as usize {
            return Err(Error::InvalidParams(format!(
                "{} key words cannot hold exactly {lambda} bits",
                words.len()
            )));
        }
        if !(2..=1u128 << 64).contains(&domain_size) {
            return Err(Error::InvalidParams(format!("domain size {domain_size} not in 2..=2^64")));
        }
        if !lambda.is_multiple_of(64) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (lambda % 64)) - 1;
        }
        let width = ceil_log2_u128(domain_size);
        let half_bits = width.div_ceil(2);
        let mut round_keys = [0u64; ROUNDS];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            let mut h = fmix64(0x5052_5020_4B45_5900 ^ r as u64);
            for &w in &words {
                h = keyed_mix(h, w);
            }
            *rk = keyed_mix(h, lambda as u64);
        }
        Ok(Self { words, lambda, domain_size, half_bits, round_keys })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn domain_size(&self) -> u128 {
        self.domain_size
    }

    fn half_mask(&self) -> u64 {
        (1u64 << self.half_bits) - 1
    }

    #[inline]
    fn round_fn(&self, r: usize, half: u64) -> u64 {
        keyed_mix(self.round_keys[r], half) & self.half_mask()
    }

    fn feistel(&self, v: u64) -> u64 {
        let mask = self.half_mask();
        let (mut left, mut right) = (v >> self.half_bits, v & mask);
        for r in 0..ROUNDS {
            let next = left ^ self.round_fn(r, right);
            left = right;
            right = next;
        }
        (left << self.half_bits) | right
    }

    fn feistel_inv(&self, v: u64) -> u64 {
        let mask = self.half_mask();
        let (mut left, mut right) = (v >> self.half_bits, v & mask);
        for r in (0..ROUNDS).rev() {
            let prev = right ^ self.round_fn(r, left);
            right = left;
            left = prev;
        }
        (left << self.half_bits) | right
    }

    fn in_domain(&self, v: u64) -> bool {
        (v as u128) < self.domain_size
    }

    pub fn permute(&self, x: Element) -> Result<Element> {
        if !self.in_domain(x.0) {
            return Err(Error::Domain(format!("{} outside permutation domain {}", x.0, self.domain_size)));
        }
        let mut y = self.feistel(x.0);
        while !self.in_domain(y) {
            y = self.feistel(y);
        }
        Ok(Element(y))
    }

    pub fn invert(&self, y: Element) -> Result<Element> {
        if !self.in_domain(y.0) {
            return Err(Error::Domain(format!("{} outside permutation domain {}", y.0, self.domain_size)));
        }
        let mut x = self.feistel_inv(y.0);
        while !self.in_domain(x) {
            x = self.feistel_inv(x);
        }
        Ok(Element(x))
    }
}

fn ceil_log2_u128(x: u128) -> u32 {
    if x <= u64::MAX as u128 {
        ceil_log2(x as u64)
    } else {
        64
    }
}
