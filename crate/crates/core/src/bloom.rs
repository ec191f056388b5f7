//! Classic Bloom filter: `m` bits and `k_h` keyed index hashes.
//!
//! The index seeds are part of the secret state and are counted in the
//! representation size (`m + 64 k_h` bits). For attack demonstrations a
//! filter can be built with its seeds, or its whole state, published.

use rand::Rng;

use crate::bits::BitWriter;
use crate::error::{Error, Result};
use crate::filter::{Filter, FilterBuilder, MembershipView, RepKind, RepresentationSpace};
use crate::mix::keyed_index;
use crate::params::{Element, ElementSet, FilterParams};
use crate::seed;

pub const SEED_BITS: u64 = 64;

/// Largest array the representation space will enumerate.
pub const MAX_ENUMERABLE_BITS: usize = 20;

/// What an adversary may learn about a built filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exposure {
    #[default]
    Secret,
    /// Index seeds are public, the bit array is not.
    SeedsPublished,
    /// Seeds and bit array are public.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    words: Vec<u64>,
    m: usize,
    index_seeds: Vec<u64>,
    exposure: Exposure,
}

/// `max(1, round(ln 2 * m / n))`, with `n` taken as at least 1.
pub fn optimal_hash_count(m: usize, n: usize) -> usize {
    let k = (std::f64::consts::LN_2 * m as f64 / n.max(1) as f64).round() as usize;
    k.max(1)
}

/// Standard sizing `ceil(n ln(1/eps) / ln(2)^2)`.
pub fn standard_bits(n: usize, eps: f64) -> usize {
    let ln2 = std::f64::consts::LN_2;
    ((n as f64 * (1.0 / eps).ln()) / (ln2 * ln2)).ceil().max(1.0) as usize
}

impl BloomFilter {
    /// Builds a filter over `set` with `m` bits. Seeds are drawn from `rng_seed`.
    pub fn build(set: &ElementSet, m: usize, rng_seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("Bloom filter needs m >= 1".into()));
        }
        let k_h = optimal_hash_count(m, set.len());
        let mut rng = seed::rng(rng_seed);
        let index_seeds = (0..k_h).map(|_| rng.gen()).collect();
        let mut filter = Self::empty(m, index_seeds);
        for x in set.iter() {
            filter.insert(x);
        }
        Ok(filter)
    }

    pub fn empty(m: usize, index_seeds: Vec<u64>) -> Self {
        assert!(m >= 1 && !index_seeds.is_empty());
        Self { words: vec![0; m.div_ceil(64)], m, index_seeds, exposure: Exposure::Secret }
    }

    /// Every bit set.
    pub fn saturated(m: usize, index_seeds: Vec<u64>) -> Self {
        let mut f = Self::empty(m, index_seeds);
        for i in 0..m {
            f.set_bit(i);
        }
        f
    }

    pub fn with_exposure(mut self, exposure: Exposure) -> Self {
        self.exposure = exposure;
        self
    }

    fn insert(&mut self, x: Element) {
        for j in 0..self.index_seeds.len() {
            let i = self.index(j, x);
            self.set_bit(i);
        }
    }

    #[inline]
    fn index(&self, j: usize, x: Element) -> usize {
        keyed_index(self.index_seeds[j], x.0, self.m)
    }

    fn set_bit(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn hash_count(&self) -> usize {
        self.index_seeds.len()
    }

    pub fn index_seeds(&self) -> &[u64] {
        &self.index_seeds
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The array as an integer, bit `i` of the array at bit `i`. Only for
    /// `m <= 64`.
    pub fn array_value(&self) -> u64 {
        assert!(self.m <= 64);
        self.words[0]
    }

    pub fn contains(&self, x: Element) -> bool {
        (0..self.index_seeds.len()).all(|j| self.bit(self.index(j, x)))
    }

    /// Expected false-positive rate of a fresh element when `n` elements
    /// were inserted, from the exact occupancy distribution of the array
    /// (index hashes modelled as uniform and independent).
    pub fn expected_fp_rate(m: usize, k_h: usize, n: usize) -> f64 {
        expected_fp_rate(m, k_h, n)
    }
}

fn expected_fp_rate(m: usize, k_h: usize, n: usize) -> f64 {
    // Distribution of the number of distinct positions hit by the fresh
    // element's k_h probes.
    let mf = m as f64;
    let mut distinct = vec![0.0f64; k_h + 1];
    distinct[0] = 1.0;
    for _ in 0..k_h {
        let mut next = vec![0.0f64; k_h + 1];
        for (d, &p) in distinct.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[d] += p * d as f64 / mf;
            if d < k_h {
                next[d + 1] += p * (mf - d as f64) / mf;
            }
        }
        distinct = next;
    }
    // P(d fixed positions all set) after n * k_h uniform insert probes, by
    // inclusion-exclusion.
    let probes = (n * k_h) as i32;
    let mut total = 0.0;
    for (d, &p) in distinct.iter().enumerate().skip(1) {
        let mut all_set = 0.0;
        let mut binom = 1.0;
        for j in 0..=d {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            all_set += sign * binom * ((mf - j as f64) / mf).powi(probes);
            binom = binom * (d - j) as f64 / (j + 1) as f64;
        }
        total += p * all_set;
    }
    total
}

impl MembershipView for BloomFilter {
    fn contains(&self, x: Element) -> bool {
        BloomFilter::contains(self, x)
    }
}

impl Filter for BloomFilter {
    fn kind(&self) -> RepKind {
        RepKind::Steady
    }

    fn query(&mut self, x: Element) -> bool {
        self.contains(x)
    }

    fn bits(&self) -> u64 {
        self.m as u64 + self.index_seeds.len() as u64 * SEED_BITS
    }

    /// Array bits in index order, then each seed as 64 bits.
    fn write_bits(&self, out: &mut BitWriter) {
        for i in 0..self.m {
            out.push_bit(self.bit(i));
        }
        for &s in &self.index_seeds {
            out.push(s, SEED_BITS as u32);
        }
    }

    fn published(&self) -> Option<&dyn MembershipView> {
        match self.exposure {
            Exposure::Full => Some(self),
            _ => None,
        }
    }

    fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        if self.exposure == Exposure::Secret || self.m > MAX_ENUMERABLE_BITS {
            return None;
        }
        Some(Box::new(BloomArraySpace::new(self.m, self.index_seeds.clone())))
    }
}

/// All `2^m` bit arrays under fixed, public index seeds, enumerated by
/// increasing popcount (ties by numeric value).
#[derive(Debug, Clone)]
pub struct BloomArraySpace {
    m: usize,
    index_seeds: Vec<u64>,
    order: Vec<u32>,
}

impl BloomArraySpace {
    pub fn new(m: usize, index_seeds: Vec<u64>) -> Self {
        assert!(m <= MAX_ENUMERABLE_BITS);
        let mut order: Vec<u32> = (0..(1u32 << m)).collect();
        order.sort_by_key(|&a| (a.count_ones(), a));
        Self { m, index_seeds, order }
    }

    fn array(&self, index: u64) -> u32 {
        self.order[index as usize]
    }
}

impl RepresentationSpace for BloomArraySpace {
    fn len(&self) -> u64 {
        self.order.len() as u64
    }

    fn secret_bits(&self) -> u64 {
        self.m as u64
    }

    fn candidate_contains(&self, index: u64, x: Element) -> bool {
        let a = self.array(index);
        self.index_seeds
            .iter()
            .all(|&s| a >> keyed_index(s, x.0, self.m) & 1 == 1)
    }

    fn candidate(&self, index: u64) -> Box<dyn MembershipView + Send + Sync> {
        let a = self.array(index);
        let mut f = BloomFilter::empty(self.m, self.index_seeds.clone());
        f.words[0] = a as u64;
        Box::new(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BloomSizing {
    /// Exactly this many array bits.
    Bits(usize),
    /// `ceil(n ln(1/eps) / ln(2)^2)` from the instance parameters.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BloomBuilder {
    pub sizing: BloomSizing,
    pub exposure: Exposure,
}

impl BloomBuilder {
    pub fn standard() -> Self {
        Self { sizing: BloomSizing::Standard, exposure: Exposure::Secret }
    }

    pub fn with_bits(m: usize) -> Self {
        Self { sizing: BloomSizing::Bits(m), exposure: Exposure::Secret }
    }

    pub fn exposure(mut self, exposure: Exposure) -> Self {
        self.exposure = exposure;
        self
    }

    pub fn array_bits(&self, params: &FilterParams) -> usize {
        match self.sizing {
            BloomSizing::Bits(m) => m,
            BloomSizing::Standard => standard_bits(params.n, params.eps),
        }
    }
}

impl FilterBuilder for BloomBuilder {
    type Output = BloomFilter;

    fn label(&self) -> String {
        "baseline_bloom".into()
    }

    fn build(&self, set: &ElementSet, params: &FilterParams, seed: u64) -> Result<BloomFilter> {
        Ok(BloomFilter::build(set, self.array_bits(params), seed)?.with_exposure(self.exposure))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::serialized_bits;
    use crate::params::Universe;
    use proptest::prelude::*;

    fn sample_set(n: usize, bits: u32, s: u64) -> ElementSet {
        ElementSet::sample(n, Universe::new(bits).unwrap(), &mut seed::rng(s)).unwrap()
    }

    #[test]
    fn empty_set_gives_zero_array() {
        let f = BloomFilter::build(&ElementSet::empty(Universe::new(16).unwrap()), 100, 1).unwrap();
        assert_eq!(f.ones(), 0);
        assert_eq!(f.hash_count(), 69);
        assert!((0..1000).all(|x| !f.contains(Element(x))));
    }

    #[test]
    fn saturated_array_accepts_everything() {
        let f = BloomFilter::saturated(50, vec![1, 2, 3]);
        assert!((0..1000).all(|x| f.contains(Element(x))));
    }

    #[test]
    fn hash_count_rule() {
        assert_eq!(optimal_hash_count(9592, 1000), 7);
        assert_eq!(optimal_hash_count(16, 4), 3);
        assert_eq!(optimal_hash_count(10, 1000), 1);
        assert_eq!(standard_bits(1000, 2f64.powi(-6)), 8657);
    }

    #[test]
    fn members_set_all_their_bits() {
        let set = sample_set(300, 32, 9);
        let f = BloomFilter::build(&set, 3000, 4).unwrap();
        for x in set.iter() {
            for j in 0..f.hash_count() {
                assert!(f.bit(f.index(j, x)));
            }
        }
    }

    #[test]
    fn bit_accounting_matches_serialization() {
        let set = sample_set(1000, 32, 2);
        let f = BloomFilter::build(&set, 9592, 3).unwrap();
        assert_eq!(f.bits(), 9592 + 7 * 64);
        assert_eq!(serialized_bits(&f), f.bits());
    }

    #[test]
    fn standard_sizing_hits_one_percent() {
        let set = sample_set(1000, 32, 11);
        let f = BloomFilter::build(&set, 9592, 12).unwrap();
        let mut rng = seed::rng(13);
        let u = set.universe();
        let mut fp = 0;
        let mut tried = 0;
        while tried < 100_000 {
            let x = u.sample(&mut rng);
            if set.contains(x) {
                continue;
            }
            tried += 1;
            fp += f.contains(x) as usize;
        }
        let rate = fp as f64 / tried as f64;
        assert!((0.005..=0.015).contains(&rate), "rate {rate}");
    }

    /// Monte-Carlo check of the occupancy formula over random builds.
    #[test]
    fn occupancy_expectation_matches_simulation() {
        let (m, n) = (16, 4);
        let k = optimal_hash_count(m, n);
        let expected = expected_fp_rate(m, k, n);
        let u = Universe::new(20).unwrap();
        let mut rng = seed::rng(77);
        let mut hits = 0usize;
        let trials = 200_000;
        for i in 0..trials {
            let set = ElementSet::sample(n, u, &mut rng).unwrap();
            let f = BloomFilter::build(&set, m, i as u64).unwrap();
            let x = loop {
                let x = u.sample(&mut rng);
                if !set.contains(x) {
                    break x;
                }
            };
            hits += f.contains(x) as usize;
        }
        let rate = hits as f64 / trials as f64;
        assert!((rate - expected).abs() < 0.004, "simulated {rate}, expected {expected}");
    }

    #[test]
    fn space_enumerates_by_popcount_and_contains_truth() {
        let set = sample_set(4, 10, 5);
        let f = BloomFilter::build(&set, 16, 6).unwrap().with_exposure(Exposure::SeedsPublished);
        let space = f.representation_space().unwrap();
        assert_eq!(space.len(), 1 << 16);
        assert_eq!(space.secret_bits(), 16);
        let u = Universe::new(10).unwrap();
        let truth = (0..space.len())
            .find(|&i| u.iter().all(|x| space.candidate_contains(i, x) == f.contains(x)))
            .expect("true array is in the space");
        let c = space.candidate(truth);
        assert!(u.iter().all(|x| c.contains(x) == f.contains(x)));
        let small = BloomArraySpace::new(4, vec![1]);
        assert_eq!(small.order[..6], [0, 1, 2, 4, 8, 3]);
    }

    #[test]
    fn secret_filters_publish_nothing() {
        let set = sample_set(4, 10, 5);
        let f = BloomFilter::build(&set, 16, 6).unwrap();
        assert!(f.published().is_none());
        assert!(f.representation_space().is_none());
        let f = f.with_exposure(Exposure::Full);
        assert!(f.published().is_some());
    }

    proptest! {
        #[test]
        fn queries_never_change_the_representation(xs in proptest::collection::vec(any::<u32>(), 0..200), s in any::<u64>()) {
            let set = sample_set(50, 32, s);
            let mut f = BloomFilter::build(&set, 500, s ^ 1).unwrap();
            let before = f.clone();
            for x in xs {
                f.query(Element(x as u64));
            }
            prop_assert_eq!(f, before);
        }

        #[test]
        fn adding_elements_keeps_positives(s in any::<u64>()) {
            let u = Universe::new(32).unwrap();
            let big = ElementSet::sample(60, u, &mut seed::rng(s)).unwrap();
            let small = ElementSet::new(big.as_slice()[..30].to_vec(), u).unwrap();
            // Same seeds: k_h depends on n, so pin it by building with explicit seeds.
            let seeds = vec![s, s.rotate_left(17), s ^ 0xABCD];
            let mut a = BloomFilter::empty(600, seeds.clone());
            let mut b = BloomFilter::empty(600, seeds);
            small.iter().for_each(|x| a.insert(x));
            big.iter().for_each(|x| b.insert(x));
            let mut rng = seed::rng(s ^ 3);
            for _ in 0..500 {
                let x = u.sample(&mut rng);
                prop_assert!(!a.contains(x) || b.contains(x));
            }
        }
    }
}
