use std::collections::HashSet;

use rand::Rng;

use crate::bits::ceil_log2;
use crate::error::{Error, Result};

/// A point of the universe `[0, 2^u_bits)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub u64);

impl Element {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl From<u64> for Element {
    fn from(v: u64) -> Self {
        Element(v)
    }
}

/// The universe `[0, 2^bits)`, `1 <= bits <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Universe {
    bits: u32,
}

impl Universe {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 64 {
            return Err(Error::InvalidParams(format!("universe width {bits} not in 1..=64")));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn size(self) -> u128 {
        1u128 << self.bits
    }

    pub fn mask(self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }

    pub fn contains(self, x: Element) -> bool {
        x.0 & !self.mask() == 0
    }

    pub fn check(self, x: Element) -> Result<Element> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(Error::OutOfUniverse { value: x.0, u_bits: self.bits })
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Element {
        Element(rng.gen::<u64>() & self.mask())
    }

    /// Every element, in increasing order. Only sensible for small universes.
    pub fn iter(self) -> impl Iterator<Item = Element> {
        assert!(self.bits < 64);
        (0..(1u64 << self.bits)).map(Element)
    }
}

/// A set of distinct elements, kept in the order it was supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    order: Vec<Element>,
    lookup: HashSet<Element>,
    universe: Universe,
}

impl ElementSet {
    /// Rejects duplicates and elements outside the universe.
    pub fn new(elements: Vec<Element>, universe: Universe) -> Result<Self> {
        let mut lookup = HashSet::with_capacity(elements.len());
        for &x in &elements {
            universe.check(x)?;
            if !lookup.insert(x) {
                return Err(Error::DuplicateElement(x.0));
            }
        }
        Ok(Self { order: elements, lookup, universe })
    }

    pub fn empty(universe: Universe) -> Self {
        Self { order: Vec::new(), lookup: HashSet::new(), universe }
    }

    /// `n` distinct elements drawn uniformly without replacement.
    pub fn sample<R: Rng + ?Sized>(n: usize, universe: Universe, rng: &mut R) -> Result<Self> {
        if n as u128 > universe.size() / 2 {
            return Err(Error::InvalidParams(format!(
                "cannot sample {n} elements from a {}-bit universe",
                universe.bits()
            )));
        }
        let mut order = Vec::with_capacity(n);
        let mut lookup = HashSet::with_capacity(n);
        while order.len() < n {
            let x = universe.sample(rng);
            if lookup.insert(x) {
                order.push(x);
            }
        }
        Ok(Self { order, lookup, universe })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, x: Element) -> bool {
        self.lookup.contains(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.order.iter().copied()
    }

    pub fn as_slice(&self) -> &[Element] {
        &self.order
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }
}

/// Parameters of a filter instance and the resilience it targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Set size.
    pub n: usize,
    /// Target false-positive probability.
    pub eps: f64,
    /// Adaptive query budget.
    pub t: usize,
    /// Security parameter in bits (permutation key length).
    pub lambda: u32,
    /// Universe width; the universe is `[0, 2^u_bits)`.
    pub u_bits: u32,
}

pub const DEFAULT_LAMBDA: u32 = 128;
pub const DEFAULT_U_BITS: u32 = 32;

impl FilterParams {
    pub fn new(n: usize, eps: f64, t: usize) -> Result<Self> {
        let p = Self { n, eps, t, lambda: DEFAULT_LAMBDA, u_bits: DEFAULT_U_BITS };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lambda(mut self, lambda: u32) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn with_u_bits(mut self, u_bits: u32) -> Result<Self> {
        self.u_bits = u_bits;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParams(format!("eps = {} not in (0, 1)", self.eps)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if self.u_bits == 0 || self.u_bits > 64 {
            return Err(Error::InvalidParams(format!("u_bits = {} not in 1..=64", self.u_bits)));
        }
        let needed = ceil_log2(self.n as u64) + 1;
        if self.u_bits < needed {
            return Err(Error::InvalidParams(format!(
                "u_bits = {} too small for n = {} (need at least {needed})",
                self.u_bits, self.n
            )));
        }
        // Fingerprints are packed into a u64.
        if self.log_inv_eps() > 16 {
            return Err(Error::InvalidParams(format!("eps = {} below 2^-16", self.eps)));
        }
        if self.lambda == 0 {
            return Err(Error::InvalidParams("lambda must be at least 1".into()));
        }
        Ok(())
    }

    pub fn universe(&self) -> Universe {
        Universe { bits: self.u_bits }
    }

    /// `ceil(log2(1/eps))`, at least 1. Values within 1e-9 of an integer are
    /// snapped so that `eps = 2^-6` gives exactly 6.
    pub fn log_inv_eps(&self) -> u32 {
        let l = (1.0 / self.eps).log2();
        let snapped = if (l - l.round()).abs() < 1e-9 { l.round() } else { l.ceil() };
        (snapped as u32).max(1)
    }

    /// Fingerprint length for the adaptive construction: `4 * ceil(log2(1/eps))`.
    pub fn ell(&self) -> u32 {
        4 * self.log_inv_eps()
    }

    /// Independence of each one-bit function: `ceil(2t / ceil(log2(1/eps)))`, at least 1.
    pub fn k(&self) -> usize {
        let l = self.log_inv_eps() as usize;
        (2 * self.t).div_ceil(l).max(1)
    }
}

/// The minimal error `2^(-m/n)` of an `m`-bit filter for `n` elements.
///
/// Together with the counting bound `m >= n log2(1/eps)` this is the best
/// error any `m`-bit representation can reach.
pub fn minimal_error(m: u64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("minimal error needs n >= 1".into()));
    }
    if m.is_multiple_of(n) {
        let e = m / n;
        // Exact power of two while it is representable.
        if e <= 1074 {
            return Ok(2f64.powi(-(e as i32)));
        }
        return Ok(0.0);
    }
    Ok(2f64.powf(-(m as f64) / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn minimal_error_examples() {
        assert_eq!(minimal_error(16, 4).unwrap(), 0.0625);
        assert_eq!(minimal_error(10, 10).unwrap(), 0.5);
        assert_eq!(minimal_error(60, 10).unwrap(), 0.015625);
        assert!(matches!(minimal_error(10, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn minimal_error_is_monotone() {
        for n in 1..20u64 {
            for m in 0..100u64 {
                let e = minimal_error(m, n).unwrap();
                assert!(minimal_error(m + 1, n).unwrap() < e);
                assert!(minimal_error(m, n + 1).unwrap() >= e);
            }
        }
    }

    #[test]
    fn derived_sizes() {
        let p = FilterParams::new(1024, 2f64.powi(-6), 4096).unwrap();
        assert_eq!(p.log_inv_eps(), 6);
        assert_eq!(p.ell(), 24);
        assert_eq!(p.k(), 1366);

        let p = FilterParams::new(10, 0.3, 0).unwrap();
        assert_eq!(p.log_inv_eps(), 2);
        assert_eq!(p.ell(), 8);
        assert_eq!(p.k(), 1);
    }

    #[test]
    fn validation() {
        assert!(FilterParams::new(0, 0.1, 1).is_err());
        assert!(FilterParams::new(10, 0.0, 1).is_err());
        assert!(FilterParams::new(10, 1.0, 1).is_err());
        let p = FilterParams::new(1000, 0.01, 1).unwrap();
        // ceil(log2 1000) + 1 = 11
        assert!(p.with_u_bits(10).is_err());
        assert!(p.with_u_bits(11).is_ok());
    }

    #[test]
    fn element_set_rejects_duplicates_and_strays() {
        let u = Universe::new(8).unwrap();
        assert_eq!(
            ElementSet::new(vec![Element(1), Element(2), Element(1)], u),
            Err(Error::DuplicateElement(1))
        );
        assert!(matches!(
            ElementSet::new(vec![Element(256)], u),
            Err(Error::OutOfUniverse { value: 256, u_bits: 8 })
        ));
    }

    #[test]
    fn sampled_sets_are_distinct_and_in_range() {
        let u = Universe::new(10).unwrap();
        let s = ElementSet::sample(500, u, &mut seed::rng(3)).unwrap();
        assert_eq!(s.len(), 500);
        assert!(s.iter().all(|x| u.contains(x)));
    }

    #[test]
    fn full_width_universe() {
        let u = Universe::new(64).unwrap();
        assert_eq!(u.mask(), u64::MAX);
        assert!(u.contains(Element(u64::MAX)));
    }
}
