//! Permutation shield: wraps any filter so that every input, at build time
//! and at query time, first passes through a secret keyed permutation of the
//! universe. Adaptive queries then reach the inner filter as distinct,
//! effectively random points. The only added state is the `lambda`-bit key,
//! and the key is the only part that has to stay secret.

use crate::bits::BitWriter;
use crate::error::{Error, Result};
use crate::filter::{Filter, FilterBuilder, MembershipView, QueryCost, RepKind, RepresentationSpace};
use crate::params::{Element, ElementSet, FilterParams};
use crate::perm::PermKey;
use crate::seed;

/// Sub-streams of the shield's build seed.
const KEY_STREAM: u64 = 0;
const INNER_STREAM: u64 = 1;

pub struct ShieldedFilter<F> {
    key: PermKey,
    inner: F,
}

impl<F: Filter> ShieldedFilter<F> {
    pub fn new(key: PermKey, inner: F) -> Self {
        Self { key, inner }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn key(&self) -> &PermKey {
        &self.key
    }

    fn permute(&self, x: Element) -> Element {
        self.key.permute(x).expect("query outside the universe")
    }
}

impl<F: Filter> Filter for ShieldedFilter<F> {
    fn kind(&self) -> RepKind {
        self.inner.kind()
    }

    fn query(&mut self, x: Element) -> bool {
        let y = self.permute(x);
        self.inner.query(y)
    }

    /// Inner size plus exactly `lambda` key bits.
    fn bits(&self) -> u64 {
        self.inner.bits() + self.key.lambda() as u64
    }

    /// Inner representation, then the key: full words first, the last word
    /// truncated to the remaining bits.
    fn write_bits(&self, out: &mut BitWriter) {
        self.inner.write_bits(out);
        let mut left = self.key.lambda();
        for &w in self.key.words() {
            let width = left.min(64);
            out.push(w, width);
            left -= width;
        }
    }

    /// Publishes the inner representation only; the key is never exposed.
    fn published(&self) -> Option<&dyn MembershipView> {
        self.inner.published()
    }

    fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        self.inner.representation_space()
    }

    fn query_cost(&self) -> Option<QueryCost> {
        self.inner.query_cost()
    }
}

impl<F: Filter + MembershipView> MembershipView for ShieldedFilter<F> {
    fn contains(&self, x: Element) -> bool {
        self.inner.contains(self.permute(x))
    }
}

/// Shields whatever `inner` builds.
#[derive(Debug, Clone)]
pub struct ShieldBuilder<B> {
    pub inner: B,
}

impl<B: FilterBuilder> ShieldBuilder<B> {
    pub fn new(inner: B) -> Self {
        Self { inner }
    }
}

/// Builds `inner` on the permuted image of `set` under a fresh `lambda`-bit key.
pub fn shield_build<B: FilterBuilder>(
    inner: &B,
    set: &ElementSet,
    params: &FilterParams,
    rng_seed: u64,
) -> Result<ShieldedFilter<B::Output>> {
    let universe = set.universe();
    let key = PermKey::generate(params.lambda, universe.size(), &mut seed::rng(seed::split(rng_seed, KEY_STREAM)))?;
    let image = set.iter().map(|x| key.permute(x)).collect::<Result<Vec<_>>>()?;
    let image = match ElementSet::new(image, universe) {
        Ok(s) => s,
        Err(Error::DuplicateElement(v)) => unreachable!("permutation collision at {v}"),
        Err(e) => return Err(e),
    };
    let inner = inner.build(&image, params, seed::split(rng_seed, INNER_STREAM))?;
    Ok(ShieldedFilter::new(key, inner))
}

impl<B: FilterBuilder> FilterBuilder for ShieldBuilder<B> {
    type Output = ShieldedFilter<B::Output>;

    fn label(&self) -> String {
        format!("shielded_{}", self.inner.label())
    }

    fn build(&self, set: &ElementSet, params: &FilterParams, seed: u64) -> Result<Self::Output> {
        shield_build(&self.inner, set, params, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloom::BloomBuilder;
    use crate::filter::{serialized_bits, ExactSetBuilder};
    use crate::params::Universe;
    use std::sync::{Arc, Mutex};

    fn params(n: usize) -> FilterParams {
        FilterParams::new(n, 2f64.powi(-6), 100).unwrap()
    }

    #[test]
    fn members_pass_through_the_shield() {
        let p = params(1000);
        let set = ElementSet::sample(1000, p.universe(), &mut seed::rng(1)).unwrap();
        let mut f = shield_build(&BloomBuilder::standard(), &set, &p, 2).unwrap();
        assert!(set.iter().all(|x| f.query(x)));
    }

    #[test]
    fn overhead_is_exactly_lambda() {
        let p = params(1000);
        let set = ElementSet::sample(1000, p.universe(), &mut seed::rng(1)).unwrap();
        let f = shield_build(&BloomBuilder::with_bits(9592), &set, &p, 3).unwrap();
        assert_eq!(f.bits(), f.inner().bits() + 128);
        assert_eq!(f.bits() - f.inner().bits(), 128);
        assert_eq!(serialized_bits(&f), f.bits());
        // Array part alone: 9592 + 128 = 9720.
        assert_eq!(f.inner().m() as u64 + f.key().lambda() as u64, 9720);
    }

    #[test]
    fn shielded_exact_set_has_no_false_positives() {
        let p = params(50).with_u_bits(12).unwrap();
        let set = ElementSet::sample(50, p.universe(), &mut seed::rng(4)).unwrap();
        let mut f = shield_build(&ExactSetBuilder, &set, &p, 5).unwrap();
        for x in Universe::new(12).unwrap().iter() {
            assert_eq!(f.query(x), set.contains(x));
        }
    }

    /// Records every inner input.
    struct Recording(Arc<Mutex<Vec<Element>>>);

    impl Filter for Recording {
        fn kind(&self) -> RepKind {
            RepKind::Steady
        }
        fn query(&mut self, x: Element) -> bool {
            self.0.lock().unwrap().push(x);
            false
        }
        fn bits(&self) -> u64 {
            0
        }
        fn write_bits(&self, _out: &mut BitWriter) {}
    }

    #[test]
    fn distinct_outer_queries_never_collide_inside() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let key = PermKey::generate(128, 1 << 16, &mut seed::rng(6)).unwrap();
        let mut f = ShieldedFilter::new(key, Recording(log.clone()));
        for x in 0..1u64 << 16 {
            f.query(Element(x));
        }
        let mut inner = log.lock().unwrap().clone();
        inner.sort_unstable();
        inner.dedup();
        assert_eq!(inner.len(), 1 << 16);
    }

    #[test]
    fn key_never_published() {
        let p = params(10);
        let set = ElementSet::sample(10, p.universe(), &mut seed::rng(7)).unwrap();
        let f = shield_build(&BloomBuilder::standard(), &set, &p, 8).unwrap();
        assert!(f.published().is_none());
        let f = shield_build(&BloomBuilder::standard().exposure(crate::bloom::Exposure::Full), &set, &p, 8).unwrap();
        // Published view is the inner filter evaluated on raw inputs.
        let view = f.published().unwrap();
        for x in set.iter() {
            assert_eq!(view.contains(x), f.inner().contains(x));
        }
    }
}
