use rand_chacha::ChaCha8Rng;

use super::{fresh_element, Adversary};
use crate::error::{Error, Result};
use crate::game::{Oracle, PublicView};
use crate::params::Element;

pub const DEFAULT_MAX_CANDIDATES: usize = 1_000_000;

/// White-box attack on a published representation: searches offline for a
/// non-member the representation accepts. Makes no oracle queries. When the
/// search comes up empty it falls back to a fresh uniform guess.
#[derive(Debug, Clone, Copy)]
pub struct SeedExposed {
    pub max_candidates: usize,
}

impl Default for SeedExposed {
    fn default() -> Self {
        Self { max_candidates: DEFAULT_MAX_CANDIDATES }
    }
}

impl Adversary for SeedExposed {
    fn name(&self) -> &str {
        "seed_exposed"
    }

    fn choose_challenge(
        &mut self,
        oracle: &mut Oracle<'_>,
        view: &PublicView<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Element> {
        let universe = view.params.universe();
        let published = oracle
            .published()
            .ok_or_else(|| Error::Precondition("filter does not publish its representation".into()))?;
        for _ in 0..self.max_candidates {
            let x = universe.sample(rng);
            if !view.set.contains(x) && published.contains(x) {
                return Ok(x);
            }
        }
        let used = view.set.iter().collect();
        fresh_element(universe, &used, rng)
    }
}
