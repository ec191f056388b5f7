use rand_chacha::ChaCha8Rng;

use super::{fresh_element, Adversary};
use crate::error::{Error, Result};
use crate::game::{used_elements, Oracle, PublicView};
use crate::params::Element;

/// Spends the whole budget on uniform queries, then names a fresh uniform
/// element. Adaptivity plays no role; this is the baseline every filter is
/// sized against.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomProbe;

impl Adversary for RandomProbe {
    fn name(&self) -> &str {
        "random_probe"
    }

    fn choose_challenge(
        &mut self,
        oracle: &mut Oracle<'_>,
        view: &PublicView<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Element> {
        let universe = view.params.universe();
        let t = oracle.budget();
        if universe.size() <= (t + view.set.len()) as u128 {
            return Err(Error::UniverseExhausted(format!(
                "universe of {} elements cannot hold {} queries and {} members",
                universe.size(),
                t,
                view.set.len()
            )));
        }
        for _ in 0..t {
            oracle.query(universe.sample(rng))?;
        }
        fresh_element(universe, &used_elements(view.set, oracle.history()), rng)
    }
}
