use std::collections::{HashSet, VecDeque};

use rand_chacha::ChaCha8Rng;

use super::{fresh_element, Adversary};
use crate::error::Result;
use crate::game::{used_elements, Oracle, PublicView};
use crate::params::Element;

/// Feedback attack: probes uniformly until it sees a false positive, then
/// spends the remaining budget on Hamming-distance-one neighbours of every
/// false positive found, hoping that structure in the hashes makes
/// neighbours of a false positive likely to be false positives too. The
/// challenge is an unqueried neighbour of the most recent false positive.
#[derive(Debug, Clone, Copy, Default)]
pub struct FpNeighborhood;

impl Adversary for FpNeighborhood {
    fn name(&self) -> &str {
        "fp_neighborhood"
    }

    fn choose_challenge(
        &mut self,
        oracle: &mut Oracle<'_>,
        view: &PublicView<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Element> {
        let universe = view.params.universe();
        let bits = universe.bits();
        let mut asked: HashSet<Element> = HashSet::new();
        let mut pending: VecDeque<Element> = VecDeque::new();
        let mut false_positives: Vec<Element> = Vec::new();

        while oracle.remaining() > 0 {
            let x = match pending.pop_front() {
                Some(x) => x,
                None => universe.sample(rng),
            };
            if view.set.contains(x) || !asked.insert(x) {
                continue;
            }
            if oracle.query(x)? {
                false_positives.push(x);
                for b in 0..bits {
                    let y = Element(x.0 ^ (1 << b));
                    if !view.set.contains(y) && !asked.contains(&y) {
                        pending.push_back(y);
                    }
                }
            }
        }

        let used = used_elements(view.set, oracle.history());
        for fp in false_positives.iter().rev() {
            if let Some(y) = (0..bits).map(|b| Element(fp.0 ^ (1 << b))).find(|y| !used.contains(y)) {
                return Ok(y);
            }
        }
        fresh_element(universe, &used, rng)
    }
}
