use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use super::{fresh_element, Adversary};
use crate::error::{Error, Result};
use crate::filter::{MembershipView, RepresentationSpace};
use crate::game::{used_elements, Oracle, PublicView};
use crate::params::{minimal_error, Element};

/// Query multiplier from the original analysis; far more than needed in
/// practice.
pub const DEFAULT_C: f64 = 200.0;

/// Learning attack on steady filters with an enumerable representation
/// space.
///
/// 1. Query `ceil(c * m / eps0)` uniform elements (capped at the oracle
///    budget).
/// 2. Walk the representation space in its canonical order and keep the first
///    candidate that agrees with every recorded answer.
/// 3. Draw up to `ceil(100 / eps0)` uniform elements and return the first
///    fresh one the candidate accepts, or an arbitrary element otherwise.
///
/// With an honest oracle the true representation is always consistent, so
/// step 2 cannot fail. When the oracle answers through a secret permutation
/// the space may hold no consistent candidate at all; the default mode then
/// reports [`Error::NoConsistentRepresentation`], the lenient mode guesses a
/// fresh uniform element instead.
pub struct ConsistencySearch {
    c: f64,
    lenient: bool,
    inferred: Option<Box<dyn MembershipView + Send + Sync>>,
}

impl std::fmt::Debug for ConsistencySearch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConsistencySearch")
            .field("c", &self.c)
            .field("lenient", &self.lenient)
            .field("inferred", &self.inferred.is_some())
            .finish()
    }
}

impl ConsistencySearch {
    pub fn new(c: f64) -> Self {
        Self { c, lenient: false, inferred: None }
    }

    pub fn lenient(mut self, lenient: bool) -> Self {
        self.lenient = lenient;
        self
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Number of learning queries for `m` secret bits and `n` members.
    pub fn query_count(c: f64, m: u64, n: usize) -> Result<usize> {
        let eps0 = minimal_error(m, n as u64)?;
        Ok((c * m as f64 / eps0).ceil() as usize)
    }

    /// The representation chosen in step 2 of the last game, if any.
    pub fn inferred(&self) -> Option<&(dyn MembershipView + Send + Sync)> {
        self.inferred.as_deref()
    }
}

/// Index of the first candidate agreeing with all labels.
pub fn first_consistent(space: &dyn RepresentationSpace, labels: &[(Element, bool)]) -> Option<u64> {
    // Deduplicate and test positives first: low-popcount candidates, which
    // come first in the order, are rejected by a positive almost at once.
    let mut unique: HashMap<Element, bool> = HashMap::with_capacity(labels.len());
    for &(x, y) in labels {
        unique.insert(x, y);
    }
    let mut ordered: Vec<(Element, bool)> = unique.into_iter().collect();
    ordered.sort_unstable_by_key(|&(x, y)| (!y, x));
    (0..space.len()).find(|&i| ordered.iter().all(|&(x, y)| space.candidate_contains(i, x) == y))
}

impl Adversary for ConsistencySearch {
    fn name(&self) -> &str {
        "consistency_search"
    }

    fn choose_challenge(
        &mut self,
        oracle: &mut Oracle<'_>,
        view: &PublicView<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Element> {
        self.inferred = None;
        let universe = view.params.universe();
        let m = oracle
            .representation_space()
            .ok_or_else(|| Error::Precondition("filter has no enumerable representation space".into()))?
            .secret_bits();
        let eps0 = minimal_error(m, view.set.len() as u64)?;
        let t = Self::query_count(self.c, m, view.set.len())?.min(oracle.budget());

        for _ in 0..t {
            oracle.query(universe.sample(rng))?;
        }
        let labels = oracle.history().to_vec();

        let found = {
            let space = oracle.representation_space().expect("space was available above");
            first_consistent(space.as_ref(), &labels).map(|i| space.candidate(i))
        };
        let used = used_elements(view.set, &labels);
        let inferred = match found {
            Some(rep) => rep,
            None if self.lenient => return fresh_element(universe, &used, rng),
            None => return Err(Error::NoConsistentRepresentation { labels: labels.len() }),
        };
        debug_assert!(labels.iter().all(|&(x, y)| inferred.contains(x) == y));

        let tries = (100.0 / eps0).ceil() as usize;
        let mut hit = None;
        for _ in 0..tries {
            let x = universe.sample(rng);
            if !used.contains(&x) && inferred.contains(x) {
                hit = Some(x);
                break;
            }
        }
        self.inferred = Some(inferred);
        match hit {
            Some(x) => Ok(x),
            None => fresh_element(universe, &used, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloom::{BloomArraySpace, BloomBuilder, BloomFilter, Exposure};
    use crate::filter::Filter;
    use crate::game::run_challenge;
    use crate::params::{ElementSet, FilterParams, Universe};
    use crate::seed;

    fn toy_params(t: usize) -> FilterParams {
        FilterParams::new(4, 1.0 / 16.0, t).unwrap().with_u_bits(10).unwrap()
    }

    #[test]
    fn query_count_matches_formula() {
        assert_eq!(ConsistencySearch::query_count(200.0, 16, 4).unwrap(), 51_200);
        assert_eq!(ConsistencySearch::query_count(4.0, 16, 4).unwrap(), 1024);
    }

    #[test]
    fn first_consistent_recovers_a_rep_matching_all_labels() {
        let u = Universe::new(10).unwrap();
        let set = ElementSet::sample(4, u, &mut seed::rng(7)).unwrap();
        let f = BloomFilter::build(&set, 16, 11).unwrap();
        let labels: Vec<_> = u.iter().map(|x| (x, f.contains(x))).collect();
        let space = BloomArraySpace::new(16, f.index_seeds().to_vec());
        let i = first_consistent(&space, &labels).unwrap();
        let rep = space.candidate(i);
        assert!(u.iter().all(|x| rep.contains(x) == f.contains(x)));
    }

    #[test]
    fn no_labels_means_first_candidate() {
        let space = BloomArraySpace::new(4, vec![1]);
        assert_eq!(first_consistent(&space, &[]), Some(0));
    }

    #[test]
    fn strict_mode_reports_impossible_labels() {
        let space = BloomArraySpace::new(4, vec![1]);
        let x = Element(5);
        assert!(first_consistent(&space, &[(x, true), (x, false)]).is_some());
        // Both orders of a contradictory pair collapse to the last answer;
        // a truly inconsistent history needs two elements on one bit.
        let twin = (0..1024u64)
            .map(Element)
            .find(|&y| y != x && crate::mix::keyed_index(1, y.0, 4) == crate::mix::keyed_index(1, x.0, 4))
            .unwrap();
        assert_eq!(first_consistent(&space, &[(x, true), (twin, false)]), None);
    }

    #[test]
    fn inferred_rep_agrees_with_history() {
        let params = toy_params(1024);
        let set = ElementSet::sample(4, params.universe(), &mut seed::rng(2)).unwrap();
        let builder = BloomBuilder::with_bits(16).exposure(Exposure::SeedsPublished);
        let mut adv = ConsistencySearch::new(4.0);
        let tr = run_challenge(&builder, &mut adv, &set, &params, 99).unwrap();
        assert_eq!(tr.queries.len(), 1024);
        let rep = adv.inferred().unwrap();
        assert!(tr.queries.iter().all(|&(x, y)| rep.contains(x) == y));
    }

    #[test]
    fn default_constant_exhausts_the_toy_universe() {
        // 51200 uniform queries over 1024 elements leave nothing fresh.
        let t = ConsistencySearch::query_count(DEFAULT_C, 16, 4).unwrap();
        let u = Universe::new(10).unwrap();
        let mut rng = seed::rng(5);
        let seen: std::collections::HashSet<_> = (0..t).map(|_| u.sample(&mut rng)).collect();
        assert_eq!(seen.len(), 1024);
    }

    #[test]
    fn exact_set_oracle_yields_a_failed_guess() {
        let params = toy_params(1024);
        let set = ElementSet::sample(4, params.universe(), &mut seed::rng(3)).unwrap();
        let mut adv = ConsistencySearch::new(4.0);
        let tr = run_challenge(&crate::filter::ExactSetBuilder, &mut adv, &set, &params, 1).unwrap();
        assert!(!tr.success);
    }

    #[test]
    fn secret_mode_has_no_space() {
        let params = toy_params(16);
        let set = ElementSet::sample(4, params.universe(), &mut seed::rng(3)).unwrap();
        let mut f = BloomFilter::build(&set, 16, 0).unwrap();
        assert!(f.representation_space().is_none());
        let mut oracle = Oracle::new(&mut f, 16);
        let view = PublicView { set: &set, params: &params };
        let err = ConsistencySearch::new(4.0).choose_challenge(&mut oracle, &view, &mut seed::rng(0));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
