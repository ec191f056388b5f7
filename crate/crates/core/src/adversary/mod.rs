//! Attack strategies for the challenge game.
//!
//! Every adversary is a deterministic function of its RNG stream, the
//! oracle's answers, the set `S` and the public parameters. None of them ever
//! sees a representation unless the filter was built in a mode that
//! publishes it.

mod consistency;
mod estimators;
mod neighborhood;
mod random_probe;
mod seed_exposed;

use std::collections::HashSet;

use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;

pub use consistency::ConsistencySearch;
pub use estimators::{err_estimate, mu_estimate, EXHAUSTIVE_LIMIT_BITS};
pub use neighborhood::FpNeighborhood;
pub use random_probe::RandomProbe;
pub use seed_exposed::{SeedExposed, DEFAULT_MAX_CANDIDATES};

use crate::error::{Error, Result};
use crate::game::{Oracle, PublicView};
use crate::params::{Element, Universe};

pub trait Adversary: Send {
    fn name(&self) -> &str;

    /// Interacts with the oracle and names the challenge element `x*`.
    fn choose_challenge(
        &mut self,
        oracle: &mut Oracle<'_>,
        view: &PublicView<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Element>;
}

/// Creates a fresh adversary for every game.
pub trait AdversaryFactory: Send + Sync {
    fn name(&self) -> String;

    fn create(&self) -> Box<dyn Adversary>;
}

/// The shipped strategies, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    RandomProbe,
    SeedExposed { max_candidates: usize },
    ConsistencySearch { c: f64, lenient: bool },
    FpNeighborhood,
}

pub const STRATEGY_NAMES: [&str; 4] = ["random_probe", "seed_exposed", "consistency_search", "fp_neighborhood"];

impl Strategy {
    /// Looks up a strategy by its identifier, with default options.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "random_probe" => Some(Strategy::RandomProbe),
            "seed_exposed" => Some(Strategy::SeedExposed { max_candidates: DEFAULT_MAX_CANDIDATES }),
            "consistency_search" => Some(Strategy::ConsistencySearch { c: consistency::DEFAULT_C, lenient: false }),
            "fp_neighborhood" => Some(Strategy::FpNeighborhood),
            _ => None,
        }
    }
}

impl AdversaryFactory for Strategy {
    fn name(&self) -> String {
        match self {
            Strategy::RandomProbe => "random_probe",
            Strategy::SeedExposed { .. } => "seed_exposed",
            Strategy::ConsistencySearch { .. } => "consistency_search",
            Strategy::FpNeighborhood => "fp_neighborhood",
        }
        .into()
    }

    fn create(&self) -> Box<dyn Adversary> {
        match *self {
            Strategy::RandomProbe => Box::new(RandomProbe),
            Strategy::SeedExposed { max_candidates } => Box::new(SeedExposed { max_candidates }),
            Strategy::ConsistencySearch { c, lenient } => Box::new(ConsistencySearch::new(c).lenient(lenient)),
            Strategy::FpNeighborhood => Box::new(FpNeighborhood),
        }
    }
}

/// Uniform element outside `used`.
pub(crate) fn fresh_element(universe: Universe, used: &HashSet<Element>, rng: &mut ChaCha8Rng) -> Result<Element> {
    let size = universe.size();
    if used.len() as u128 >= size {
        return Err(Error::UniverseExhausted("every element is a member or was queried".into()));
    }
    // Dense case: pick from the explicit complement.
    if universe.bits() <= 20 && used.len() as u128 * 2 > size {
        return Ok(universe.iter().filter(|x| !used.contains(x)).choose(rng).expect("complement is non-empty"));
    }
    loop {
        let x = universe.sample(rng);
        if !used.contains(&x) {
            return Ok(x);
        }
    }
}
