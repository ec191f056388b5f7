//! The adversarial challenge game and its Monte-Carlo wrapper.
//!
//! One game: sample nothing, build the filter on `S`, hand the adversary an
//! oracle limited to `t` queries plus the public view (`S` and the
//! parameters), collect its challenge `x*` and ask the filter once more,
//! through the same query interface. The adversary wins iff `x*` is not in
//! `S`, was never queried, and the filter answers `true`.

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adversary::{Adversary, AdversaryFactory};
use crate::error::{Error, Result};
use crate::filter::{Filter, FilterFactory, MembershipView, QueryCost, RepresentationSpace};
use crate::params::{Element, ElementSet, FilterParams};
use crate::seed::{self, stream};

/// What the adversary may look at besides the oracle.
#[derive(Debug, Clone, Copy)]
pub struct PublicView<'a> {
    pub set: &'a ElementSet,
    pub params: &'a FilterParams,
}

/// Budgeted query access to a filter. Every answer is logged.
pub struct Oracle<'a> {
    filter: &'a mut dyn Filter,
    budget: usize,
    log: Vec<(Element, bool)>,
    overrun: bool,
}

impl<'a> Oracle<'a> {
    pub fn new(filter: &'a mut dyn Filter, budget: usize) -> Self {
        Self { filter, budget, log: Vec::new(), overrun: false }
    }

    pub fn query(&mut self, x: Element) -> Result<bool> {
        if self.log.len() >= self.budget {
            self.overrun = true;
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let y = self.filter.query(x);
        self.log.push((x, y));
        Ok(y)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.log.len()
    }

    pub fn history(&self) -> &[(Element, bool)] {
        &self.log
    }

    pub fn published(&self) -> Option<&dyn MembershipView> {
        self.filter.published()
    }

    pub fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        self.filter.representation_space()
    }

    pub fn overran(&self) -> bool {
        self.overrun
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRecord {
    pub game: u64,
    pub set: u64,
    pub build: u64,
    pub adversary: u64,
}

impl SeedRecord {
    pub fn derive(game: u64) -> Self {
        Self {
            game,
            set: seed::split(game, stream::SET),
            build: seed::split(game, stream::BUILD),
            adversary: seed::split(game, stream::ADVERSARY),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTranscript {
    pub budget: usize,
    pub queries: Vec<(Element, bool)>,
    pub challenge: Element,
    /// Answer to the final verification query on `challenge`.
    pub challenge_response: bool,
    pub success: bool,
    /// False when the adversary broke protocol.
    pub valid: bool,
    pub seed_record: SeedRecord,
    pub cost: Option<QueryCost>,
}

impl GameTranscript {
    /// Recomputes the outcome from the transcript and the set alone.
    pub fn recompute_success(&self, set: &ElementSet) -> bool {
        self.valid
            && self.queries.len() <= self.budget
            && !set.contains(self.challenge)
            && !self.queries.iter().any(|&(q, _)| q == self.challenge)
            && self.challenge_response
    }
}

/// Plays one game. The set is supplied by the caller; the build and the
/// adversary draw from streams derived from `rng_seed`.
pub fn run_challenge(
    filter_factory: &dyn FilterFactory,
    adversary: &mut dyn Adversary,
    set: &ElementSet,
    params: &FilterParams,
    rng_seed: u64,
) -> Result<GameTranscript> {
    params.validate()?;
    if set.len() != params.n {
        return Err(Error::InvalidParams(format!("|S| = {} but n = {}", set.len(), params.n)));
    }
    let seeds = SeedRecord::derive(rng_seed);
    let mut filter = filter_factory.build_boxed(set, params, seeds.build)?;
    let view = PublicView { set, params };
    let mut adv_rng: ChaCha8Rng = seed::rng(seeds.adversary);

    let mut oracle = Oracle::new(filter.as_mut(), params.t);
    let chosen = adversary.choose_challenge(&mut oracle, &view, &mut adv_rng);
    let overran = oracle.overran();
    let queries = std::mem::take(&mut oracle.log);

    let challenge = match chosen {
        Ok(x) if !overran => params.universe().check(x)?,
        Ok(x) => x,
        Err(Error::BudgetExceeded { .. }) => Element(0),
        Err(e) => return Err(e),
    };

    if overran {
        let transcript = GameTranscript {
            budget: params.t,
            queries,
            challenge,
            challenge_response: false,
            success: false,
            valid: false,
            seed_record: seeds,
            cost: filter.query_cost(),
        };
        return Err(Error::ProtocolViolation(Box::new(transcript)));
    }

    // Verified exactly once, through the same (possibly mutating) interface.
    let challenge_response = filter.query(challenge);
    let mut transcript = GameTranscript {
        budget: params.t,
        queries,
        challenge,
        challenge_response,
        success: false,
        valid: true,
        seed_record: seeds,
        cost: filter.query_cost(),
    };
    transcript.success = transcript.recompute_success(set);
    Ok(transcript)
}

/// A complete game setup: filter, adversary and parameters.
#[derive(Clone, Copy)]
pub struct GameConfig<'a> {
    pub filter: &'a dyn FilterFactory,
    pub adversary: &'a dyn AdversaryFactory,
    pub params: FilterParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    /// Games dropped because the adversary broke protocol.
    pub invalid: usize,
    pub rate: f64,
    /// 95% normal-approximation half width.
    pub half_width: f64,
    /// Summed over all valid games.
    pub cost: Option<QueryCost>,
}

impl SuccessEstimate {
    pub fn upper(&self) -> f64 {
        self.rate + self.half_width
    }

    pub fn mean_bit_comparisons(&self) -> Option<f64> {
        self.cost
            .filter(|c| c.queries > 0)
            .map(|c| c.bit_comparisons as f64 / c.queries as f64)
    }
}

/// Normal-approximation 95% half width for a binomial proportion.
pub fn ci_half_width(rate: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    1.96 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// Plays one game for trial `i`, seed `split(master, i)`, with a fresh set.
pub fn run_trial(config: &GameConfig<'_>, master_seed: u64, trial: u64) -> Result<GameTranscript> {
    let game_seed = seed::split(master_seed, trial);
    let seeds = SeedRecord::derive(game_seed);
    let set = ElementSet::sample(config.params.n, config.params.universe(), &mut seed::rng(seeds.set))?;
    let mut adversary = config.adversary.create();
    run_challenge(config.filter, adversary.as_mut(), &set, &config.params, game_seed)
}

/// Runs `trials` independent games. Trial `i` uses `split(rng_seed, i)`, so
/// results do not depend on `parallel`. Protocol violations are counted as
/// invalid games and excluded from the rate; other errors abort.
pub fn estimate_success_rate(
    config: &GameConfig<'_>,
    trials: usize,
    rng_seed: u64,
    parallel: usize,
) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be ≥ 1".into()));
    }
    let run = |i: usize| run_trial(config, rng_seed, i as u64);
    let outcomes: Vec<Result<GameTranscript>> = if parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?;
        pool.install(|| (0..trials).into_par_iter().map(run).collect())
    } else {
        (0..trials).map(run).collect()
    };

    let mut successes = 0;
    let mut invalid = 0;
    let mut cost: Option<QueryCost> = None;
    for outcome in outcomes {
        match outcome {
            Ok(t) => {
                successes += t.success as usize;
                if let Some(c) = t.cost {
                    let acc = cost.get_or_insert_with(QueryCost::default);
                    acc.queries += c.queries;
                    acc.bit_comparisons += c.bit_comparisons;
                }
            }
            Err(Error::ProtocolViolation(_)) => invalid += 1,
            Err(e) => return Err(e),
        }
    }
    let valid = trials - invalid;
    let rate = if valid == 0 { 0.0 } else { successes as f64 / valid as f64 };
    Ok(SuccessEstimate {
        trials,
        successes,
        invalid,
        rate,
        half_width: ci_half_width(rate, valid),
        cost,
    })
}

/// Elements already used by the game: members plus queried points.
pub fn used_elements(set: &ElementSet, history: &[(Element, bool)]) -> HashSet<Element> {
    set.iter().chain(history.iter().map(|&(x, _)| x)).collect()
}
