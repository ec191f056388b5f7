//! The acceptance suite: every check the library is expected to pass, each
//! at a fixed scale with a fixed seed so any single run can be replayed.

use std::fmt;

use rand::seq::SliceRandom;

use crate::adversary::{mu_estimate, Strategy};
use crate::bloom::{BloomBuilder, BloomFilter, Exposure};
use crate::cuckoo::{CuckooBuilder, CuckooFilter, Fault};
use crate::error::Result;
use crate::filter::{serialized_bits, ExactSetBuilder, Filter, FilterBuilder, FilterFactory};
use crate::game::{estimate_success_rate, GameConfig};
use crate::gf::BinaryField;
use crate::hash_family::GFamily;
use crate::params::{minimal_error, Element, ElementSet, FilterParams, Universe};
use crate::perm::PermKey;
use crate::seed;
use crate::shield::ShieldBuilder;

pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_2008;

/// Multiplier for the learning attack at toy scale. The original constant
/// of 200 asks for 51200 queries, which exhausts a universe of 1024
/// elements and leaves no fresh challenge to name.
pub const TOY_ATTACK_C: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    AtMost(f64),
    AtLeast(f64),
    Between(f64, f64),
    Exactly(f64),
}

impl Relation {
    pub fn holds(self, x: f64) -> bool {
        match self {
            Relation::AtMost(b) => x <= b,
            Relation::AtLeast(b) => x >= b,
            Relation::Between(lo, hi) => lo <= x && x <= hi,
            Relation::Exactly(b) => x == b,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::AtMost(b) => write!(f, "<= {b:.6}"),
            Relation::AtLeast(b) => write!(f, ">= {b:.6}"),
            Relation::Between(lo, hi) => write!(f, "in [{lo:.6}, {hi:.6}]"),
            Relation::Exactly(b) => write!(f, "== {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: Relation,
    pub passed: bool,
    /// Seed the criterion ran under; pass it back to [`run_criterion`] with
    /// the same master seed to replay.
    pub seed: u64,
    pub detail: String,
}

impl CriterionReport {
    fn new(spec: &Criterion, seed: u64, measured: f64, threshold: Relation, detail: String) -> Self {
        Self {
            id: spec.id,
            name: spec.name,
            measured,
            threshold,
            passed: threshold.holds(measured),
            seed,
            detail,
        }
    }

    /// Forces a failure when a side condition does not hold.
    fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.passed = false;
            self.detail = format!("{}; {why}", self.detail);
        }
        self
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>3}] {}: measured {:.6} (want {}) seed {:#018x} | {}",
            self.status(),
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.seed,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub master_seed: u64,
    pub parallel: usize,
    /// Applied to every cuckoo filter the suite builds.
    pub fault: Fault,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { master_seed: DEFAULT_MASTER_SEED, parallel: 1, fault: Fault::None }
    }
}

impl SuiteConfig {
    fn seed_for(&self, c: &Criterion) -> u64 {
        seed::split(self.master_seed, c.stream)
    }

    fn cuckoo(&self) -> CuckooBuilder {
        CuckooBuilder::adaptive().with_fault(self.fault)
    }
}

type CriterionFn = fn(&Criterion, &SuiteConfig, u64) -> Result<CriterionReport>;

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    /// Part of the mandatory set, as opposed to a supplementary diagnostic.
    pub primary: bool,
    stream: u64,
    run: CriterionFn,
}

impl fmt::Debug for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Criterion").field("id", &self.id).field("name", &self.name).finish()
    }
}

pub static CRITERIA: [Criterion; 12] = [
    Criterion { id: "1", name: "completeness", primary: true, stream: 1, run: completeness },
    Criterion { id: "2", name: "baseline calibration", primary: true, stream: 2, run: baseline_calibration },
    Criterion { id: "3", name: "steady filters are not resilient", primary: true, stream: 3, run: steady_attack },
    Criterion { id: "4", name: "permutation shield efficacy", primary: true, stream: 4, run: shield_efficacy },
    Criterion { id: "5", name: "cuckoo resilience", primary: true, stream: 5, run: cuckoo_resilience },
    Criterion { id: "6", name: "memory bound", primary: true, stream: 6, run: memory_bound },
    Criterion { id: "7", name: "comparison telemetry", primary: true, stream: 7, run: comparison_telemetry },
    Criterion { id: "7b", name: "per-function load", primary: false, stream: 12, run: function_load },
    Criterion { id: "8", name: "exact pairwise independence", primary: true, stream: 8, run: exact_independence },
    Criterion { id: "9", name: "permutation bijectivity", primary: true, stream: 9, run: bijectivity },
    Criterion { id: "10", name: "random-query model", primary: true, stream: 10, run: random_query_model },
    Criterion { id: "11", name: "positive-mass statistics", primary: true, stream: 11, run: mu_statistics },
];

pub fn find(id: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Runs one criterion under `config`.
pub fn run_criterion(criterion: &Criterion, config: &SuiteConfig) -> Result<CriterionReport> {
    let seed = config.seed_for(criterion);
    (criterion.run)(criterion, config, seed)
}

/// Like [`run_criterion`], but an error becomes a failed report.
pub fn run_or_report(criterion: &Criterion, config: &SuiteConfig) -> CriterionReport {
    run_criterion(criterion, config).unwrap_or_else(|e| CriterionReport {
        id: criterion.id,
        name: criterion.name,
        measured: f64::NAN,
        threshold: Relation::Exactly(0.0),
        passed: false,
        seed: config.seed_for(criterion),
        detail: format!("error: {e}"),
    })
}

/// Runs every criterion in order.
pub fn run_all(config: &SuiteConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| run_or_report(c, config)).collect()
}

fn eps6() -> f64 {
    2f64.powi(-6)
}

fn production_params() -> Result<FilterParams> {
    FilterParams::new(1024, eps6(), 4096)
}

fn toy_params(t: usize) -> Result<FilterParams> {
    FilterParams::new(4, 1.0 / 16.0, t)?.with_u_bits(10)
}

/// Uniform element outside the set.
fn non_member(set: &ElementSet, rng: &mut rand_chacha::ChaCha8Rng) -> Element {
    loop {
        let x = set.universe().sample(rng);
        if !set.contains(x) {
            return x;
        }
    }
}

const COMPLETENESS_BUILDS: usize = 1000;
const COMPLETENESS_N: usize = 100;

fn completeness(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let params = FilterParams::new(COMPLETENESS_N, eps6(), 400)?;
    let factories: Vec<Box<dyn FilterFactory>> = vec![
        Box::new(BloomBuilder::standard()),
        Box::new(ShieldBuilder::new(BloomBuilder::standard())),
        Box::new(cfg.cuckoo()),
        Box::new(CuckooBuilder::random_query().with_fault(cfg.fault)),
        Box::new(ShieldBuilder::new(cfg.cuckoo())),
        Box::new(ExactSetBuilder),
    ];
    let mut misses = 0u64;
    let mut lookups = 0u64;
    for (fi, factory) in factories.iter().enumerate() {
        let fseed = seed::split(seed, fi as u64);
        for b in 0..COMPLETENESS_BUILDS as u64 {
            let bseed = seed::split(fseed, b);
            let mut rng = seed::rng(bseed);
            let set = ElementSet::sample(params.n, params.universe(), &mut rng)?;
            let mut filter = factory.build_boxed(&set, &params, seed::split(bseed, 1))?;
            // Members in random order, a fresh negative after each one.
            let mut members: Vec<Element> = set.iter().collect();
            members.shuffle(&mut rng);
            for x in members {
                misses += !filter.query(x) as u64;
                filter.query(non_member(&set, &mut rng));
                lookups += 1;
            }
            misses += set.iter().filter(|&x| !filter.query(x)).count() as u64;
            lookups += set.len() as u64;
        }
    }
    let detail = format!(
        "{} filter types x {COMPLETENESS_BUILDS} builds, n = {COMPLETENESS_N}, {lookups} member lookups",
        factories.len()
    );
    Ok(CriterionReport::new(c, seed, misses as f64, Relation::Exactly(0.0), detail))
}

const CALIBRATION_QUERIES: usize = 100_000;

fn baseline_calibration(c: &Criterion, _cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let eps = eps6();
    let params = FilterParams::new(1000, eps, 1)?;
    let mut rng = seed::rng(seed);
    let set = ElementSet::sample(params.n, params.universe(), &mut rng)?;
    let builder = BloomBuilder::standard();
    let mut filter = builder.build(&set, &params, seed::split(seed, 1))?;
    let hits = (0..CALIBRATION_QUERIES).filter(|_| filter.query(non_member(&set, &mut rng))).count();
    let rate = hits as f64 / CALIBRATION_QUERIES as f64;
    let detail = format!("m = {}, k_h = {}, {CALIBRATION_QUERIES} non-members", filter.m(), filter.hash_count());
    Ok(CriterionReport::new(c, seed, rate, Relation::Between(eps / 2.0, 2.0 * eps), detail))
}

const STEADY_ATTACK_GAMES: usize = 100;

fn steady_attack(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let t = crate::adversary::ConsistencySearch::query_count(TOY_ATTACK_C, 16, 4)?;
    let params = toy_params(t)?;
    let filter = BloomBuilder::with_bits(16).exposure(Exposure::SeedsPublished);
    let adversary = Strategy::ConsistencySearch { c: TOY_ATTACK_C, lenient: false };
    let config = GameConfig { filter: &filter, adversary: &adversary, params };
    let est = estimate_success_rate(&config, STEADY_ATTACK_GAMES, seed, cfg.parallel)?;
    let detail = format!(
        "u = 2^10, n = 4, m = 16, eps0 = {}, c = {TOY_ATTACK_C}, t = {t}, {} games ({} invalid), 95% ci +/- {:.4}",
        minimal_error(16, 4)?,
        est.trials,
        est.invalid,
        est.half_width
    );
    Ok(CriterionReport::new(c, seed, est.rate, Relation::AtLeast(2.0 / 3.0), detail).require(est.invalid == 0, "invalid games"))
}

const SHIELD_GAMES: usize = 1000;

fn shield_efficacy(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    // Toy scale: the learning attack, blind to the key.
    let toy_eps = BloomFilter::expected_fp_rate(16, 3, 4);
    let t = crate::adversary::ConsistencySearch::query_count(TOY_ATTACK_C, 16, 4)?;
    let toy = toy_params(t)?;
    let toy_filter = ShieldBuilder::new(BloomBuilder::with_bits(16).exposure(Exposure::SeedsPublished));
    let learner = Strategy::ConsistencySearch { c: TOY_ATTACK_C, lenient: true };
    let toy_est = estimate_success_rate(
        &GameConfig { filter: &toy_filter, adversary: &learner, params: toy },
        SHIELD_GAMES,
        seed::split(seed, 0),
        cfg.parallel,
    )?;

    // Production scale: the inner filter is published in full, the key is not.
    let eps = eps6();
    let prod = FilterParams::new(1000, eps, 1)?;
    let prod_filter = ShieldBuilder::new(BloomBuilder::standard().exposure(Exposure::Full));
    let white_box = Strategy::SeedExposed { max_candidates: crate::adversary::DEFAULT_MAX_CANDIDATES };
    let prod_est = estimate_success_rate(
        &GameConfig { filter: &prod_filter, adversary: &white_box, params: prod },
        SHIELD_GAMES,
        seed::split(seed, 1),
        cfg.parallel,
    )?;

    // Overhead of the key, at both scales.
    let mut overheads = Vec::new();
    for (params, builder) in [(toy, BloomBuilder::with_bits(16)), (prod, BloomBuilder::standard())] {
        let set = ElementSet::sample(params.n, params.universe(), &mut seed::rng(seed::split(seed, 2)))?;
        let bare = builder.build(&set, &params, 3)?;
        let shielded = ShieldBuilder::new(builder).build(&set, &params, 3)?;
        overheads.push(shielded.bits() as i64 - bare.bits() as i64);
        overheads.push(serialized_bits(&shielded) as i64 - serialized_bits(&bare) as i64);
    }
    let overhead_ok = overheads.iter().all(|&o| o == 128);

    // Each scale is judged against its own false-positive rate; report the
    // larger excess over that rate.
    let toy_excess = toy_est.rate - toy_eps;
    let prod_excess = prod_est.rate - eps;
    let detail = format!(
        "toy learner {:.4} vs eps {toy_eps:.4}; white-box {:.4} vs eps {eps:.4}; key overhead {overheads:?} bits",
        toy_est.rate, prod_est.rate
    );
    Ok(CriterionReport::new(c, seed, toy_excess.max(prod_excess), Relation::AtMost(0.05), detail)
        .require(overhead_ok, "key overhead is not 128 bits")
        .require(toy_est.invalid == 0 && prod_est.invalid == 0, "invalid games"))
}

const RESILIENCE_GAMES: usize = 1000;

fn cuckoo_resilience(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let params = production_params()?;
    let filter = cfg.cuckoo();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (i, adversary) in [Strategy::RandomProbe, Strategy::FpNeighborhood].iter().enumerate() {
        let est = estimate_success_rate(
            &GameConfig { filter: &filter, adversary, params },
            RESILIENCE_GAMES,
            seed::split(seed, i as u64),
            cfg.parallel,
        )?;
        if est.invalid > 0 {
            return Ok(CriterionReport::new(c, seed, f64::NAN, Relation::AtMost(params.eps + 0.02), "invalid games".into())
                .require(false, "adversary broke protocol"));
        }
        worst = worst.max(est.rate);
        parts.push(format!("{} {:.4} (+/- {:.4})", crate::adversary::AdversaryFactory::name(adversary), est.rate, est.half_width));
    }
    let detail = format!("n = 1024, eps = 2^-6, t = 4096, {RESILIENCE_GAMES} games each: {}", parts.join(", "));
    Ok(CriterionReport::new(c, seed, worst, Relation::AtMost(params.eps + 0.02), detail))
}

/// Constant allowed in front of `n log(1/eps) + t w`.
pub const MEMORY_CONSTANT: f64 = 8.0;

fn memory_bound(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let params = production_params()?;
    let set = ElementSet::sample(params.n, params.universe(), &mut seed::rng(seed))?;
    let filter = cfg.cuckoo().build(&set, &params, seed::split(seed, 1))?;
    let bits = filter.bits();
    let w = filter.family().field_width() as f64;
    let base = params.n as f64 * params.log_inv_eps() as f64 + params.t as f64 * w;
    let ratio = bits as f64 / base;
    let detail = format!(
        "{bits} bits (G alone {}) over n log(1/eps) + t w = {base} with w = {w}; \
         the polynomial family costs k w bits per function, a factor w above a k-bit family",
        filter.family().rep_bits()
    );
    Ok(CriterionReport::new(c, seed, ratio, Relation::AtMost(MEMORY_CONSTANT), detail)
        .require(serialized_bits(&filter) == bits, "serialized size differs from bit formula"))
}

const TELEMETRY_QUERIES: usize = 100_000;

fn comparison_telemetry(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let params = production_params()?;
    let mut rng = seed::rng(seed);
    let set = ElementSet::sample(params.n, params.universe(), &mut rng)?;
    let mut filter = cfg.cuckoo().build(&set, &params, seed::split(seed, 1))?;
    filter.reset_telemetry();
    for _ in 0..TELEMETRY_QUERIES {
        filter.query(non_member(&set, &mut rng));
    }
    let mean = filter.telemetry().mean_bit_comparisons();
    let detail = format!("{TELEMETRY_QUERIES} uniform negative lookups at n = 1024, eps = 2^-6, fault {:?}", cfg.fault);
    Ok(CriterionReport::new(c, seed, mean, Relation::AtMost(4.5), detail))
}

const LOAD_GAMES: usize = 200;

/// Every `g_j` must see at most `k` distinct query points for its
/// `k`-wise independence to cover the whole game. Counts, per game of
/// `t` uniform lookups, the largest number of lookups any single function
/// took part in.
fn function_load(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let params = production_params()?;
    let k = params.k() as u64;
    let mut within = 0usize;
    let mut peak = 0u64;
    for g in 0..LOAD_GAMES as u64 {
        let gseed = seed::split(seed, g);
        let mut rng = seed::rng(gseed);
        let set = ElementSet::sample(params.n, params.universe(), &mut rng)?;
        let mut filter: CuckooFilter = cfg.cuckoo().build(&set, &params, seed::split(gseed, 1))?;
        for _ in 0..params.t {
            filter.query(non_member(&set, &mut rng));
        }
        let load = filter.telemetry().max_participation();
        peak = peak.max(load);
        within += (load <= k) as usize;
    }
    let frac = within as f64 / LOAD_GAMES as f64;
    let detail = format!("{LOAD_GAMES} games of t = {} lookups, k = {k}, peak load {peak}, fault {:?}", params.t, cfg.fault);
    Ok(CriterionReport::new(c, seed, frac, Relation::AtLeast(1.0 - params.eps / 2.0), detail))
}

fn exact_independence(c: &Criterion, _cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    const W: u32 = 4;
    const ELL: usize = 2;
    const K: usize = 2;
    let field = BinaryField::new(W)?;
    let points = 1usize << W;
    let coeff_count = ELL * K;
    let families = 1usize << (W as usize * coeff_count);
    // counts[a][b][outcome], outcome packs (g0(a), g0(b), g1(a), g1(b)).
    let mut counts = vec![[0u64; 16]; points * points];
    let mut table = vec![0u8; points];
    for code in 0..families {
        let coeffs = (0..coeff_count).map(|i| (code >> (W as usize * i) & 0xF) as u64).collect();
        let g = GFamily::from_coefficients(ELL, K, field.width(), coeffs)?;
        for (x, slot) in table.iter_mut().enumerate() {
            *slot = (g.eval_bit(0, Element(x as u64)) as u8) | (g.eval_bit(1, Element(x as u64)) as u8) << 1;
        }
        for a in 0..points {
            for b in 0..points {
                if a != b {
                    let o = (table[a] & 1) | (table[b] & 1) << 1 | (table[a] >> 1) << 2 | (table[b] >> 1) << 3;
                    counts[a * points + b][o as usize] += 1;
                }
            }
        }
    }
    let expected = (families / 16) as i64;
    let deviation = (0..points * points)
        .filter(|i| i / points != i % points)
        .flat_map(|i| counts[i].iter().map(|&n| (n as i64 - expected).abs()))
        .max()
        .unwrap_or(0);
    let detail = format!("GF(2^4), k = 2, ell = 2: {families} families, {} ordered pairs, {expected} expected per outcome", points * (points - 1));
    Ok(CriterionReport::new(c, seed, deviation as f64, Relation::Exactly(0.0), detail))
}

const BIJECTIVITY_KEYS: u64 = 8;

fn bijectivity(c: &Criterion, _cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let mut defects = 0u64;
    for (d, domain) in [256u64, 1024, 1000].into_iter().enumerate() {
        for i in 0..BIJECTIVITY_KEYS {
            let key = PermKey::generate(128, domain as u128, &mut seed::rng(seed::split(seed, d as u64 * 64 + i)))?;
            let mut seen = vec![false; domain as usize];
            for x in 0..domain {
                let y = key.permute(Element(x))?;
                if y.0 >= domain || std::mem::replace(&mut seen[y.0 as usize], true) {
                    defects += 1;
                }
                if key.invert(y)? != Element(x) {
                    defects += 1;
                }
            }
            defects += seen.iter().filter(|s| !**s).count() as u64;
        }
    }
    let detail = format!("{BIJECTIVITY_KEYS} keys on each of the domains 2^8, 2^10 and 1000 (cycle walking)");
    Ok(CriterionReport::new(c, seed, defects as f64, Relation::Exactly(0.0), detail))
}

const RANDOM_QUERY_GAMES: usize = 1000;

fn random_query_model(c: &Criterion, cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let eps = 1.0 / 16.0;
    let params = FilterParams::new(256, eps, (256.0 / eps) as usize)?;
    let filter = CuckooBuilder::random_query().with_fault(cfg.fault);
    let adversary = Strategy::RandomProbe;
    let est = estimate_success_rate(&GameConfig { filter: &filter, adversary: &adversary, params }, RANDOM_QUERY_GAMES, seed, cfg.parallel)?;
    let detail = format!(
        "n = 256, eps = 2^-4, t = {}, ell = {}, k = {}, {} games, 95% ci +/- {:.4}",
        params.t,
        crate::cuckoo::Variant::RandomQuery.ell(&params),
        crate::cuckoo::Variant::RandomQuery.k(&params),
        est.trials,
        est.half_width
    );
    Ok(CriterionReport::new(c, seed, est.rate, Relation::AtMost(eps + 0.02), detail).require(est.invalid == 0, "invalid games"))
}

const MU_BUILDS: usize = 1000;

fn mu_statistics(c: &Criterion, _cfg: &SuiteConfig, seed: u64) -> Result<CriterionReport> {
    let universe = Universe::new(10)?;
    let eps0 = minimal_error(16, 4)?;
    let mut below = 0usize;
    let mut lowest = f64::INFINITY;
    for b in 0..MU_BUILDS as u64 {
        let bseed = seed::split(seed, b);
        let set = ElementSet::sample(4, universe, &mut seed::rng(bseed))?;
        let filter = BloomFilter::build(&set, 16, seed::split(bseed, 1))?;
        let mu = mu_estimate(&filter, universe, 0, &mut seed::rng(0));
        lowest = lowest.min(mu);
        below += (mu < eps0 / 8.0) as usize;
    }
    let frac = below as f64 / MU_BUILDS as f64;
    let detail = format!("{MU_BUILDS} toy builds, exhaustive over 2^10, threshold eps0/8 = {}, lowest mu {lowest:.5}", eps0 / 8.0);
    Ok(CriterionReport::new(c, seed, frac, Relation::AtMost(0.01), detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Relation::AtMost(1.0).holds(1.0));
        assert!(!Relation::AtMost(1.0).holds(1.5));
        assert!(Relation::AtLeast(0.5).holds(0.7));
        assert!(Relation::Between(1.0, 2.0).holds(1.5));
        assert!(!Relation::Between(1.0, 2.0).holds(2.5));
        assert!(Relation::Exactly(0.0).holds(0.0));
        assert!(!Relation::AtMost(1.0).holds(f64::NAN));
    }

    #[test]
    fn ids_are_unique_and_streams_distinct() {
        let mut ids: Vec<_> = CRITERIA.iter().map(|c| c.id).collect();
        let mut streams: Vec<_> = CRITERIA.iter().map(|c| c.stream).collect();
        ids.sort();
        ids.dedup();
        streams.sort();
        streams.dedup();
        assert_eq!(ids.len(), CRITERIA.len());
        assert_eq!(streams.len(), CRITERIA.len());
        assert_eq!(CRITERIA.iter().filter(|c| c.primary).count(), 11);
    }

    #[test]
    fn fast_criteria_pass() {
        let cfg = SuiteConfig::default();
        for id in ["8", "9", "11"] {
            let r = run_criterion(find(id).unwrap(), &cfg).unwrap();
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn failing_side_condition_fails_report() {
        let c = find("9").unwrap();
        let r = CriterionReport::new(c, 0, 0.0, Relation::Exactly(0.0), "x".into()).require(false, "broken");
        assert!(!r.passed);
        assert!(r.detail.ends_with("broken"));
    }
}
