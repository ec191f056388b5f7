//! Experiment configuration files.
//!
//! A file describes one experiment with top-level keys, or several with
//! `[[experiment]]` tables. Top-level keys then act as defaults for every
//! table. `seed` is top-level only.
//!
//! ```toml
//! seed = 7
//! filter = "baseline_bloom"
//! adversary = "random_probe"
//! n = 1000
//! eps = 0.015625
//! t = 1000
//! trials = 100000
//!
//! [filter_options]
//! bits = 16
//! exposure = "seeds"
//!
//! [adversary_options]
//! c = 4.0
//! lenient = true
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use resilient_filters::adversary::{Strategy, DEFAULT_MAX_CANDIDATES, STRATEGY_NAMES};
use resilient_filters::bloom::{BloomBuilder, Exposure};
use resilient_filters::cuckoo::{CuckooBuilder, Fault};
use resilient_filters::filter::ExactSetBuilder;
use resilient_filters::shield::ShieldBuilder;
use resilient_filters::{FilterFactory, FilterParams};

pub const FILTER_NAMES: [&str; 4] = ["baseline_bloom", "cuckoo_resilient", "cuckoo_random_query", "exact_set"];
const SHIELD_PREFIX: &str = "shielded_";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.file, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterOptions {
    bits: Option<Spanned<usize>>,
    exposure: Option<Spanned<String>>,
    exposed: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdversaryOptions {
    c: Option<Spanned<f64>>,
    lenient: Option<bool>,
    max_candidates: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    filter: Option<Spanned<String>>,
    adversary: Option<Spanned<String>>,
    n: Option<Spanned<usize>>,
    eps: Option<Spanned<f64>>,
    t: Option<Spanned<usize>>,
    trials: Option<Spanned<usize>>,
    u_bits: Option<Spanned<u32>>,
    lambda: Option<Spanned<u32>>,
    filter_options: Option<FilterOptions>,
    adversary_options: Option<AdversaryOptions>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    seed: Option<u64>,
    filter: Option<Spanned<String>>,
    adversary: Option<Spanned<String>>,
    n: Option<Spanned<usize>>,
    eps: Option<Spanned<f64>>,
    t: Option<Spanned<usize>>,
    trials: Option<Spanned<usize>>,
    u_bits: Option<Spanned<u32>>,
    lambda: Option<Spanned<u32>>,
    filter_options: Option<FilterOptions>,
    adversary_options: Option<AdversaryOptions>,
    #[serde(default)]
    experiment: Vec<Spanned<RawExperiment>>,
}

impl RawFile {
    fn defaults(&self) -> RawExperiment {
        RawExperiment {
            filter: self.filter.clone(),
            adversary: self.adversary.clone(),
            n: self.n.clone(),
            eps: self.eps.clone(),
            t: self.t.clone(),
            trials: self.trials.clone(),
            u_bits: self.u_bits.clone(),
            lambda: self.lambda.clone(),
            filter_options: self.filter_options.clone(),
            adversary_options: self.adversary_options.clone(),
        }
    }
}

impl RawExperiment {
    fn or(self, base: &RawExperiment) -> RawExperiment {
        RawExperiment {
            filter: self.filter.or_else(|| base.filter.clone()),
            adversary: self.adversary.or_else(|| base.adversary.clone()),
            n: self.n.or_else(|| base.n.clone()),
            eps: self.eps.or_else(|| base.eps.clone()),
            t: self.t.or_else(|| base.t.clone()),
            trials: self.trials.or_else(|| base.trials.clone()),
            u_bits: self.u_bits.or_else(|| base.u_bits.clone()),
            lambda: self.lambda.or_else(|| base.lambda.clone()),
            filter_options: self.filter_options.or_else(|| base.filter_options.clone()),
            adversary_options: self.adversary_options.or_else(|| base.adversary_options.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseFilter {
    Bloom { bits: Option<usize>, exposure: Exposure },
    Cuckoo(CuckooBuilder),
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub base: BaseFilter,
    pub shield: bool,
}

impl FilterSpec {
    pub fn factory(&self, fault: Fault) -> Box<dyn FilterFactory> {
        match (self.base, self.shield) {
            (BaseFilter::Bloom { bits, exposure }, shield) => {
                let b = match bits {
                    Some(m) => BloomBuilder::with_bits(m),
                    None => BloomBuilder::standard(),
                }
                .exposure(exposure);
                if shield {
                    Box::new(ShieldBuilder::new(b))
                } else {
                    Box::new(b)
                }
            }
            (BaseFilter::Cuckoo(c), false) => Box::new(c.with_fault(fault)),
            (BaseFilter::Cuckoo(c), true) => Box::new(ShieldBuilder::new(c.with_fault(fault))),
            (BaseFilter::Exact, false) => Box::new(ExactSetBuilder),
            (BaseFilter::Exact, true) => Box::new(ShieldBuilder::new(ExactSetBuilder)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub filter: FilterSpec,
    pub adversary: Strategy,
    pub params: FilterParams,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: Option<u64>,
    pub experiments: Vec<Experiment>,
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let file = path.display().to_string();
    let src = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { file: file.clone(), line: None, message: e.to_string() })?;
    parse(&src, &file)
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
    file: &'a str,
}

impl Ctx<'_> {
    fn err(&self, at: Option<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError { file: self.file.into(), line: at.map(|o| line_of(self.src, o)), message: message.into() }
    }

    fn required<'v, T>(&self, v: &'v Option<Spanned<T>>, name: &str, table: Option<usize>) -> Result<&'v Spanned<T>, ConfigError> {
        v.as_ref().ok_or_else(|| self.err(table, format!("missing key `{name}`")))
    }
}

pub fn parse(src: &str, file: &str) -> Result<Config, ConfigError> {
    let ctx = Ctx { src, file };
    let raw: RawFile = toml::from_str(src).map_err(|e| ctx.err(e.span().map(|s| s.start), e.message().trim()))?;
    let defaults = raw.defaults();
    let experiments = if raw.experiment.is_empty() {
        vec![ctx.experiment(defaults, None)?]
    } else {
        raw.experiment
            .into_iter()
            .map(|e| {
                let at = e.span().start;
                ctx.experiment(e.into_inner().or(&defaults), Some(at))
            })
            .collect::<Result<_, _>>()?
    };
    Ok(Config { seed: raw.seed, experiments })
}

impl Ctx<'_> {
    fn experiment(&self, raw: RawExperiment, table: Option<usize>) -> Result<Experiment, ConfigError> {
        let trials = self.required(&raw.trials, "trials", table)?;
        if *trials.get_ref() == 0 {
            return Err(self.err(Some(trials.span().start), "trials must be ≥ 1"));
        }
        let n = self.required(&raw.n, "n", table)?;
        let eps = self.required(&raw.eps, "eps", table)?;
        let t = self.required(&raw.t, "t", table)?;

        let mut params = FilterParams::new(*n.get_ref(), *eps.get_ref(), *t.get_ref())
            .map_err(|e| self.err(Some(n.span().start), e.to_string()))?;
        if let Some(u) = &raw.u_bits {
            params = params.with_u_bits(*u.get_ref()).map_err(|e| self.err(Some(u.span().start), e.to_string()))?;
        }
        if let Some(l) = &raw.lambda {
            params = params.with_lambda(*l.get_ref()).map_err(|e| self.err(Some(l.span().start), e.to_string()))?;
        }

        let filter = self.filter(self.required(&raw.filter, "filter", table)?, raw.filter_options.unwrap_or_default())?;
        let adversary =
            self.adversary(self.required(&raw.adversary, "adversary", table)?, raw.adversary_options.unwrap_or_default())?;
        Ok(Experiment { filter, adversary, params, trials: *trials.get_ref() })
    }

    fn filter(&self, name: &Spanned<String>, opts: FilterOptions) -> Result<FilterSpec, ConfigError> {
        let at = Some(name.span().start);
        let (shield, base_name) = match name.get_ref().strip_prefix(SHIELD_PREFIX) {
            Some(rest) => (true, rest),
            None => (false, name.get_ref().as_str()),
        };
        let exposure = match &opts.exposure {
            None => Exposure::Secret,
            Some(s) => match s.get_ref().as_str() {
                "secret" => Exposure::Secret,
                "seeds" => Exposure::SeedsPublished,
                "full" => Exposure::Full,
                other => {
                    return Err(self.err(
                        Some(s.span().start),
                        format!("unknown exposure `{other}` (expected secret, seeds or full)"),
                    ))
                }
            },
        };
        let bits = match &opts.bits {
            Some(b) if *b.get_ref() == 0 => return Err(self.err(Some(b.span().start), "bits must be ≥ 1")),
            b => b.as_ref().map(|b| *b.get_ref()),
        };
        let exposed = opts.exposed.unwrap_or(false);
        let base = match base_name {
            "baseline_bloom" => BaseFilter::Bloom { bits, exposure },
            "cuckoo_resilient" => BaseFilter::Cuckoo(CuckooBuilder::adaptive().exposed(exposed)),
            "cuckoo_random_query" => BaseFilter::Cuckoo(CuckooBuilder::random_query().exposed(exposed)),
            "exact_set" => BaseFilter::Exact,
            other => {
                return Err(self.err(
                    at,
                    format!("unknown filter `{other}` (expected one of {}, optionally prefixed with `{SHIELD_PREFIX}`)", FILTER_NAMES.join(", ")),
                ))
            }
        };
        Ok(FilterSpec { base, shield })
    }

    fn adversary(&self, name: &Spanned<String>, opts: AdversaryOptions) -> Result<Strategy, ConfigError> {
        let strategy = Strategy::from_name(name.get_ref()).ok_or_else(|| {
            self.err(
                Some(name.span().start),
                format!("unknown adversary `{}` (expected one of {})", name.get_ref(), STRATEGY_NAMES.join(", ")),
            )
        })?;
        Ok(match strategy {
            Strategy::ConsistencySearch { c, lenient } => {
                let c = match &opts.c {
                    Some(v) if v.get_ref().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) => return Err(self.err(Some(v.span().start), "c must be positive")),
                    Some(v) => *v.get_ref(),
                    None => c,
                };
                Strategy::ConsistencySearch { c, lenient: opts.lenient.unwrap_or(lenient) }
            }
            Strategy::SeedExposed { .. } => {
                Strategy::SeedExposed { max_candidates: opts.max_candidates.unwrap_or(DEFAULT_MAX_CANDIDATES) }
            }
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
filter = "baseline_bloom"
adversary = "random_probe"
n = 1000
eps = 0.015625
t = 1000
trials = 100000
seed = 7
"#;

    #[test]
    fn single_experiment() {
        let cfg = parse(BASIC, "a.toml").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.experiments.len(), 1);
        let e = &cfg.experiments[0];
        assert_eq!(e.trials, 100_000);
        assert_eq!(e.params.n, 1000);
        assert_eq!(e.adversary, Strategy::RandomProbe);
        assert_eq!(e.filter.factory(Fault::None).label(), "baseline_bloom");
    }

    #[test]
    fn zero_trials_points_at_its_line() {
        let src = BASIC.replace("trials = 100000", "trials = 0");
        let err = parse(&src, "a.toml").unwrap_err();
        assert_eq!(err.message, "trials must be ≥ 1");
        assert_eq!(err.line, Some(7));
        assert_eq!(err.to_string(), "a.toml:7: trials must be ≥ 1");
    }

    #[test]
    fn unknown_names_and_keys() {
        let err = parse(&BASIC.replace("random_probe", "psychic"), "a.toml").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("unknown adversary `psychic`"));

        let err = parse(&format!("{BASIC}colour = 1\n"), "a.toml").unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.message.contains("colour"), "{err}");
    }

    #[test]
    fn syntax_error_has_a_line() {
        let err = parse("n = 3\neps = = 1\n", "a.toml").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn missing_key() {
        let err = parse(&BASIC.replace("t = 1000\n", ""), "a.toml").unwrap_err();
        assert_eq!(err.message, "missing key `t`");
    }

    #[test]
    fn invalid_params_point_at_n() {
        let err = parse(&BASIC.replace("eps = 0.015625", "eps = 1.5"), "a.toml").unwrap_err();
        assert_eq!(err.line, Some(4));
    }

    #[test]
    fn experiment_tables_inherit_defaults() {
        let src = r#"
seed = 3
n = 4
eps = 0.0625
t = 1024
trials = 10
u_bits = 10
adversary = "consistency_search"

[[experiment]]
filter = "baseline_bloom"
filter_options = { bits = 16, exposure = "seeds" }
adversary_options = { c = 4.0 }

[[experiment]]
filter = "shielded_baseline_bloom"
trials = 0
"#;
        let err = parse(src, "b.toml").unwrap_err();
        assert_eq!(err.line, Some(17));

        let cfg = parse(&src.replace("trials = 0", "adversary_options = { lenient = true }"), "b.toml").unwrap();
        assert_eq!(cfg.experiments.len(), 2);
        assert_eq!(cfg.experiments[0].adversary, Strategy::ConsistencySearch { c: 4.0, lenient: false });
        assert_eq!(cfg.experiments[1].adversary, Strategy::ConsistencySearch { c: 200.0, lenient: true });
        assert_eq!(cfg.experiments[0].filter.base, BaseFilter::Bloom { bits: Some(16), exposure: Exposure::SeedsPublished });
        assert!(cfg.experiments[1].filter.shield);
        assert_eq!(cfg.experiments[1].params.u_bits, 10);
    }
}
