//! `rfilter`: experiment runner, self-test and memory audit.
//!
//! Exit codes: 0 success, 1 a criterion or audit failed, 2 bad configuration
//! or usage.

mod config;
mod experiment;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use resilient_filters::criteria::{self, CriterionReport, SuiteConfig, DEFAULT_MASTER_SEED};
use resilient_filters::cuckoo::Fault;
use resilient_filters::filter::serialized_bits;
use resilient_filters::{seed, ElementSet, FilterParams};

use config::{BaseFilter, FilterSpec, FILTER_NAMES};
use experiment::{Format, ResultsWriter, RunOptions, SCHEMA_VERSION};

const SEED_ENV: &str = "RFILTER_SEED";

#[derive(Parser)]
#[command(name = "rfilter", version, about = "Adversarial-resilient filter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Master seed. Falls back to the config file, then $RFILTER_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    None,
    FrozenCursors,
    NoEarlyExit,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::None => Fault::None,
            FaultArg::FrozenCursors => Fault::FrozenCursors,
            FaultArg::NoEarlyExit => Fault::NoEarlyExit,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs the campaign described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Fill in wall_time_ms. Output is then no longer reproducible.
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value = "none")]
        inject_fault: FaultArg,
    },
    /// Runs the acceptance criteria and reports pass/fail for each.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion ids, e.g. `1,7,7b`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Deliberately break the cuckoo filter to check the suite notices.
        #[arg(long, value_enum, default_value = "none")]
        inject_fault: FaultArg,
    },
    /// Compares each filter's bit formula with its serialized size.
    AuditMemory {
        /// Parameter points to audit; defaults to n = 1024, eps = 2^-6, t = 4096.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure carrying its exit code.
struct Exit(u8, String);

impl<E: std::fmt::Display> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(2, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment { config, common, timing, inject_fault } => {
            run_experiment(&config, &common, timing, inject_fault.into())
        }
        Command::Selftest { common, only, inject_fault } => selftest(&common, &only, inject_fault.into()),
        Command::AuditMemory { config, common } => audit_memory(config.as_deref(), &common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("rfilter: {msg}");
            ExitCode::from(code)
        }
    }
}

fn env_seed() -> Result<Option<u64>, Exit> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Exit(2, format!("{SEED_ENV}={v} is not a u64"))),
        Err(_) => Ok(None),
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Exit> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Exit(2, format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_experiment(path: &Path, common: &Common, timing: bool, fault: Fault) -> Result<u8, Exit> {
    let cfg = config::load(path)?;
    let master_seed = match (common.seed, cfg.seed) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(DEFAULT_MASTER_SEED),
    };
    let opts = RunOptions { master_seed, parallel: common.parallel as usize, timing, fault };
    let mut writer = ResultsWriter::new(open_out(&common.out)?, common.format)?;
    for exp in &cfg.experiments {
        let record = experiment::run_one(exp, &opts)?;
        if let Some(note) = &record.note {
            eprintln!("rfilter: {} vs {}: invalid: {note}", record.filter, record.adversary);
        }
        writer.push(&record)?;
    }
    writer.finish()?;
    Ok(0)
}

#[derive(Serialize)]
struct ReportRow<'a> {
    id: &'a str,
    name: &'a str,
    measured: f64,
    threshold: String,
    passed: bool,
    seed: u64,
    detail: &'a str,
}

impl<'a> From<&'a CriterionReport> for ReportRow<'a> {
    fn from(r: &'a CriterionReport) -> Self {
        Self {
            id: r.id,
            name: r.name,
            measured: r.measured,
            threshold: r.threshold.to_string(),
            passed: r.passed,
            seed: r.seed,
            detail: &r.detail,
        }
    }
}

fn selftest(common: &Common, only: &[String], fault: Fault) -> Result<u8, Exit> {
    let chosen: Vec<&criteria::Criterion> = if only.is_empty() {
        criteria::CRITERIA.iter().collect()
    } else {
        only.iter()
            .map(|id| criteria::find(id.trim()).ok_or_else(|| Exit(2, format!("unknown criterion `{id}`"))))
            .collect::<Result<_, _>>()?
    };
    let master_seed = common.seed.or(env_seed()?).unwrap_or(DEFAULT_MASTER_SEED);
    let suite = SuiteConfig { master_seed, parallel: common.parallel as usize, fault };

    let mut reports = Vec::new();
    for c in chosen {
        let report = criteria::run_or_report(c, &suite);
        eprintln!("{report}");
        reports.push(report);
    }

    let mut out = open_out(&common.out)?;
    match common.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &reports {
                w.serialize(ReportRow::from(r))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "master_seed": master_seed,
                "fault": format!("{fault:?}"),
                "criteria": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    out.flush()?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("{} of {} criteria passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct AuditRow {
    filter: String,
    n: usize,
    eps: f64,
    t: usize,
    formula_bits: u64,
    serialized_bits: u64,
    matches: bool,
}

fn audit_memory(path: Option<&Path>, common: &Common) -> Result<u8, Exit> {
    let points: Vec<(FilterSpec, FilterParams)> = match path {
        Some(p) => config::load(p)?.experiments.into_iter().map(|e| (e.filter, e.params)).collect(),
        None => {
            let params = FilterParams::new(1024, 2f64.powi(-6), 4096)?;
            FILTER_NAMES
                .iter()
                .flat_map(|name| {
                    let base = match *name {
                        "baseline_bloom" => BaseFilter::Bloom { bits: None, exposure: Default::default() },
                        "cuckoo_resilient" => BaseFilter::Cuckoo(resilient_filters::cuckoo::CuckooBuilder::adaptive()),
                        "cuckoo_random_query" => {
                            BaseFilter::Cuckoo(resilient_filters::cuckoo::CuckooBuilder::random_query())
                        }
                        _ => BaseFilter::Exact,
                    };
                    [false, true].map(|shield| (FilterSpec { base, shield }, params))
                })
                .collect()
        }
    };
    let master_seed = common.seed.or(env_seed()?).unwrap_or(DEFAULT_MASTER_SEED);

    let mut rows = Vec::new();
    for (i, (spec, params)) in points.iter().enumerate() {
        let factory = spec.factory(Fault::None);
        let s = seed::split(master_seed, i as u64);
        let set = ElementSet::sample(params.n, params.universe(), &mut seed::rng(s))?;
        let filter = factory.build_boxed(&set, params, seed::split(s, 1))?;
        let formula_bits = filter.bits();
        let serialized = serialized_bits(filter.as_ref());
        rows.push(AuditRow {
            filter: factory.label(),
            n: params.n,
            eps: params.eps,
            t: params.t,
            formula_bits,
            serialized_bits: serialized,
            matches: formula_bits == serialized,
        });
    }

    let mut out = open_out(&common.out)?;
    match common.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
    }
    out.flush()?;
    Ok(if rows.iter().all(|r| r.matches) { 0 } else { 1 })
}
