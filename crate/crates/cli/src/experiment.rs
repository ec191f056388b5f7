//! Campaign runner: one results record per configured experiment.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use resilient_filters::adversary::AdversaryFactory;
use resilient_filters::cuckoo::Fault;
use resilient_filters::filter::serialized_bits;
use resilient_filters::game::{estimate_success_rate, GameConfig};
use resilient_filters::{seed, Element, ElementSet, Error, FilterFactory, FilterParams};

use crate::config::Experiment;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 13] = [
    "filter",
    "adversary",
    "n",
    "eps",
    "t",
    "trials",
    "success_rate",
    "ci_half_width",
    "fp_rate_baseline",
    "memory_bits",
    "mean_bit_comparisons",
    "wall_time_ms",
    "master_seed",
];

/// Builds sampled for the blind false-positive rate.
const FP_BUILDS: u64 = 10;
/// Uniform non-member lookups per build when the universe is too large to
/// enumerate.
const FP_LOOKUPS: usize = 1000;
const FP_EXHAUSTIVE_BITS: u32 = 16;
/// Keeps the reference builds apart from the trial seeds `split(master, i)`.
const REFERENCE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub filter: String,
    pub adversary: String,
    pub n: usize,
    pub eps: f64,
    pub t: usize,
    pub trials: usize,
    /// `None` when any game broke protocol or the adversary could not run.
    pub success_rate: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub fp_rate_baseline: f64,
    pub memory_bits: u64,
    pub mean_bit_comparisons: Option<f64>,
    pub wall_time_ms: Option<u128>,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    fn csv_row(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.filter.clone(),
            self.adversary.clone(),
            self.n.to_string(),
            self.eps.to_string(),
            self.t.to_string(),
            self.trials.to_string(),
            self.success_rate.map(|x| x.to_string()).unwrap_or_else(|| "invalid".into()),
            opt(self.ci_half_width),
            self.fp_rate_baseline.to_string(),
            self.memory_bits.to_string(),
            opt(self.mean_bit_comparisons),
            self.wall_time_ms.map(|x| x.to_string()).unwrap_or_default(),
            self.master_seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub master_seed: u64,
    pub parallel: usize,
    pub timing: bool,
    pub fault: Fault,
}

/// Blind false-positive rate and size of reference builds.
fn baseline(factory: &dyn FilterFactory, params: &FilterParams, master: u64) -> Result<(f64, u64), Error> {
    let universe = params.universe();
    let reference = seed::split(master, REFERENCE_STREAM);
    let mut hits = 0u64;
    let mut lookups = 0u64;
    let mut memory = 0;
    for b in 0..FP_BUILDS {
        let bseed = seed::split(reference, b);
        let mut rng = seed::rng(bseed);
        let set = ElementSet::sample(params.n, universe, &mut rng)?;
        let mut filter = factory.build_boxed(&set, params, seed::split(bseed, 1))?;
        if b == 0 {
            memory = serialized_bits(filter.as_ref());
        }
        if universe.bits() <= FP_EXHAUSTIVE_BITS {
            for x in universe.iter().filter(|&x| !set.contains(x)) {
                hits += filter.query(x) as u64;
                lookups += 1;
            }
        } else {
            let mut done = 0;
            while done < FP_LOOKUPS {
                let x: Element = universe.sample(&mut rng);
                if !set.contains(x) {
                    hits += filter.query(x) as u64;
                    done += 1;
                }
            }
            lookups += FP_LOOKUPS as u64;
        }
    }
    Ok((hits as f64 / lookups.max(1) as f64, memory))
}

pub fn run_one(exp: &Experiment, opts: &RunOptions) -> Result<Record, Error> {
    let started = Instant::now();
    let factory = exp.filter.factory(opts.fault);
    let (fp_rate_baseline, memory_bits) = baseline(factory.as_ref(), &exp.params, opts.master_seed)?;
    let config = GameConfig { filter: factory.as_ref(), adversary: &exp.adversary, params: exp.params };

    let mut record = Record {
        filter: factory.label(),
        adversary: exp.adversary.name(),
        n: exp.params.n,
        eps: exp.params.eps,
        t: exp.params.t,
        trials: exp.trials,
        success_rate: None,
        ci_half_width: None,
        fp_rate_baseline,
        memory_bits,
        mean_bit_comparisons: None,
        wall_time_ms: None,
        master_seed: opts.master_seed,
        note: None,
    };
    match estimate_success_rate(&config, exp.trials, opts.master_seed, opts.parallel) {
        Ok(est) if est.invalid == 0 => {
            record.success_rate = Some(est.rate);
            record.ci_half_width = Some(est.half_width);
            record.mean_bit_comparisons = est.mean_bit_comparisons();
        }
        Ok(est) => record.note = Some(format!("{} of {} games exceeded the query budget", est.invalid, est.trials)),
        Err(e @ (Error::Precondition(_) | Error::NoConsistentRepresentation { .. } | Error::UniverseExhausted(_))) => {
            record.note = Some(e.to_string())
        }
        Err(e) => return Err(e),
    }
    if opts.timing {
        record.wall_time_ms = Some(started.elapsed().as_millis());
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Streams records to `out` as they complete.
pub struct ResultsWriter<W: Write> {
    format: Format,
    csv: Option<csv::Writer<W>>,
    json: Option<W>,
    first: bool,
}

impl<W: Write> ResultsWriter<W> {
    pub fn new(out: W, format: Format) -> std::io::Result<Self> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(CSV_HEADER)?;
                w.flush()?;
                Ok(Self { format, csv: Some(w), json: None, first: true })
            }
            Format::Json => {
                let mut out = out;
                write!(out, "{{\"schema_version\":{SCHEMA_VERSION},\"records\":[")?;
                out.flush()?;
                Ok(Self { format, csv: None, json: Some(out), first: true })
            }
        }
    }

    pub fn push(&mut self, record: &Record) -> std::io::Result<()> {
        match self.format {
            Format::Csv => {
                let w = self.csv.as_mut().expect("csv writer");
                w.write_record(record.csv_row())?;
                w.flush()?;
            }
            Format::Json => {
                let w = self.json.as_mut().expect("json writer");
                if !self.first {
                    write!(w, ",")?;
                }
                write!(w, "\n{}", serde_json::to_string(record)?)?;
                w.flush()?;
            }
        }
        self.first = false;
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        if let Some(mut w) = self.json.take() {
            writeln!(w, "\n]}}")?;
            w.flush()?;
        }
        if let Some(mut w) = self.csv.take() {
            w.flush()?;
        }
        Ok(())
    }
}
