//! Benchmark orchestration: correlation-based bit sharing against a
//! random-pair baseline and the unreduced encoding, swept over shared-bit
//! counts and cross-validation trials.
//!
//! Per trial the pipeline is
//! 1. sample a short Metropolis chain on the training cost,
//! 2. estimate correlations,
//! 3. select disjoint pairs above the threshold and build the reduced plan,
//! 4. build the QUBO, anneal it and score the decoded weights on the
//!    held-out samples.
//!
//! All randomness comes from seeds derived from the master seed, so the
//! results do not depend on how trials are scheduled.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::annealer::{anneal, AnnealSchedule};
use crate::datagen::{generate, trial_splits, GeneratorConfig, Split};
use crate::encoding::{BasisVector, EncodingPlan};
use crate::error::{Error, Result};
use crate::regression::{Gram, RegressionDataset};
use crate::sampler::{CorrelationReport, SamplerConfig};

const STREAM_SAMPLER: u64 = 1;
const STREAM_RANDOM_PAIRS: u64 = 2;
const STREAM_ANNEAL: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Pairs chosen from sampled correlations.
    Proposed,
    /// Same number of pairs, chosen uniformly at random.
    Random,
    /// No sharing.
    None,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::Random, Method::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Random => "random",
            Method::None => "none",
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            Method::Proposed => 0,
            Method::Random => 1,
            Method::None => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Method::Proposed),
            "random" => Ok(Method::Random),
            "none" => Ok(Method::None),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub basis: BasisVector,
    /// Chain settings; the seed is replaced per trial.
    pub sampler: SamplerConfig,
    /// Cooling schedule; the seed is replaced per run.
    pub schedule: AnnealSchedule,
    pub threshold: f64,
    pub cut_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub n_trials: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dims = crate::datagen::TRUE_WEIGHTS.len();
        Self {
            generator: GeneratorConfig::default(),
            basis: BasisVector::signed_powers_of_two(),
            sampler: SamplerConfig::for_dims(dims, 0),
            schedule: AnnealSchedule::reference(0),
            threshold: 0.8,
            cut_values: (0..=10).collect(),
            methods: vec![Method::Proposed, Method::Random],
            n_trials: 10,
            master_seed: 0,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.sampler.validate()?;
        self.schedule.validate()?;
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold {} outside (0, 1]",
                self.threshold
            )));
        }
        if let Some(&c) = self.cut_values.iter().find(|&&c| c > self.basis.len()) {
            return Err(Error::InvalidConfig(format!(
                "cut {c} exceeds basis length {}",
                self.basis.len()
            )));
        }
        if self.methods.is_empty() || self.cut_values.is_empty() {
            return Err(Error::InvalidConfig(
                "no methods or cut values given".into(),
            ));
        }
        if self.n_trials == 0 || self.n_trials * self.generator.train_size > self.generator.n_total
        {
            return Err(Error::InvalidConfig(format!(
                "{} trials of {} samples do not fit in {} samples",
                self.n_trials, self.generator.train_size, self.generator.n_total
            )));
        }
        Ok(())
    }
}

/// Mixes a master seed with stream tags (splitmix64 finalizer).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    fn mix(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^ (x >> 31)
    }
    tags.iter().fold(mix(master), |acc, &t| mix(acc ^ mix(t)))
}

/// `count` disjoint pairs drawn uniformly from all such configurations over
/// `dims` variables. Each pair is `(lo, hi)`; the list is sorted.
pub fn random_pairs(dims: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if 2 * count > dims {
        return Err(Error::InvalidPairs(format!(
            "{count} disjoint pairs need {} variables, only {dims} available",
            2 * count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dims).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = order[..2 * count]
        .chunks(2)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

/// Everything about one trial that does not depend on method or cut.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub trial: usize,
    pub train: RegressionDataset,
    pub test: RegressionDataset,
    pub gram: Gram,
    pub correlations: CorrelationReport,
    pub random_pairs: Vec<(usize, usize)>,
}

impl TrialContext {
    pub fn prepare(
        cfg: &ExperimentConfig,
        data: &RegressionDataset,
        split: &Split,
        trial: usize,
    ) -> Result<Self> {
        let train = data.select_rows(&split.train)?;
        let test = data.select_rows(&split.test)?;
        let sampler = SamplerConfig {
            seed: derive_seed(cfg.master_seed, &[STREAM_SAMPLER, trial as u64]),
            ..cfg.sampler.clone()
        };
        let correlations = CorrelationReport::estimate(&train, &sampler, cfg.threshold)?;
        let random_pairs = random_pairs(
            train.n_params(),
            correlations.pairs.len(),
            derive_seed(cfg.master_seed, &[STREAM_RANDOM_PAIRS, trial as u64]),
        )?;
        Ok(Self {
            trial,
            gram: Gram::new(&train),
            train,
            test,
            correlations,
            random_pairs,
        })
    }

    pub fn pairs_for(&self, method: Method) -> Vec<(usize, usize)> {
        match method {
            Method::Proposed => self.correlations.pair_indices(),
            Method::Random => self.random_pairs.clone(),
            Method::None => Vec::new(),
        }
    }

    /// Builds, anneals and scores one configuration.
    pub fn run(&self, cfg: &ExperimentConfig, method: Method, cut: usize) -> Result<TrialReport> {
        let pairs = self.pairs_for(method);
        let full = EncodingPlan::full(self.train.n_params(), cfg.basis.clone())?;
        let plan = match method {
            Method::None => full,
            _ => full.reduce(&pairs, cut)?,
        };
        let qubo = self.gram.build_qubo(&plan)?;
        let seed = derive_seed(
            cfg.master_seed,
            &[
                STREAM_ANNEAL,
                method.stream_id(),
                cut as u64,
                self.trial as u64,
            ],
        );
        let schedule = AnnealSchedule {
            seed,
            ..cfg.schedule
        };
        let result = anneal(&qubo, &schedule)?;
        let weights = plan.decode(&result.best_z)?;
        let mae_test = self.test.mae(&weights)?;
        Ok(TrialReport {
            method,
            cut,
            trial: self.trial,
            n_bits: qubo.n(),
            pairs,
            weights,
            mae_test,
            best_energy: result.best_energy,
            wall_time_seconds: result.wall_time,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub method: Method,
    pub cut: usize,
    pub trial: usize,
    pub n_bits: usize,
    pub pairs: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    pub mae_test: f64,
    pub best_energy: f64,
    /// Annealing time only.
    pub wall_time_seconds: f64,
    /// Seed of the annealing run.
    pub seed: u64,
}

/// Runs one `(method, cut, trial)` configuration from scratch.
pub fn run_trial(
    cfg: &ExperimentConfig,
    method: Method,
    cut: usize,
    trial: usize,
) -> Result<TrialReport> {
    cfg.validate()?;
    let data = generate(&cfg.generator)?;
    let splits = trial_splits(data.n_samples(), cfg.generator.train_size, cfg.n_trials)?;
    let split = splits.get(trial).ok_or(Error::IndexOutOfRange {
        index: trial,
        len: splits.len(),
    })?;
    TrialContext::prepare(cfg, &data, split, trial)?
        .run(cfg, method, cut)
        .map_err(|e| trial_error(method, cut, trial, e))
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub cut: usize,
    pub trials: usize,
    pub pairs: Stat,
    pub n_bits: Stat,
    pub mae: Stat,
    pub seconds: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Sorted by method (in config order), then cut, then trial.
    pub rows: Vec<TrialReport>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every `(method, cut, trial)` combination. Any failing trial aborts
/// the whole run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| run_experiment_inner(cfg)),
        None => run_experiment_inner(cfg),
    }
}

fn run_experiment_inner(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = generate(&cfg.generator)?;
    let splits = trial_splits(data.n_samples(), cfg.generator.train_size, cfg.n_trials)?;
    let contexts = splits
        .par_iter()
        .enumerate()
        .map(|(t, split)| TrialContext::prepare(cfg, &data, split, t))
        .collect::<Result<Vec<_>>>()?;

    // Trial-major execution so that slow stretches of machine time are spread
    // over every cut instead of landing on one. Rows are reported method-major.
    let n_cuts = cfg.cut_values.len();
    let n_methods = cfg.methods.len();
    let mut jobs = Vec::with_capacity(n_methods * n_cuts * cfg.n_trials);
    for t in 0..cfg.n_trials {
        for ci in 0..n_cuts {
            for mi in 0..n_methods {
                jobs.push((mi, ci, t));
            }
        }
    }

    let mut keyed = jobs
        .par_iter()
        .map(|&(mi, ci, t)| {
            let (m, c) = (cfg.methods[mi], cfg.cut_values[ci]);
            contexts[t]
                .run(cfg, m, c)
                .map(|row| ((mi, ci, t), row))
                .map_err(|e| trial_error(m, c, t, e))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(k, _)| *k);
    let rows: Vec<TrialReport> = keyed.into_iter().map(|(_, row)| row).collect();

    Ok(ExperimentReport {
        summary: summarize(&rows),
        rows,
    })
}

fn trial_error(method: Method, cut: usize, trial: usize, e: Error) -> Error {
    match e {
        Error::Trial { .. } => e,
        other => Error::Trial {
            method: method.to_string(),
            cut,
            trial,
            source: Box::new(other),
        },
    }
}

/// Aggregates per `(method, cut)` in order of first appearance.
pub fn summarize(rows: &[TrialReport]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.method, r.cut)) {
            keys.push((r.method, r.cut));
        }
    }
    keys.into_iter()
        .map(|(method, cut)| {
            let group: Vec<&TrialReport> = rows
                .iter()
                .filter(|r| r.method == method && r.cut == cut)
                .collect();
            let stat = |f: &dyn Fn(&TrialReport) -> f64| {
                Stat::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                method,
                cut,
                trials: group.len(),
                pairs: stat(&|r| r.pairs.len() as f64),
                n_bits: stat(&|r| r.n_bits as f64),
                mae: stat(&|r| r.mae_test),
                seconds: stat(&|r| r.wall_time_seconds),
            }
        })
        .collect()
}

/// Pairs as `a-b` joined by `;`.
pub fn format_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub const RESULTS_HEADER: [&str; 9] = [
    "method", "cut", "trial", "n_bits", "pairs", "mae", "energy", "seconds", "seed",
];

impl ExperimentReport {
    /// Per-trial rows as CSV with [`RESULTS_HEADER`].
    pub fn write_results_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(RESULTS_HEADER)?;
        for r in &self.rows {
            writer.write_record([
                r.method.to_string(),
                r.cut.to_string(),
                r.trial.to_string(),
                r.n_bits.to_string(),
                format_pairs(&r.pairs),
                r.mae_test.to_string(),
                r.best_energy.to_string(),
                r.wall_time_seconds.to_string(),
                r.seed.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Aligned text table of the aggregated rows.
    pub fn write_summary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{:<9} {:>4} {:>6} {:>16} {:>18} {:>16} {:>18}",
            "method", "cut", "trials", "pairs", "n_bits", "mae", "seconds"
        )?;
        for s in &self.summary {
            writeln!(
                out,
                "{:<9} {:>4} {:>6} {:>16} {:>18} {:>16} {:>18}",
                s.method.as_str(),
                s.cut,
                s.trials,
                s.pairs.to_string(),
                s.n_bits.to_string(),
                s.mae.to_string(),
                s.seconds.to_string()
            )?;
        }
        Ok(())
    }

    pub fn summary_for(&self, method: Method, cut: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.cut == cut)
    }
}
