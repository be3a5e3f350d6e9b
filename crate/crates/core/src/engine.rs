//! Runs a study: one generator stream per DGM (or per chunk), the start
//! state of every repetition stored, every method applied to the same
//! simulated dataset, and failures recorded as rows rather than raised.

use std::ops::Range;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{DgmInstance, MethodKind, StreamPolicy, StudyConfig, TrueValue, TrueValueRule};
use crate::dgm::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{
    fit_cox_ph, fit_exponential_ph, fit_normal_mean_t, fit_weibull_ph, ErrorCode, FitError, FitResult,
    FitSettings,
};
use crate::perf::{self, Summary, SummaryOptions, TrueValues};
use crate::records::EstimatesRecord;
use crate::rng::{Generator, StatesRecord, GENERATOR_FAMILY, STATE_FORMAT_TAG};

/// Called before each fit with `(dgm_id, repetition, method_id)`; returning
/// an error replaces the fit. Used to test failure handling.
pub type FaultHook = Arc<dyn Fn(&str, u64, &str) -> Option<FitError> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeepDatasets {
    #[default]
    None,
    /// SHA-256 of each dataset's CSV form.
    Digest,
    /// Digest plus the CSV text itself.
    Full,
}

#[derive(Clone, Default)]
pub struct RunOptions {
    /// Worker cap; `None` uses the global pool.
    pub threads: Option<usize>,
    pub fault: Option<FaultHook>,
    pub keep_datasets: KeepDatasets,
}

impl std::fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunOptions")
            .field("threads", &self.threads)
            .field("fault", &self.fault.is_some())
            .field("keep_datasets", &self.keep_datasets)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub dgm_id: String,
    pub repetition: u64,
    pub digest: String,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub dgm_id: String,
    pub estimand_id: String,
    pub value: f64,
    /// `config`, `dgm` or `simulation`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamAssignment {
    pub dgm_id: String,
    pub stream_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub n_sim: u64,
    pub generator: String,
    pub state_format: u8,
    pub crate_version: String,
    pub config_digest: String,
    pub stream_policy: String,
    pub streams: Vec<StreamAssignment>,
    pub truths: Vec<TruthRecord>,
    pub alpha: f64,
    pub null_value: f64,
    pub platform: String,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

impl Manifest {
    pub fn true_values(&self) -> TrueValues {
        let mut tv = TrueValues::default();
        for t in &self.truths {
            tv.insert(&t.dgm_id, &t.estimand_id, t.value);
        }
        tv
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(source, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    /// Ordered by (dgm, repetition, method, estimand).
    pub estimates: Vec<EstimatesRecord>,
    /// Start state of each repetition plus the end state as `n_sim + 1`.
    pub states: Vec<StatesRecord>,
    pub datasets: Vec<DatasetRecord>,
    pub manifest: Manifest,
}

impl StudyOutput {
    pub fn summarize(&self, cfg: &StudyConfig) -> Result<Summary> {
        perf::summarize(&self.estimates, &self.manifest.true_values(), &summary_options(cfg))
    }
}

pub fn summary_options(cfg: &StudyConfig) -> SummaryOptions {
    SummaryOptions {
        alpha: cfg.targets.alpha,
        measures: cfg.measures.clone(),
        comparator: cfg.comparator.clone(),
    }
}

pub fn dataset_digest(d: &Dataset) -> String {
    hex::encode(Sha256::digest(d.to_csv().as_bytes()))
}

fn apply_method(kind: MethodKind, data: &Dataset, settings: &FitSettings) -> FitResult {
    match (kind, data) {
        (MethodKind::ExponentialPh, Dataset::Survival(d)) => fit_exponential_ph(d, settings),
        (MethodKind::WeibullPh, Dataset::Survival(d)) => fit_weibull_ph(d, settings),
        (MethodKind::CoxPh, Dataset::Survival(d)) => fit_cox_ph(d, settings),
        (MethodKind::NormalMeanT, Dataset::Numeric(d)) => fit_normal_mean_t(d, settings),
        _ => Err(FitError::new(ErrorCode::Numeric, "method does not apply to this kind of data")),
    }
}

/// Applies every method to one dataset, in config order.
fn analyse(
    cfg: &StudyConfig,
    dgm_id: &str,
    repetition: u64,
    data: &Dataset,
    fault: Option<&FaultHook>,
) -> Vec<EstimatesRecord> {
    let mut rows = Vec::with_capacity(cfg.methods.len() * cfg.estimands.len());
    for m in &cfg.methods {
        let injected = fault.and_then(|f| f(dgm_id, repetition, &m.id));
        let fit = match injected {
            Some(err) => Err(err),
            None => apply_method(m.kind, data, &m.settings(&cfg.targets)),
        };
        for e in &cfg.estimands {
            rows.push(EstimatesRecord::from_fit(dgm_id, repetition, &m.id, &e.id, &fit));
        }
    }
    rows
}

struct Block {
    estimates: Vec<EstimatesRecord>,
    states: Vec<StatesRecord>,
    datasets: Vec<DatasetRecord>,
    end: Generator,
}

/// Sequential repetitions on one stream.
fn run_block(
    cfg: &StudyConfig,
    dgm: &DgmInstance,
    mut g: Generator,
    reps: Range<u64>,
    opts: &RunOptions,
) -> Result<Block> {
    let mut block = Block {
        estimates: Vec::new(),
        states: Vec::with_capacity((reps.end - reps.start) as usize),
        datasets: Vec::new(),
        end: g.clone(),
    };
    for i in reps {
        block.states.push(StatesRecord::capture(&dgm.id, i, &g));
        let data = dgm.mechanism.generate(&mut g)?;
        block
            .estimates
            .extend(analyse(cfg, &dgm.id, i, &data, opts.fault.as_ref()));
        if opts.keep_datasets != KeepDatasets::None {
            let csv = data.to_csv();
            block.datasets.push(DatasetRecord {
                dgm_id: dgm.id.clone(),
                repetition: i,
                digest: hex::encode(Sha256::digest(csv.as_bytes())),
                csv: (opts.keep_datasets == KeepDatasets::Full).then_some(csv),
            });
        }
    }
    block.end = g;
    Ok(block)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Contiguous repetition ranges, one per chunk, 1-based and half-open.
fn chunk_ranges(first: u64, count: u64, chunks: u64) -> Vec<Range<u64>> {
    (0..chunks)
        .map(|c| first + c * count / chunks..first + (c + 1) * count / chunks)
        .collect()
}

struct Task<'a> {
    dgm: &'a DgmInstance,
    stream_id: u64,
    reps: Range<u64>,
    last: bool,
}

fn run_tasks(cfg: &StudyConfig, tasks: Vec<Task<'_>>, start: Option<Vec<Generator>>, opts: &RunOptions) -> Result<(Vec<EstimatesRecord>, Vec<StatesRecord>, Vec<DatasetRecord>)> {
    let blocks: Vec<Result<(Block, bool, String)>> = with_pool(opts.threads, || {
        tasks
            .par_iter()
            .enumerate()
            .map(|(k, t)| {
                let g = match &start {
                    Some(gens) => gens[k].clone(),
                    None => Generator::new(cfg.seed, t.stream_id),
                };
                run_block(cfg, t.dgm, g, t.reps.clone(), opts).map(|b| (b, t.last, t.dgm.id.clone()))
            })
            .collect()
    })?;
    let mut estimates = Vec::new();
    let mut states = Vec::new();
    let mut datasets = Vec::new();
    for b in blocks {
        let (block, last, dgm_id) = b?;
        estimates.extend(block.estimates);
        states.extend(block.states);
        datasets.extend(block.datasets);
        if last {
            let end_rep = states.last().map_or(1, |s: &StatesRecord| s.repetition + 1);
            states.push(StatesRecord::capture(&dgm_id, end_rep, &block.end));
        }
    }
    Ok((estimates, states, datasets))
}

fn platform() -> String {
    format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH)
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Stream reserved for estimating the true value of one (dgm, estimand).
pub fn truth_stream_id(cfg: &StudyConfig, n_dgms: usize, dgm_index: usize, estimand_index: usize) -> u64 {
    cfg.main_stream_count(n_dgms) + (dgm_index * cfg.estimands.len() + estimand_index) as u64
}

fn truths(cfg: &StudyConfig, dgms: &[DgmInstance]) -> Result<Vec<TruthRecord>> {
    let mut out = Vec::new();
    for (d, dgm) in dgms.iter().enumerate() {
        for (e, est) in cfg.estimands.iter().enumerate() {
            let base = TruthRecord {
                dgm_id: dgm.id.clone(),
                estimand_id: est.id.clone(),
                value: f64::NAN,
                source: String::new(),
                big_n: None,
                method_id: None,
                stream_id: None,
            };
            out.push(match est.true_value {
                TrueValue::Fixed(v) => TruthRecord {
                    value: v,
                    source: "config".into(),
                    ..base
                },
                TrueValue::Rule(TrueValueRule::FromDgm) => TruthRecord {
                    value: dgm.mechanism.natural_estimand(),
                    source: "dgm".into(),
                    ..base
                },
                TrueValue::Rule(TrueValueRule::EstimateBySimulation) => {
                    let big_n = est.big_n.unwrap_or(0);
                    let method = est.truth_method.clone().unwrap_or_else(|| cfg.methods[0].id.clone());
                    let stream = truth_stream_id(cfg, dgms.len(), d, e);
                    let value = estimate_true_theta(cfg, &dgm.id, big_n, stream, Some(&method))?;
                    TruthRecord {
                        value,
                        source: "simulation".into(),
                        big_n: Some(big_n),
                        method_id: Some(method),
                        stream_id: Some(stream),
                        ..base
                    }
                }
            });
        }
    }
    Ok(out)
}

fn manifest(cfg: &StudyConfig, dgms: &[DgmInstance], truths: Vec<TruthRecord>, started: u64, elapsed: f64) -> Manifest {
    Manifest {
        name: cfg.name.clone(),
        seed: cfg.seed,
        n_sim: cfg.n_sim,
        generator: GENERATOR_FAMILY.to_string(),
        state_format: STATE_FORMAT_TAG,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: cfg.digest(),
        stream_policy: cfg.streams.to_string(),
        streams: dgms
            .iter()
            .enumerate()
            .map(|(d, dgm)| StreamAssignment {
                dgm_id: dgm.id.clone(),
                stream_ids: cfg.stream_ids(d),
            })
            .collect(),
        truths,
        alpha: cfg.targets.alpha,
        null_value: cfg.targets.null_value,
        platform: platform(),
        started_unix: started,
        elapsed_seconds: elapsed,
    }
}

/// Runs all repetitions of every DGM.
///
/// Each DGM gets its own stream under the same seed, so DGMs can run in
/// parallel and results stay matched across DGMs. Output order does not
/// depend on scheduling.
pub fn run_study(cfg: &StudyConfig, opts: &RunOptions) -> Result<StudyOutput> {
    let started = now_unix();
    let clock = Instant::now();
    cfg.validate()?;
    let dgms = cfg.dgms()?;
    let truths = truths(cfg, &dgms)?;
    let mut tasks = Vec::new();
    for (d, dgm) in dgms.iter().enumerate() {
        let streams = cfg.stream_ids(d);
        let ranges = match cfg.streams {
            StreamPolicy::PerDgm => vec![1..cfg.n_sim + 1],
            StreamPolicy::PerChunk { chunks } => chunk_ranges(1, cfg.n_sim, chunks),
        };
        let last = ranges.len() - 1;
        for (k, (reps, stream_id)) in ranges.into_iter().zip(streams).enumerate() {
            tasks.push(Task {
                dgm,
                stream_id,
                reps,
                last: k == last,
            });
        }
    }
    let (estimates, states, datasets) = run_tasks(cfg, tasks, None, opts)?;
    Ok(StudyOutput {
        estimates,
        states,
        datasets,
        manifest: manifest(cfg, &dgms, truths, started, clock.elapsed().as_secs_f64()),
    })
}

fn find_state<'a>(states: &'a [StatesRecord], dgm_id: &str, repetition: u64) -> Option<&'a StatesRecord> {
    states.iter().find(|s| s.dgm_id == dgm_id && s.repetition == repetition)
}

/// Regenerates one repetition from its stored start state.
pub fn rerun_repetition(
    cfg: &StudyConfig,
    states: &[StatesRecord],
    dgm_id: &str,
    repetition: u64,
    opts: &RunOptions,
) -> Result<(Dataset, Vec<EstimatesRecord>)> {
    let unknown = || Error::UnknownRepetition {
        dgm_id: dgm_id.to_string(),
        repetition,
    };
    if repetition == 0 || repetition > cfg.n_sim {
        return Err(unknown());
    }
    let dgm = cfg.dgms()?.into_iter().find(|d| d.id == dgm_id).ok_or_else(unknown)?;
    let mut g = find_state(states, dgm_id, repetition).ok_or_else(unknown)?.restore()?;
    let data = dgm.mechanism.generate(&mut g)?;
    let rows = analyse(cfg, dgm_id, repetition, &data, opts.fault.as_ref());
    Ok((data, rows))
}

/// Runs repetitions `n_sim + 1 ..= n_sim + extra` from the stored end states.
///
/// The returned states hold the new end state (`n_sim + extra + 1`) and the
/// start states of repetitions after the first new one; the old end state
/// already is the start state of repetition `n_sim + 1`. Appending the
/// returned rows to the old files reproduces a single run of
/// `n_sim + extra` repetitions exactly.
pub fn continue_study(cfg: &StudyConfig, states: &[StatesRecord], extra: u64, opts: &RunOptions) -> Result<StudyOutput> {
    let started = now_unix();
    let clock = Instant::now();
    cfg.validate()?;
    if let StreamPolicy::PerChunk { .. } = cfg.streams {
        return Err(Error::CannotContinue(
            "per_chunk streams cannot be extended into an equivalent longer run".into(),
        ));
    }
    let dgms = cfg.dgms()?;
    let mut gens = Vec::new();
    for dgm in &dgms {
        let end = find_state(states, &dgm.id, cfg.n_sim + 1).ok_or_else(|| {
            Error::CannotContinue(format!("no end state for dgm `{}` at repetition {}", dgm.id, cfg.n_sim + 1))
        })?;
        if states.iter().any(|s| s.dgm_id == dgm.id && s.repetition > cfg.n_sim + 1) {
            return Err(Error::CannotContinue(format!(
                "states for dgm `{}` extend past n_sim = {}",
                dgm.id, cfg.n_sim
            )));
        }
        gens.push(end.restore()?);
    }
    let mut longer = cfg.clone();
    longer.n_sim = cfg.n_sim + extra;
    let truths = truths(cfg, &dgms)?;
    if extra == 0 {
        return Ok(StudyOutput {
            estimates: Vec::new(),
            states: Vec::new(),
            datasets: Vec::new(),
            manifest: manifest(&longer, &dgms, truths, started, clock.elapsed().as_secs_f64()),
        });
    }
    let tasks = dgms
        .iter()
        .enumerate()
        .map(|(d, dgm)| Task {
            dgm,
            stream_id: d as u64,
            reps: cfg.n_sim + 1..cfg.n_sim + extra + 1,
            last: true,
        })
        .collect();
    let (estimates, mut new_states, datasets) = run_tasks(cfg, tasks, Some(gens), opts)?;
    new_states.retain(|s| s.repetition != cfg.n_sim + 1);
    Ok(StudyOutput {
        estimates,
        states: new_states,
        datasets,
        manifest: manifest(&longer, &dgms, truths, started, clock.elapsed().as_secs_f64()),
    })
}

/// Estimates a true value by fitting one method to a single dataset of
/// `big_n` observations drawn on a stream the main run never touches.
pub fn estimate_true_theta(
    cfg: &StudyConfig,
    dgm_id: &str,
    big_n: usize,
    stream_id: u64,
    method_id: Option<&str>,
) -> Result<f64> {
    if big_n == 0 {
        return Err(Error::InvalidParameter("big_n must be at least 1".into()));
    }
    let dgms = cfg.dgms()?;
    if stream_id < cfg.main_stream_count(dgms.len()) {
        return Err(Error::InvalidParameter(format!(
            "stream {stream_id} is used by the main run; truth estimation needs its own stream"
        )));
    }
    let dgm = dgms
        .iter()
        .find(|d| d.id == dgm_id)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown dgm `{dgm_id}`")))?;
    let method = match method_id {
        Some(id) => cfg
            .method(id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{id}`")))?,
        None => &cfg.methods[0],
    };
    let mut g = Generator::new(cfg.seed, stream_id);
    let data = dgm.mechanism.with_n_obs(big_n).generate(&mut g)?;
    apply_method(method.kind, &data, &method.settings(&cfg.targets))
        .map(|e| e.theta_hat)
        .map_err(|source| Error::Fit {
            method_id: method.id.clone(),
            source,
        })
}
