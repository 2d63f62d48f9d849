//! Replicated experiment harness.
//!
//! A run draws fresh parameters and data per replication (for the built-in
//! simulation designs), applies each configured method, records the
//! misclustering rate per iteration against the generating labels, and
//! aggregates mean curves together with the per-replication separation values
//! and exponent targets. Everything is keyed by derived seeds, so a run is a
//! pure function of its configuration.

mod io;
mod seed;

pub use io::{
    metadata_path, read_dataset_csv, read_labels, read_params_json, write_curves,
    write_dataset_csv, write_labels, write_metadata, write_params_json,
};
pub use seed::{
    derive_seed, splitmix64, STREAM_DATA, STREAM_INIT_SPECTRAL, STREAM_INIT_VANILLA, STREAM_PARAMS,
};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    adjusted_lloyd_hetero, adjusted_lloyd_homog, spectral_init, vanilla_lloyd,
    vanilla_lloyd_restarts, ClusterError, FitTrace, DEFAULT_INIT_ITERS, DEFAULT_RESTARTS,
};
use crate::loss::misclustering_rate;
use crate::model::{balanced_assignment, make_sim1, make_sim2, sample, GmmParams, ModelError};
use crate::snr::{snr_hetero, snr_homogeneous, SnrError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("replication {index} failed: {message}")]
    Replication { index: usize, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Cluster(#[from] ClusterError),

    #[error(transparent)]
    Snr(#[from] SnrError),

    #[error(transparent)]
    Loss(#[from] crate::loss::LossError),
}

/// Which generating model a run uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "sim1")]
    Sim1,
    #[serde(rename = "sim2")]
    Sim2,
    #[serde(rename = "custom")]
    Custom(String),
}

/// A clustering method in the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "spectral")]
    Spectral,
    #[serde(rename = "vanilla")]
    Vanilla,
    #[serde(rename = "spectral+alg1")]
    SpectralAlg1,
    #[serde(rename = "vanilla+alg1")]
    VanillaAlg1,
    #[serde(rename = "spectral+alg2")]
    SpectralAlg2,
    #[serde(rename = "vanilla+alg2")]
    VanillaAlg2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InitKind {
    Vanilla,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Adjusted {
    None,
    Homogeneous,
    Heterogeneous,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Vanilla => "vanilla",
            Method::SpectralAlg1 => "spectral+alg1",
            Method::VanillaAlg1 => "vanilla+alg1",
            Method::SpectralAlg2 => "spectral+alg2",
            Method::VanillaAlg2 => "vanilla+alg2",
        }
    }

    fn init(&self) -> InitKind {
        match self {
            Method::Spectral | Method::SpectralAlg1 | Method::SpectralAlg2 => InitKind::Spectral,
            Method::Vanilla | Method::VanillaAlg1 | Method::VanillaAlg2 => InitKind::Vanilla,
        }
    }

    fn adjusted(&self) -> Adjusted {
        match self {
            Method::Spectral | Method::Vanilla => Adjusted::None,
            Method::SpectralAlg1 | Method::VanillaAlg1 => Adjusted::Homogeneous,
            Method::SpectralAlg2 | Method::VanillaAlg2 => Adjusted::Heterogeneous,
        }
    }
}

/// Declarative description of a replicated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model_kind: ModelKind,
    pub n: usize,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub max_iters: usize,
    pub base_seed: u64,
    pub ridge: f64,
    /// Optional wall-clock budget; exceeding it flushes partial results with
    /// a truncation marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
}

/// Mean error curves for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCurve {
    pub method: String,
    /// Mean misclustering rate per iteration (iteration 0 = initializer).
    pub mean_h: Vec<f64>,
    /// Mean of `ln h` over the replications with `h > 0`; NaN when none.
    pub mean_ln_h: Vec<f64>,
    /// How many replications had `h = 0` at each iteration.
    pub n_zero_reps: Vec<usize>,
}

/// Per-replication record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepSummary {
    pub index: usize,
    /// Seed of the parameter draw; absent for fixed custom parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_seed: Option<u64>,
    pub data_seed: u64,
    /// Separation value of this replication's parameters (whitened gap for a
    /// shared covariance, pairwise-minimum quadric value otherwise).
    pub snr: f64,
    /// Exponent target `-snr^2 / 8` for the log error rate.
    pub exponent: f64,
    /// Final misclustering rate per method.
    pub final_h: BTreeMap<String, f64>,
}

/// Aggregated output of a run.
#[derive(Debug, Clone, Serialize)]
pub struct CurveTable {
    pub config: ExperimentConfig,
    pub curves: Vec<MethodCurve>,
    pub replications: Vec<RepSummary>,
    pub completed_replications: usize,
    pub truncated: bool,
    pub wall_secs: f64,
    /// Initializer hyperparameters, recorded for reproducibility.
    pub init_restarts: usize,
    pub init_iters: usize,
    pub pipeline_restarts: usize,
}

struct RepResult {
    summary: RepSummary,
    /// `curves[m][t]` = misclustering rate of method `m` at iteration `t`.
    curves: Vec<Vec<f64>>,
}

/// How many initializer restarts each adjusted pipeline tries per
/// replication; the run with the best final classification objective wins.
/// The hard-EM iteration is a local search, so the composed methods restart
/// the whole init-plus-fit pipeline and let the fit's own likelihood pick.
pub const PIPELINE_RESTARTS: usize = 60;

/// Seed stepping shared with `vanilla_lloyd_restarts`.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Iteration budget suggested by the convergence theory: `ceil(ln n)`.
pub fn default_max_iters(n: usize) -> usize {
    ((n.max(2) as f64).ln().ceil() as usize).max(1)
}

fn is_homogeneous_kind(config: &ExperimentConfig, custom: &Option<GmmParams>) -> bool {
    match &config.model_kind {
        ModelKind::Sim1 => true,
        ModelKind::Sim2 => false,
        ModelKind::Custom(_) => custom
            .as_ref()
            .map(|p| p.covariance.is_homogeneous())
            .unwrap_or(true),
    }
}

fn validate_config(config: &ExperimentConfig, custom: &Option<GmmParams>) -> Result<(), BenchError> {
    if config.replications == 0 {
        return Err(BenchError::InvalidConfig("replications must be >= 1".into()));
    }
    if config.methods.is_empty() {
        return Err(BenchError::InvalidConfig("methods must be non-empty".into()));
    }
    if config.max_iters == 0 {
        return Err(BenchError::InvalidConfig("max_iters must be >= 1".into()));
    }
    if !(config.ridge >= 0.0) {
        return Err(BenchError::InvalidConfig("ridge must be >= 0".into()));
    }
    let homog = is_homogeneous_kind(config, custom);
    for m in &config.methods {
        match m.adjusted() {
            Adjusted::Homogeneous if !homog => {
                return Err(BenchError::InvalidConfig(format!(
                    "method {} requires a homogeneous model",
                    m.name()
                )));
            }
            Adjusted::Heterogeneous if homog => {
                return Err(BenchError::InvalidConfig(format!(
                    "method {} requires a heterogeneous model",
                    m.name()
                )));
            }
            _ => {}
        }
    }
    let k = match &config.model_kind {
        ModelKind::Sim1 => 30,
        ModelKind::Sim2 => 3,
        ModelKind::Custom(_) => custom.as_ref().map(|p| p.k).unwrap_or(2),
    };
    if config.n < k {
        return Err(BenchError::InvalidConfig(format!(
            "n = {} is smaller than k = {k}",
            config.n
        )));
    }
    Ok(())
}

fn run_replication(
    config: &ExperimentConfig,
    custom: &Option<GmmParams>,
    rep: usize,
) -> Result<RepResult, BenchError> {
    let base = config.base_seed;
    let (params, params_seed) = match &config.model_kind {
        ModelKind::Sim1 => {
            let s = derive_seed(base, rep as u64, STREAM_PARAMS);
            (make_sim1(s), Some(s))
        }
        ModelKind::Sim2 => {
            let s = derive_seed(base, rep as u64, STREAM_PARAMS);
            (make_sim2(s), Some(s))
        }
        ModelKind::Custom(_) => (custom.clone().expect("custom params loaded"), None),
    };
    let k = params.k;
    let assignment = balanced_assignment(config.n, k);
    let data_seed = derive_seed(base, rep as u64, STREAM_DATA);
    let data = sample(&params, &assignment, data_seed)?;

    let init_stream = |kind: InitKind| -> u64 {
        match kind {
            InitKind::Vanilla => derive_seed(base, rep as u64, STREAM_INIT_VANILLA),
            InitKind::Spectral => derive_seed(base, rep as u64, STREAM_INIT_SPECTRAL),
        }
    };
    let init_at = |kind: InitKind, r: usize| -> Result<Vec<usize>, BenchError> {
        let s = init_stream(kind).wrapping_add((r as u64).wrapping_mul(GOLDEN));
        Ok(match kind {
            InitKind::Vanilla => vanilla_lloyd(&data, k, s, DEFAULT_INIT_ITERS)?.labels,
            InitKind::Spectral => spectral_init(&data, k, s)?,
        })
    };

    let target_len = config.max_iters + 1;
    let mut curves = Vec::with_capacity(config.methods.len());
    let mut final_h = BTreeMap::new();
    for method in &config.methods {
        let curve = match method.adjusted() {
            Adjusted::None => {
                let labels = match method.init() {
                    InitKind::Vanilla => {
                        vanilla_lloyd_restarts(
                            &data,
                            k,
                            init_stream(InitKind::Vanilla),
                            DEFAULT_INIT_ITERS,
                            DEFAULT_RESTARTS,
                        )?
                        .labels
                    }
                    InitKind::Spectral => spectral_init(&data, k, init_stream(InitKind::Spectral))?,
                };
                let (h, _) = misclustering_rate(&labels, &assignment, k)?;
                vec![h; target_len]
            }
            Adjusted::Homogeneous | Adjusted::Heterogeneous => {
                let mut best: Option<(f64, FitTrace)> = None;
                for r in 0..PIPELINE_RESTARTS {
                    let init = init_at(method.init(), r)?;
                    let trace = match method.adjusted() {
                        Adjusted::Homogeneous => {
                            adjusted_lloyd_homog(&data, k, &init, config.max_iters, config.ridge)?
                        }
                        _ => {
                            adjusted_lloyd_hetero(&data, k, &init, config.max_iters, config.ridge)?
                        }
                    };
                    let objective = *trace.objective.last().expect("at least one iteration");
                    if best.as_ref().map_or(true, |(b, _)| objective < *b) {
                        best = Some((objective, trace));
                    }
                }
                let trace = best.expect("pipeline ran").1;
                let mut curve = trace.h_curve.clone().expect("truth is present");
                let last = *curve.last().expect("curve has iteration 0");
                curve.resize(target_len, last);
                curve
            }
        };
        final_h.insert(method.name().to_string(), *curve.last().unwrap());
        curves.push(curve);
    }

    let snr = if params.covariance.is_homogeneous() {
        snr_homogeneous(&params)?
    } else {
        snr_hetero(&params)?.snr_prime
    };
    Ok(RepResult {
        summary: RepSummary {
            index: rep,
            params_seed,
            data_seed,
            snr,
            exponent: -snr * snr / 8.0,
            final_h,
        },
        curves,
    })
}

fn aggregate(
    config: &ExperimentConfig,
    results: Vec<RepResult>,
    truncated: bool,
    wall_secs: f64,
) -> CurveTable {
    let reps = results.len();
    let target_len = config.max_iters + 1;
    let mut curves = Vec::with_capacity(config.methods.len());
    for (mi, method) in config.methods.iter().enumerate() {
        let mut mean_h = vec![0.0; target_len];
        let mut mean_ln_h = vec![f64::NAN; target_len];
        let mut n_zero = vec![0usize; target_len];
        for it in 0..target_len {
            let mut sum = 0.0;
            let mut ln_sum = 0.0;
            let mut ln_count = 0usize;
            for r in &results {
                let h = r.curves[mi][it];
                sum += h;
                if h > 0.0 {
                    ln_sum += h.ln();
                    ln_count += 1;
                } else {
                    n_zero[it] += 1;
                }
            }
            mean_h[it] = if reps > 0 { sum / reps as f64 } else { f64::NAN };
            if ln_count > 0 {
                mean_ln_h[it] = ln_sum / ln_count as f64;
            }
        }
        curves.push(MethodCurve {
            method: method.name().to_string(),
            mean_h,
            mean_ln_h,
            n_zero_reps: n_zero,
        });
    }
    CurveTable {
        config: config.clone(),
        curves,
        replications: results.into_iter().map(|r| r.summary).collect(),
        completed_replications: reps,
        truncated,
        wall_secs,
        init_restarts: DEFAULT_RESTARTS,
        init_iters: DEFAULT_INIT_ITERS,
        pipeline_restarts: PIPELINE_RESTARTS,
    }
}

/// Run the experiment single-threaded.
pub fn run_experiment(config: &ExperimentConfig) -> Result<CurveTable, BenchError> {
    run_experiment_with_workers(config, 1)
}

/// Run the experiment with up to `workers` replications in flight. Results
/// are merged by replication index, so the worker count never affects the
/// output values.
pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<CurveTable, BenchError> {
    let custom = match &config.model_kind {
        ModelKind::Custom(path) => Some(read_params_json(std::path::Path::new(path))?),
        _ => None,
    };
    validate_config(config, &custom)?;

    let start = Instant::now();
    let workers = workers.max(1);
    let pool = (workers > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(workers).build())
        .transpose()
        .map_err(|e| BenchError::InvalidConfig(format!("thread pool: {e}")))?;
    let mut results: Vec<RepResult> = Vec::with_capacity(config.replications);
    let mut truncated = false;
    let mut next = 0usize;

    let wrap = |rep: usize, e: BenchError| BenchError::Replication {
        index: rep,
        message: e.to_string(),
    };

    while next < config.replications {
        if let Some(budget) = config.max_seconds {
            if next > 0 && start.elapsed().as_secs_f64() > budget {
                truncated = true;
                break;
            }
        }
        let hi = (next + workers).min(config.replications);
        match &pool {
            None => {
                results.push(run_replication(config, &custom, next).map_err(|e| wrap(next, e))?);
            }
            Some(pool) => {
                use rayon::prelude::*;
                let chunk: Result<Vec<RepResult>, BenchError> = pool.install(|| {
                    (next..hi)
                        .into_par_iter()
                        .map(|rep| run_replication(config, &custom, rep).map_err(|e| wrap(rep, e)))
                        .collect()
                });
                results.extend(chunk?);
            }
        }
        next = hi;
    }

    Ok(aggregate(config, results, truncated, start.elapsed().as_secs_f64()))
}
