//! Command-line driver: data generation, clustering, separation reports,
//! discriminant-error estimation, and the replicated experiment harness.
//!
//! Exit codes: 0 success, 2 invalid configuration or parameters, 3 numerical
//! failure, 4 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gmm_core::bayes::{mc_pair_error, minimax_exponent_bound, PairHypothesis};
use gmm_core::bench::{
    self, default_max_iters, read_dataset_csv, read_labels, read_params_json, write_curves,
    write_dataset_csv, write_labels, write_metadata, BenchError, ExperimentConfig,
};
use gmm_core::cluster::{
    adjusted_lloyd_hetero, adjusted_lloyd_homog, kmeanspp_seed, nearest_center_labels,
    spectral_init, vanilla_lloyd_restarts, ClusterError, FitTrace, DEFAULT_INIT_ITERS,
    DEFAULT_RESTARTS,
};
use gmm_core::loss::misclustering_rate;
use gmm_core::model::{balanced_assignment, sample, Dataset, ModelError};
use gmm_core::snr::{boundary, min_norm_on_boundary, snr_hetero, SnrError, DEFAULT_MIN_NORM_TOL};

#[derive(Parser)]
#[command(name = "gmm-bench", version, about = "Anisotropic Gaussian mixture clustering workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset from a parameter file.
    Generate(GenerateArgs),
    /// Cluster a dataset and write labels plus a fit report.
    Cluster(ClusterArgs),
    /// Print separation functionals of a parameter file as JSON.
    Snr(SnrArgs),
    /// Monte-Carlo testing error of the optimal rule for one cluster pair.
    Oracle(OracleArgs),
    /// Run a replicated experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Parameter JSON file.
    #[arg(long)]
    params: PathBuf,
    /// Number of observations (split as evenly as possible across clusters).
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output CSV for the observations.
    #[arg(long)]
    out_data: PathBuf,
    /// Output file for the generating labels (one per line).
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Adjusted iteration with one pooled covariance.
    Homog,
    /// Adjusted iteration with per-cluster covariances.
    Hetero,
    /// Vanilla Lloyd baseline.
    Vanilla,
    /// Spectral clustering baseline.
    Spectral,
}

#[derive(Args)]
struct ClusterArgs {
    /// Input dataset CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Initializer: kmeanspp, vanilla, spectral, or file:<labels path>.
    #[arg(long, default_value = "vanilla")]
    init: String,
    /// Iteration budget; defaults to ceil(ln n).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    ridge: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output labels file.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON fit report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Optional true labels; enables the misclustering curve in the report.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SnrArgs {
    #[arg(long)]
    params: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    params: PathBuf,
    /// Ordered cluster pair (0-based).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pair: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output curve CSV; metadata lands next to it as <stem>.meta.json.
    #[arg(long)]
    out: PathBuf,
    /// Concurrent replications.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

enum CliError {
    Invalid(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io { .. } => CliError::Io(e.to_string()),
            BenchError::Json { .. } | BenchError::Parse { .. } | BenchError::InvalidConfig(_) => {
                CliError::Invalid(e.to_string())
            }
            BenchError::Model(ref m) => match m {
                ModelError::InvalidParams(_) => CliError::Invalid(e.to_string()),
                ModelError::Num(_) => CliError::Numerical(e.to_string()),
            },
            BenchError::Cluster(ref c) => cluster_error(c, &e),
            BenchError::Snr(ref s) => snr_error(s, &e),
            BenchError::Loss(_) => CliError::Invalid(e.to_string()),
            BenchError::Replication { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

fn cluster_error(c: &ClusterError, outer: &dyn std::fmt::Display) -> CliError {
    match c {
        ClusterError::TooFewPoints { .. } | ClusterError::BadInit(_) | ClusterError::Loss(_) => {
            CliError::Invalid(outer.to_string())
        }
        ClusterError::DegenerateCovariance { .. } | ClusterError::Num(_) => {
            CliError::Numerical(outer.to_string())
        }
    }
}

fn snr_error(s: &SnrError, outer: &dyn std::fmt::Display) -> CliError {
    match s {
        SnrError::NotHomogeneous | SnrError::BadPair { .. } => CliError::Invalid(outer.to_string()),
        SnrError::Num(_) | SnrError::NumericalFailure(_) => CliError::Numerical(outer.to_string()),
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParams(_) => CliError::Invalid(e.to_string()),
            ModelError::Num(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        cluster_error(&e, &e)
    }
}

impl From<SnrError> for CliError {
    fn from(e: SnrError) -> Self {
        snr_error(&e, &e)
    }
}

impl From<gmm_core::bayes::BayesError> for CliError {
    fn from(e: gmm_core::bayes::BayesError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serialization");
    match path {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn run_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let params = read_params_json(&args.params)?;
    let labels = balanced_assignment(args.n, params.k);
    let data = sample(&params, &labels, args.seed)?;
    write_dataset_csv(&data.y, &args.out_data)?;
    write_labels(&labels, &args.out_labels)?;
    println!(
        "wrote {} observations of dimension {} to {} (labels: {})",
        args.n,
        params.d,
        args.out_data.display(),
        args.out_labels.display()
    );
    Ok(())
}

fn trace_report(trace: &FitTrace, extra: serde_json::Value) -> serde_json::Value {
    let mut report = json!({
        "iterations_run": trace.states.len(),
        "converged_at": trace.converged_at,
        "regularization_events": trace.regularization_events,
        "empty_cluster_events": trace.empty_cluster_events,
        "objective": trace.objective,
        "init_restarts": DEFAULT_RESTARTS,
        "init_iters": DEFAULT_INIT_ITERS,
    });
    if let Some(h) = &trace.h_curve {
        report["h_curve"] = json!(h);
        report["final_h"] = json!(h.last());
    }
    for (key, value) in extra.as_object().expect("extra is an object") {
        report[key] = value.clone();
    }
    report
}

fn run_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    if args.k < 1 {
        return Err(CliError::Invalid("k must be at least 1".into()));
    }
    let y = read_dataset_csv(&args.data)?;
    let truth = args.truth.as_ref().map(|p| read_labels(p)).transpose()?;
    if let Some(t) = &truth {
        if t.len() != y.rows() {
            return Err(CliError::Invalid(format!(
                "truth has {} labels for {} rows",
                t.len(),
                y.rows()
            )));
        }
    }
    let data = Dataset { y, truth, params: None };
    let iters = args.iters.unwrap_or_else(|| default_max_iters(data.n()));

    let init_labels = |data: &Dataset| -> Result<Vec<usize>, CliError> {
        if let Some(path) = args.init.strip_prefix("file:") {
            let z0 = read_labels(Path::new(path))?;
            if z0.len() != data.n() {
                return Err(CliError::Invalid(format!(
                    "initial labels have length {}, want {}",
                    z0.len(),
                    data.n()
                )));
            }
            return Ok(z0);
        }
        match args.init.as_str() {
            "kmeanspp" => {
                let centers = kmeanspp_seed(data, args.k, args.seed)?;
                Ok(nearest_center_labels(&data.y, &centers))
            }
            "vanilla" => Ok(vanilla_lloyd_restarts(
                data,
                args.k,
                args.seed,
                DEFAULT_INIT_ITERS,
                DEFAULT_RESTARTS,
            )?
            .labels),
            "spectral" => Ok(spectral_init(data, args.k, args.seed)?),
            other => Err(CliError::Invalid(format!(
                "unknown init '{other}' (expected kmeanspp, vanilla, spectral, or file:<path>)"
            ))),
        }
    };

    let (labels, report) = match args.model {
        ModelArg::Vanilla => {
            let fit = vanilla_lloyd_restarts(
                &data,
                args.k,
                args.seed,
                DEFAULT_INIT_ITERS,
                DEFAULT_RESTARTS,
            )?;
            let mut report = json!({
                "model": "vanilla",
                "iterations_run": fit.iterations_used,
                "sse": fit.sse,
                "init_restarts": DEFAULT_RESTARTS,
                "init_iters": DEFAULT_INIT_ITERS,
                "seed": args.seed,
            });
            if let Some(t) = &data.truth {
                let (h, _) = misclustering_rate(&fit.labels, t, args.k)
                    .map_err(|e| CliError::Invalid(e.to_string()))?;
                report["final_h"] = json!(h);
            }
            (fit.labels, report)
        }
        ModelArg::Spectral => {
            let labels = spectral_init(&data, args.k, args.seed)?;
            let mut report = json!({
                "model": "spectral",
                "init_restarts": DEFAULT_RESTARTS,
                "init_iters": DEFAULT_INIT_ITERS,
                "seed": args.seed,
            });
            if let Some(t) = &data.truth {
                let (h, _) = misclustering_rate(&labels, t, args.k)
                    .map_err(|e| CliError::Invalid(e.to_string()))?;
                report["final_h"] = json!(h);
            }
            (labels, report)
        }
        ModelArg::Homog | ModelArg::Hetero => {
            let z0 = init_labels(&data)?;
            let trace = match args.model {
                ModelArg::Homog => adjusted_lloyd_homog(&data, args.k, &z0, iters, args.ridge)?,
                _ => adjusted_lloyd_hetero(&data, args.k, &z0, iters, args.ridge)?,
            };
            let report = trace_report(
                &trace,
                json!({
                    "model": if matches!(args.model, ModelArg::Homog) { "homog" } else { "hetero" },
                    "init": args.init,
                    "iters": iters,
                    "ridge": args.ridge,
                    "seed": args.seed,
                }),
            );
            (trace.final_labels().to_vec(), report)
        }
    };

    write_labels(&labels, &args.out)?;
    write_json(args.report.as_deref(), &report)?;
    Ok(())
}

fn run_snr(args: &SnrArgs) -> Result<(), CliError> {
    let params = read_params_json(&args.params)?;
    let report = snr_hetero(&params)?;
    let k = params.k;
    let mut pairs = Vec::with_capacity(k);
    let mut unreachable = Vec::new();
    for a in 0..k {
        let mut row = Vec::with_capacity(k);
        for b in 0..k {
            if a == b {
                row.push(serde_json::Value::Null);
            } else {
                let v = report.snr_pairs[a][b];
                if !v.is_finite() {
                    unreachable.push(json!([a, b]));
                }
                row.push(finite_or_null(v));
            }
        }
        pairs.push(serde_json::Value::Array(row));
    }
    let exponent = {
        let s = report.snr_prime;
        if s.is_finite() {
            finite_or_null(-s * s / 8.0)
        } else {
            serde_json::Value::Null
        }
    };
    let out = json!({
        "delta": report.delta,
        "snr": report.snr,
        "snr_prime": finite_or_null(report.snr_prime),
        "snr_pairs": pairs,
        "unreachable_pairs": unreachable,
        "exponent": exponent,
    });
    write_json(None, &out)
}

fn run_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let params = read_params_json(&args.params)?;
    let (a, b) = (args.pair[0], args.pair[1]);
    if a == b || a >= params.k || b >= params.k {
        return Err(CliError::Invalid(format!(
            "pair ({a},{b}) is invalid for k={}",
            params.k
        )));
    }
    let hyp = PairHypothesis {
        theta0: params.centers.row(a).to_vec(),
        theta1: params.centers.row(b).to_vec(),
        sigma0: params.covariance.sigma(a).clone(),
        sigma1: params.covariance.sigma(b).clone(),
    };
    let (total, se) = mc_pair_error(&hyp, args.trials, args.seed)?;
    let pair_value = |x: usize, y: usize| -> Result<f64, CliError> {
        let qb = boundary(&params, x, y)?;
        Ok(2.0 * min_norm_on_boundary(&qb, DEFAULT_MIN_NORM_TOL)?.value)
    };
    let s_ab = pair_value(a, b)?;
    let s_ba = pair_value(b, a)?;
    let s_min = s_ab.min(s_ba);
    let out = json!({
        "pair": [a, b],
        "trials": args.trials,
        "seed": args.seed,
        "total_error": total,
        "std_error": se,
        "snr_prime_ab": finite_or_null(s_ab),
        "snr_prime_ba": finite_or_null(s_ba),
        "exponent_bound_ab": finite_or_null(if s_ab.is_finite() { minimax_exponent_bound(s_ab) } else { f64::INFINITY }),
        "exponent_bound_min": finite_or_null(if s_min.is_finite() { minimax_exponent_bound(s_min) } else { f64::INFINITY }),
    });
    write_json(None, &out)
}

fn run_experiment_cmd(args: &ExperimentArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", args.config.display())))?;
    let table = bench::run_experiment_with_workers(&config, args.workers)?;
    write_curves(&table, &args.out)?;
    let meta = bench::metadata_path(&args.out);
    write_metadata(&table, &meta)?;
    println!(
        "completed {} of {} replications in {:.1}s{}; curves: {}, metadata: {}",
        table.completed_replications,
        config.replications,
        table.wall_secs,
        if table.truncated { " (truncated)" } else { "" },
        args.out.display(),
        meta.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Cluster(args) => run_cluster(args),
        Command::Snr(args) => run_snr(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Experiment(args) => run_experiment_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
