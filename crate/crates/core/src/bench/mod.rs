//! Benchmark orchestration and JSON reports.

mod hyperparams;
mod stats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hyperparams::{find_hyperparams, gset_table, parse_hyperparams_csv, GsetHyperparams};
pub use stats::{bootstrap_stats, relative_error, DEFAULT_RESAMPLES};

use crate::baselines::{theoretical_bounds, BoundProblem};
use crate::gnn::TrainConfig;
use crate::graph::{generate_d_regular, parse_gset, Graph};
use crate::qubo::{build_maxcut_qubo, build_mis_qubo, QuboInstance};
use crate::solver::{solve, ProblemKind, SolveOptions, SolveResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no values to aggregate")]
    EmptyInput,
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error("no hyperparameters for instance {0}")]
    MissingHyperparams(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Instance { path: PathBuf, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchProblem {
    MaxCut,
    Mis,
}

impl BenchProblem {
    fn kind(self) -> ProblemKind {
        match self {
            Self::MaxCut => ProblemKind::MaxCut,
            Self::Mis => ProblemKind::Mis,
        }
    }

    fn bound(self) -> BoundProblem {
        match self {
            Self::MaxCut => BoundProblem::MaxCut,
            Self::Mis => BoundProblem::Mis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InstanceSource {
    Regular {
        sizes: Vec<usize>,
        degree: usize,
        instances: usize,
    },
    Gset {
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub problem: BenchProblem,
    pub source: InstanceSource,
    pub train: TrainConfig,
    /// MIS penalty `P`.
    pub penalty: f64,
    pub polish: bool,
    pub threads: usize,
    pub master_seed: u64,
    pub resamples: usize,
    /// Gset rows; instances are matched by file stem.
    pub hyperparams: Vec<GsetHyperparams>,
    /// Fall back to the size-based default architecture for Gset instances
    /// without a row.
    pub allow_default_hyperparams: bool,
}

impl BenchConfig {
    pub fn new(problem: BenchProblem, source: InstanceSource) -> Self {
        Self {
            problem,
            source,
            train: TrainConfig::default(),
            penalty: 2.0,
            polish: false,
            threads: 1,
            master_seed: 0,
            resamples: DEFAULT_RESAMPLES,
            hyperparams: gset_table(),
            allow_default_hyperparams: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.train
            .validate()
            .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        if self.resamples == 0 {
            return Err(BenchError::InvalidConfig("resamples must be at least 1".into()));
        }
        if !(self.penalty > 0.0) {
            return Err(BenchError::InvalidConfig(format!("penalty {} must be positive", self.penalty)));
        }
        match &self.source {
            InstanceSource::Regular {
                sizes,
                degree,
                instances,
            } => {
                if *instances == 0 {
                    return Err(BenchError::InvalidConfig("instance count must be at least 1".into()));
                }
                if sizes.is_empty() {
                    return Err(BenchError::InvalidConfig("no graph sizes given".into()));
                }
                if let Some(n) = sizes.iter().find(|&&n| n * degree % 2 == 1 || n <= *degree) {
                    return Err(BenchError::InvalidConfig(format!(
                        "no {degree}-regular graph on {n} vertices"
                    )));
                }
            }
            InstanceSource::Gset { paths } => {
                if paths.is_empty() {
                    return Err(BenchError::InvalidConfig("no Gset files given".into()));
                }
                for p in paths {
                    if !p.is_file() {
                        return Err(BenchError::File {
                            path: p.clone(),
                            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub edges: usize,
    pub degree: Option<usize>,
    pub graph_seed: Option<u64>,
    pub train_seed: u64,
    pub result: Option<SolveResult>,
    pub error: Option<String>,
    /// Theoretical upper estimate for this instance, when one applies.
    pub bound: Option<f64>,
    pub bound_ratio: Option<f64>,
    pub best_known: Option<f64>,
    pub relative_error: Option<f64>,
    pub generation_ms: f64,
    pub training_ms: f64,
}

/// Bootstrap summary of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub degree: usize,
    pub instances: usize,
    pub failures: usize,
    pub mean_metric: f64,
    pub two_sigma_metric: f64,
    pub mean_metric_per_n: f64,
    pub two_sigma_metric_per_n: f64,
    pub bound: Option<f64>,
    pub bound_ratio: Option<f64>,
    pub mean_training_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub generation_ms: f64,
    pub training_ms: f64,
    pub postprocess_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
    pub timings: Timings,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), BenchError> {
        std::fs::write(path, self.to_json()?).map_err(|source| BenchError::File {
            path: path.to_path_buf(),
            source,
        })
    }

    /// One line per row with the scalar fields.
    pub fn write_rows_csv(&self, w: impl std::io::Write) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "instance", "n", "edges", "metric", "energy", "shot_index", "epoch_found",
            "wall_time_ms", "bound_ratio", "relative_error", "error",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let res = r.result.as_ref();
            out.write_record([
                r.instance.clone(),
                r.n.to_string(),
                r.edges.to_string(),
                opt(res.map(|s| s.metric)),
                opt(res.map(|s| s.energy)),
                res.map(|s| s.shot_index.to_string()).unwrap_or_default(),
                res.map(|s| s.epoch_found.to_string()).unwrap_or_default(),
                opt(res.map(|s| s.wall_time_ms)),
                opt(r.bound_ratio),
                opt(r.relative_error),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn qubo_for(problem: BenchProblem, g: &Graph, penalty: f64) -> QuboInstance {
    match problem {
        BenchProblem::MaxCut => build_maxcut_qubo(g),
        BenchProblem::Mis => build_mis_qubo(g, penalty).expect("penalty validated"),
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Solves `instances` random d-regular graphs per size and aggregates the metric.
///
/// Graph and training seeds are drawn in order from a generator seeded with the
/// master seed. A failing instance is recorded in its row and skipped by the
/// aggregates.
pub fn run_regular_benchmark(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let start = Instant::now();
    cfg.validate()?;
    let InstanceSource::Regular {
        sizes,
        degree,
        instances,
    } = &cfg.source
    else {
        return Err(BenchError::InvalidConfig("expected a regular-graph source".into()));
    };
    let d = *degree;
    let opts = SolveOptions {
        polish: cfg.polish,
        threads: cfg.threads,
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    let mut timings = Timings::default();
    let mut rows = Vec::new();
    let mut aggregates = Vec::new();

    for &n in sizes {
        let bound = theoretical_bounds(cfg.problem.bound(), d, n).ok();
        let first_row = rows.len();
        for k in 0..*instances {
            let graph_seed: u64 = seeds.random();
            let train_seed: u64 = seeds.random();
            let t = Instant::now();
            let generated = generate_d_regular(n, d, graph_seed);
            let generation_ms = ms_since(t);
            timings.generation_ms += generation_ms;
            let mut row = BenchRow {
                instance: format!("regular-n{n}-d{d}-{k}"),
                n,
                edges: n * d / 2,
                degree: Some(d),
                graph_seed: Some(graph_seed),
                train_seed,
                result: None,
                error: None,
                bound,
                bound_ratio: None,
                best_known: None,
                relative_error: None,
                generation_ms,
                training_ms: 0.0,
            };
            match generated {
                Err(e) => row.error = Some(e.to_string()),
                Ok(g) => {
                    let q = qubo_for(cfg.problem, &g, cfg.penalty);
                    let train = TrainConfig {
                        seed: train_seed,
                        ..cfg.train.clone()
                    };
                    let t = Instant::now();
                    let solved = solve(&g, &q, cfg.problem.kind(), &train, &opts);
                    row.training_ms = ms_since(t);
                    timings.training_ms += row.training_ms;
                    match solved {
                        Ok(r) => {
                            row.bound_ratio = bound.map(|b| r.metric / b);
                            row.result = Some(r);
                        }
                        Err(e) => row.error = Some(e.to_string()),
                    }
                }
            }
            log::info!(
                "{}: {}",
                row.instance,
                row.result
                    .as_ref()
                    .map(|r| format!("metric {}", r.metric))
                    .unwrap_or_else(|| format!("failed: {}", row.error.as_deref().unwrap_or("")))
            );
            rows.push(row);
        }

        let t = Instant::now();
        let point = &rows[first_row..];
        let metrics: Vec<f64> = point
            .iter()
            .filter_map(|r| r.result.as_ref().map(|s| s.metric))
            .collect();
        if !metrics.is_empty() {
            let agg_seed = cfg.master_seed ^ n as u64;
            let (mean, two_sigma) = bootstrap_stats(&metrics, cfg.resamples, agg_seed)?;
            let per_n: Vec<f64> = metrics.iter().map(|m| m / n as f64).collect();
            let (mean_n, two_sigma_n) = bootstrap_stats(&per_n, cfg.resamples, agg_seed)?;
            let trained: Vec<f64> = point
                .iter()
                .filter(|r| r.result.is_some())
                .map(|r| r.training_ms)
                .collect();
            aggregates.push(Aggregate {
                n,
                degree: d,
                instances: point.len(),
                failures: point.len() - metrics.len(),
                mean_metric: mean,
                two_sigma_metric: two_sigma,
                mean_metric_per_n: mean_n,
                two_sigma_metric_per_n: two_sigma_n,
                bound,
                bound_ratio: bound.map(|b| mean / b),
                mean_training_ms: trained.iter().sum::<f64>() / trained.len() as f64,
            });
        }
        timings.postprocess_ms += ms_since(t);
    }

    timings.total_ms = ms_since(start);
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
        aggregates,
        timings,
    })
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Solves each Gset file as MaxCut with its tabulated hyperparameters.
///
/// `best_known` overrides the table's best-known cuts by instance name.
pub fn run_gset_benchmark(
    cfg: &BenchConfig,
    best_known: &BTreeMap<String, f64>,
) -> Result<BenchReport, BenchError> {
    let start = Instant::now();
    cfg.validate()?;
    let InstanceSource::Gset { paths } = &cfg.source else {
        return Err(BenchError::InvalidConfig("expected a Gset source".into()));
    };
    if cfg.problem != BenchProblem::MaxCut {
        return Err(BenchError::InvalidConfig("Gset benchmarks are MaxCut only".into()));
    }
    // resolve every instance before spending time on training
    let mut plan = Vec::with_capacity(paths.len());
    for path in paths {
        let name = instance_name(path);
        let row = find_hyperparams(&cfg.hyperparams, &name);
        if row.is_none() && !cfg.allow_default_hyperparams {
            return Err(BenchError::MissingHyperparams(name));
        }
        plan.push((path, name, row));
    }

    let opts = SolveOptions {
        polish: cfg.polish,
        threads: cfg.threads,
    };
    let mut timings = Timings::default();
    let mut rows = Vec::new();
    for (path, name, hp) in plan {
        let t = Instant::now();
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::File {
            path: path.clone(),
            source,
        })?;
        let g = parse_gset(&text).map_err(|e| BenchError::Instance {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let generation_ms = ms_since(t);
        timings.generation_ms += generation_ms;

        let train = match hp {
            Some(h) => h.apply(&cfg.train),
            None => cfg.train.clone(),
        };
        let best = best_known
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(&name))
            .map(|(_, &v)| v)
            .or(hp.and_then(|h| h.best_known));
        let q = build_maxcut_qubo(&g);
        let t = Instant::now();
        let solved = solve(&g, &q, ProblemKind::MaxCut, &train, &opts);
        let training_ms = ms_since(t);
        timings.training_ms += training_ms;

        let mut row = BenchRow {
            instance: name,
            n: g.n(),
            edges: g.num_edges(),
            degree: None,
            graph_seed: None,
            train_seed: train.seed,
            result: None,
            error: None,
            bound: None,
            bound_ratio: None,
            best_known: best,
            relative_error: None,
            generation_ms,
            training_ms,
        };
        match solved {
            Ok(r) => {
                row.relative_error = best.map(|b| relative_error(b, r.metric, g.num_edges()));
                log::info!("{}: cut {} (best known {:?})", row.instance, r.metric, best);
                row.result = Some(r);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    timings.total_ms = ms_since(start);
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
        aggregates: Vec::new(),
        timings,
    })
}
