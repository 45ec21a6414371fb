//! `qubo-gnn` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qubo_gnn::apps::{
    build_mvc_qubo, build_wmis_qubo, interval_graph, read_intervals_csv, read_vector_csv,
    threshold_correlation_graph, AppError, CorrelationMatrix,
};
use qubo_gnn::baselines::brute_force_min;
use qubo_gnn::bench::{
    parse_hyperparams_csv, run_gset_benchmark, run_regular_benchmark, BenchConfig, BenchError,
    BenchProblem, BenchReport, InstanceSource,
};
use qubo_gnn::gnn::{Architecture, GnnError, TrainConfig};
use qubo_gnn::graph::{parse_edge_list, parse_gset, Graph};
use qubo_gnn::qubo::{build_maxcut_qubo, build_mis_qubo, cut_size, QuboInstance};
use qubo_gnn::solver::{solve, ProblemKind, SolveOptions, SolverError};
use qubo_gnn::{bits, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qubo-gnn", version, about = "Graph neural network QUBO solver")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on one instance and print the best assignment as JSON.
    Solve(SolveArgs),
    /// Benchmark on generated random d-regular graphs.
    BenchRegular(BenchRegularArgs),
    /// Benchmark MaxCut on Gset files with tabulated hyperparameters.
    BenchGset(BenchGsetArgs),
    /// Exact minimum by enumeration (at most 26 variables).
    Oracle(InstanceArgs),
    /// Write an application or graph problem as a QUBO file.
    Encode {
        #[command(subcommand)]
        target: EncodeTarget,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Maxcut,
    Mis,
    Generic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// 1-based `n m` header then `i j w` lines
    Gset,
    /// 0-based variant of the Gset layout
    Edgelist,
    /// QUBO term file (`i j c` lines)
    Qubo,
}

#[derive(Args)]
struct InstanceArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "maxcut")]
    problem: Problem,
    #[arg(long, value_enum, default_value = "gset")]
    format: Format,
    /// MIS penalty P
    #[arg(long, default_value_t = 2.0)]
    penalty: f64,
    /// Write JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Epochs without loss improvement before stopping
    #[arg(long)]
    patience: Option<usize>,
    /// Minimum loss decrease that counts as improvement
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Projection threshold; 1.0 reproduces truncation of p
    #[arg(long)]
    threshold: Option<f64>,
    /// Embedding width d0; requires --hidden-dims
    #[arg(long, requires = "hidden_dims")]
    embedding_dim: Option<usize>,
    /// Comma-separated hidden widths
    #[arg(long, value_delimiter = ',', requires = "embedding_dim")]
    hidden_dims: Option<Vec<usize>>,
    /// Worker threads for concurrent shots
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Greedy single-bit-flip descent on every shot's best candidate
    #[arg(long)]
    polish: bool,
}

impl TrainArgs {
    fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.shots {
            cfg.shots = v;
        }
        if let Some(v) = self.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.patience {
            cfg.patience = v;
        }
        if let Some(v) = self.tol {
            cfg.abs_tolerance = v;
        }
        if let Some(v) = self.dropout {
            cfg.dropout = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let (Some(d0), Some(hidden)) = (self.embedding_dim, &self.hidden_dims) {
            cfg.architecture = Some(Architecture {
                embedding_dim: d0,
                hidden_dims: hidden.clone(),
            });
        }
        cfg
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            polish: self.polish,
            threads: self.threads,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchKind {
    Maxcut,
    Mis,
}

#[derive(Args)]
struct BenchRegularArgs {
    #[arg(long, value_enum, default_value = "maxcut")]
    problem: BenchKind,
    /// Comma-separated graph sizes
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 2.0)]
    penalty: f64,
    #[arg(long, default_value_t = qubo_gnn::bench::DEFAULT_RESAMPLES)]
    resamples: usize,
    #[command(flatten)]
    train: TrainArgs,
    /// Report JSON path; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-instance rows as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchGsetArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Hyperparameter CSV replacing the built-in table
    #[arg(long)]
    hyperparams: Option<PathBuf>,
    /// Override a best-known cut, e.g. G14=3064
    #[arg(long, value_parser = parse_best_known)]
    best_known: Vec<(String, f64)>,
    /// Use the size-based default architecture for files without a row
    #[arg(long)]
    allow_default_hyperparams: bool,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EncodeTarget {
    /// MaxCut or MIS QUBO of a graph file
    Graph(InstanceArgs),
    /// Weighted MIS over a thresholded correlation matrix
    Wmis {
        /// Whitespace-delimited dense correlation matrix
        #[arg(long)]
        correlation: PathBuf,
        /// CSV with a `value` column of per-asset weights
        #[arg(long)]
        returns: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        penalty: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum vertex cover over the overlap graph of intervals
    Mvc {
        /// CSV with `start,end` columns
        #[arg(long)]
        intervals: PathBuf,
        /// CSV with a `value` column of per-interval costs
        #[arg(long)]
        costs: PathBuf,
        #[arg(long)]
        penalty: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_best_known(s: &str) -> Result<(String, f64), String> {
    let (name, cut) = s.split_once('=').ok_or("expected NAME=CUT")?;
    let cut = cut.parse().map_err(|_| format!("bad cut value {cut:?}"))?;
    Ok((name.to_string(), cut))
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let usage = matches!(
            e,
            Error::Gnn(GnnError::InvalidConfig(_) | GnnError::InvalidDims(_))
                | Error::Solver(SolverError::Training(GnnError::InvalidConfig(_) | GnnError::InvalidDims(_)))
                | Error::Bench(BenchError::InvalidConfig(_) | BenchError::MissingHyperparams(_))
                | Error::App(AppError::InvalidThreshold(_))
        );
        if usage {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

macro_rules! runtime {
    ($e:expr) => {
        $e.map_err(|e| Failure::Runtime(e.to_string()))?
    };
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::BenchRegular(a) => cmd_bench_regular(a),
        Command::BenchGset(a) => cmd_bench_gset(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Encode { target } => cmd_encode(target),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => runtime!(std::fs::write(p, text)),
        None => {
            let mut stdout = std::io::stdout().lock();
            runtime!(stdout.write_all(text.as_bytes()));
            if !text.ends_with('\n') {
                runtime!(stdout.write_all(b"\n"));
            }
        }
    }
    Ok(())
}

/// Loads an instance, returning the graph the GNN runs on and the QUBO.
fn load_instance(a: &InstanceArgs) -> Result<(Graph, QuboInstance, ProblemKind), Failure> {
    let text = read_text(&a.input)?;
    let at = |e: &dyn std::fmt::Display| Failure::Runtime(format!("{}: {e}", a.input.display()));
    match (a.format, a.problem) {
        (Format::Qubo, Problem::Generic) => {
            let q = QuboInstance::from_text(&text).map_err(|e| at(&e))?;
            Ok((q.interaction_graph(), q, ProblemKind::Generic))
        }
        (Format::Qubo, _) => Err(Failure::Usage(
            "QUBO files carry no graph; use --problem generic".into(),
        )),
        (_, Problem::Generic) => Err(Failure::Usage(
            "--problem generic needs --format qubo".into(),
        )),
        (f, p) => {
            let g = if f == Format::Gset { parse_gset(&text) } else { parse_edge_list(&text) };
            let g = g.map_err(|e| at(&e))?;
            if p == Problem::Maxcut {
                let q = build_maxcut_qubo(&g);
                Ok((g, q, ProblemKind::MaxCut))
            } else {
                let q = build_mis_qubo(&g, a.penalty).map_err(|e| Failure::Usage(e.to_string()))?;
                Ok((g, q, ProblemKind::Mis))
            }
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let cfg = a.train.apply(TrainConfig::default());
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (g, q, kind) = load_instance(&a.instance)?;
    let result = solve(&g, &q, kind, &cfg, &a.train.options()).map_err(Error::from)?;
    log::info!("energy {} metric {}", result.energy, result.metric);
    emit(a.instance.out.as_deref(), &runtime!(serde_json::to_string_pretty(&result)))
}

fn cmd_oracle(a: InstanceArgs) -> Result<(), Failure> {
    let (g, q, kind) = load_instance(&a)?;
    let (x, energy) = brute_force_min(&q).map_err(|e| Failure::Usage(e.to_string()))?;
    let metric = match kind {
        ProblemKind::MaxCut => runtime!(cut_size(&g, &x)),
        ProblemKind::Mis => x.iter().filter(|&&b| b).count() as f64,
        ProblemKind::Generic => energy,
    };
    let doc = json!({ "bitstring": bits::to_string(&x), "energy": energy, "metric": metric });
    emit(a.out.as_deref(), &runtime!(serde_json::to_string_pretty(&doc)))
}

fn bench_problem(k: BenchKind) -> BenchProblem {
    match k {
        BenchKind::Maxcut => BenchProblem::MaxCut,
        BenchKind::Mis => BenchProblem::Mis,
    }
}

fn write_report(report: &BenchReport, out: Option<&Path>, csv: Option<&Path>) -> Result<(), Failure> {
    if let Some(p) = csv {
        let f = runtime!(File::create(p));
        report.write_rows_csv(f).map_err(Error::from)?;
    }
    emit(out, &report.to_json().map_err(Error::from)?)
}

fn cmd_bench_regular(a: BenchRegularArgs) -> Result<(), Failure> {
    let mut cfg = BenchConfig::new(
        bench_problem(a.problem),
        InstanceSource::Regular {
            sizes: a.sizes,
            degree: a.degree,
            instances: a.instances,
        },
    );
    // --seed is the master seed; per-instance seeds derive from it
    cfg.master_seed = a.train.seed.unwrap_or(0);
    cfg.train = a.train.apply(TrainConfig::default());
    cfg.penalty = a.penalty;
    cfg.polish = a.train.polish;
    cfg.threads = a.train.threads;
    cfg.resamples = a.resamples;
    let report = run_regular_benchmark(&cfg).map_err(Error::from)?;
    write_report(&report, a.out.as_deref(), a.csv.as_deref())
}

fn cmd_bench_gset(a: BenchGsetArgs) -> Result<(), Failure> {
    let mut cfg = BenchConfig::new(BenchProblem::MaxCut, InstanceSource::Gset { paths: a.files });
    cfg.master_seed = a.train.seed.unwrap_or(0);
    cfg.train = a.train.apply(TrainConfig::default());
    cfg.polish = a.train.polish;
    cfg.threads = a.train.threads;
    cfg.allow_default_hyperparams = a.allow_default_hyperparams;
    if let Some(p) = &a.hyperparams {
        let f = File::open(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
        cfg.hyperparams = parse_hyperparams_csv(BufReader::new(f)).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let best: BTreeMap<String, f64> = a.best_known.into_iter().collect();
    let report = run_gset_benchmark(&cfg, &best).map_err(Error::from)?;
    write_report(&report, a.out.as_deref(), a.csv.as_deref())
}

fn open_csv(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_encode(t: EncodeTarget) -> Result<(), Failure> {
    let app = |e: AppError| Failure::from(Error::from(e));
    let (q, out) = match t {
        EncodeTarget::Graph(a) => {
            if a.problem == Problem::Generic || a.format == Format::Qubo {
                return Err(Failure::Usage("encode graph takes a graph file and maxcut or mis".into()));
            }
            let (_, q, _) = load_instance(&a)?;
            (q, a.out)
        }
        EncodeTarget::Wmis {
            correlation,
            returns,
            lambda,
            penalty,
            out,
        } => {
            let c = CorrelationMatrix::from_text(&read_text(&correlation)?).map_err(app)?;
            let mu = read_vector_csv(open_csv(&returns)?).map_err(app)?;
            let g = threshold_correlation_graph(&c, lambda).map_err(app)?;
            (build_wmis_qubo(&g, &mu, penalty).map_err(app)?, out)
        }
        EncodeTarget::Mvc {
            intervals,
            costs,
            penalty,
            out,
        } => {
            let ivs = read_intervals_csv(open_csv(&intervals)?).map_err(app)?;
            let c = read_vector_csv(open_csv(&costs)?).map_err(app)?;
            let g = interval_graph(&ivs).map_err(app)?;
            (build_mvc_qubo(&g, &c, penalty).map_err(app)?, out)
        }
    };
    emit(out.as_deref(), &q.to_text())
}
