//! `pivotprune` — exact pivot-pruned suffix retrieval from the command line.
//!
//! The pipeline: `extract` an event log into a dataset, select `pivots`,
//! build an `index`, then answer `query`/`knn` requests, `verify` them
//! against exhaustive comparison, or measure pruning on synthetic data with
//! `bench`. All commands are deterministic given their arguments; machine
//! output is JSON (one document, or one record per line for query streams).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pivotprune::DistanceSpec;

#[derive(Parser)]
#[command(
    name = "pivotprune",
    version,
    about = "Exact pivot-pruned similarity retrieval for process suffixes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an event-log CSV and extract all suffixes into a dataset file.
    Extract(ExtractArgs),
    /// Select pivots with the greedy farthest-point heuristic.
    Pivots(PivotsArgs),
    /// Precompute the suffix-to-pivot distance matrix and persist it.
    Index(IndexArgs),
    /// Run range queries (all suffixes within --tau of each query).
    Query(QueryArgs),
    /// Run k-nearest-neighbor queries.
    Knn(KnnArgs),
    /// Run pruned and exhaustive engines side by side and compare results.
    /// Exits 0 only at accuracy 1.0.
    Verify(VerifyArgs),
    /// Measure pruning on seeded synthetic data, counting evaluations.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Event-log CSV with case_id, activity, timestamp columns.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Where to write the dataset JSON.
    #[arg(long)]
    out: PathBuf,
    /// Drop suffixes shorter than this [default: 1].
    #[arg(long)]
    min_length: Option<usize>,
    /// Drop suffixes longer than this [default: unbounded].
    #[arg(long)]
    max_length: Option<usize>,
    /// Do not emit the cut at position 1 (the full trace).
    #[arg(long)]
    no_full_trace: bool,
    /// TOML config file; flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PivotsArgs {
    /// Dataset JSON produced by `extract` (or by hand).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Number of pivots [default: min(32, ceil(sqrt(n)))].
    #[arg(long)]
    k: Option<usize>,
    /// Row index of the first pivot [default: 0].
    #[arg(long)]
    seed_index: Option<usize>,
    /// Distance kind: euclidean, angular, or levenshtein [default: euclidean].
    #[arg(long)]
    distance: Option<DistanceSpec>,
    /// Where to write the pivot list JSON.
    #[arg(long)]
    out: PathBuf,
    /// TOML config file; flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    /// Dataset JSON.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Pivot list JSON produced by `pivots`.
    #[arg(long)]
    pivots: PathBuf,
    /// Distance kind; must match the pivot list when given.
    #[arg(long)]
    distance: Option<DistanceSpec>,
    /// Index file stem: writes <out>.meta and <out>.pvtb.
    #[arg(long)]
    out: PathBuf,
    /// TOML config file; flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    common: QueryCommon,
    /// Range threshold: return suffixes with d <= tau.
    #[arg(long)]
    tau: Option<f64>,
    /// Evaluate exact distances for bound-accepted matches too.
    #[arg(long)]
    exact_distances: bool,
}

#[derive(Args)]
struct KnnArgs {
    #[command(flatten)]
    common: QueryCommon,
    /// Number of nearest neighbors per query.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct QueryCommon {
    /// Dataset JSON the index was built on.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Index file stem (as passed to `index --out`).
    #[arg(long)]
    index: Option<PathBuf>,
    /// Dataset JSON holding the query suffixes.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Queries per scheduling batch [default: 500].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Concurrent workers [default: available parallelism].
    #[arg(long)]
    workers: Option<usize>,
    /// Write JSONL records here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// TOML config file; flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: QueryCommon,
    /// Verify range queries at this threshold.
    #[arg(long, conflicts_with = "knn_k")]
    tau: Option<f64>,
    /// Verify k-NN queries with this k.
    #[arg(long)]
    knn_k: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Synthetic dataset size [default: 10000].
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian clusters (or sequence templates for levenshtein) [default: 8].
    #[arg(long)]
    clusters: Option<usize>,
    /// Feature dimension (or template length for levenshtein) [default: 8].
    #[arg(long)]
    dim: Option<usize>,
    /// Pivot counts to sweep, comma separated [default: 16].
    #[arg(long, value_delimiter = ',')]
    k_pivots: Option<Vec<usize>>,
    /// Number of queries sampled from the dataset [default: 100].
    #[arg(long)]
    queries: Option<usize>,
    /// Seed for data, threshold, and query sampling [default: 42].
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Distance kind [default: euclidean].
    #[arg(long)]
    distance: Option<DistanceSpec>,
    /// Percentile of sampled pairwise distances used as tau [default: 5].
    #[arg(long)]
    tau_percentile: Option<f64>,
    /// Concurrent workers [default: available parallelism].
    #[arg(long)]
    workers: Option<usize>,
    /// Write the result table as JSON here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// TOML config file; flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Extract(args) => commands::extract(args),
        Command::Pivots(args) => commands::pivots(args),
        Command::Index(args) => commands::index(args),
        Command::Query(args) => commands::query(args),
        Command::Knn(args) => commands::knn(args),
        Command::Verify(args) => commands::verify(args),
        Command::Bench(args) => commands::bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
