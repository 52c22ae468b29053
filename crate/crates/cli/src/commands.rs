use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use pivotprune::dataset::{featurize_bag_of_activities, Dataset};
use pivotprune::ingest::{extract_suffixes, parse_csv, SuffixSpec};
use pivotprune::pivots::{default_pivot_count, greedy_farthest_point, PivotSet};
use pivotprune::query::{batch_query, write_jsonl, BatchEntry, PruneStats, QueryMode};
use pivotprune::synth;
use pivotprune::{oracle, DistanceSpec, PivotTable, VerifyMode};

use crate::config::{pick, pick_required, RunConfig};
use crate::{BenchArgs, ExtractArgs, IndexArgs, KnnArgs, PivotsArgs, QueryArgs, VerifyArgs};

const DEFAULT_BATCH_SIZE: usize = 500;
const DEFAULT_DISTANCE: DistanceSpec = DistanceSpec::Euclidean;

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn parse_distance(config: &RunConfig) -> anyhow::Result<Option<DistanceSpec>> {
    config
        .distance
        .as_deref()
        .map(|s| s.parse::<DistanceSpec>().map_err(anyhow::Error::from))
        .transpose()
}

/// Loads a dataset and, when the distance works on vectors but the file
/// carries none, derives bag-of-activities features.
fn load_prepared(path: &Path, spec: DistanceSpec) -> anyhow::Result<Dataset> {
    let data =
        Dataset::load(path).with_context(|| format!("cannot load dataset {}", path.display()))?;
    if spec.requires_features() && data.feature_dim().is_none() {
        eprintln!(
            "note: {} has no feature vectors; using bag-of-activities counts",
            path.display()
        );
        return Ok(featurize_bag_of_activities(&data));
    }
    Ok(data)
}

/// On-disk pivot list, the hand-off between `pivots` and `index`.
#[derive(Serialize, Deserialize)]
struct PivotFile {
    distance: DistanceSpec,
    seed_index: usize,
    k: usize,
    coverage_radius: f64,
    pivot_indices: Vec<usize>,
    pivot_ids: Vec<String>,
}

pub fn extract(args: ExtractArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_deref())?;
    let log_path = pick_required(args.log, config.log, "log")?;
    let log = parse_csv(&log_path)
        .with_context(|| format!("cannot parse event log {}", log_path.display()))?;
    let spec = SuffixSpec {
        min_length: args.min_length.unwrap_or(1),
        max_length: args.max_length,
        include_full_trace: !args.no_full_trace,
    };
    let data = extract_suffixes(&log, &spec)?;
    data.save(&args.out)
        .with_context(|| format!("cannot write dataset {}", args.out.display()))?;
    println!(
        "extracted {} suffixes from {} cases ({} activities) -> {}",
        data.len(),
        log.cases.len(),
        data.alphabet().len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn pivots(args: PivotsArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_deref())?;
    let spec = pick(args.distance, parse_distance(&config)?, DEFAULT_DISTANCE);
    let dataset_path = pick_required(args.dataset, config.dataset, "dataset")?;
    let data = load_prepared(&dataset_path, spec)?;
    let k = pick(args.k, config.k_pivots, default_pivot_count(data.len()));
    let seed_index = pick(args.seed_index, config.seed_index, 0);

    let start = Instant::now();
    let pivots = greedy_farthest_point(&data, spec, k, seed_index)?;
    let elapsed = start.elapsed();

    println!(
        "selected {k} pivots (distance={spec}, seed_index={seed_index}, n={})",
        data.len()
    );
    println!("{:>4}  {:>8}  id", "#", "row");
    for (i, &row) in pivots.indices().iter().enumerate() {
        println!("{:>4}  {row:>8}  {}", i + 1, data.suffix(row).id);
    }
    println!("coverage radius: {}", pivots.coverage_radius());
    eprintln!("selection took {:.1?}", elapsed);

    let file = PivotFile {
        distance: spec,
        seed_index,
        k,
        coverage_radius: pivots.coverage_radius(),
        pivot_indices: pivots.indices().to_vec(),
        pivot_ids: pivots
            .indices()
            .iter()
            .map(|&r| data.suffix(r).id.clone())
            .collect(),
    };
    write_json(&args.out, &file)?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn index(args: IndexArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_deref())?;
    let text = std::fs::read_to_string(&args.pivots)
        .with_context(|| format!("cannot read pivot list {}", args.pivots.display()))?;
    let pivot_file: PivotFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse pivot list {}", args.pivots.display()))?;
    let spec = pick(args.distance, parse_distance(&config)?, pivot_file.distance);
    if spec != pivot_file.distance {
        bail!(
            "distance `{spec}` conflicts with pivot list built for `{}`",
            pivot_file.distance
        );
    }
    let dataset_path = pick_required(args.dataset, config.dataset, "dataset")?;
    let data = load_prepared(&dataset_path, spec)?;
    for (&row, id) in pivot_file.pivot_indices.iter().zip(&pivot_file.pivot_ids) {
        if row >= data.len() || data.suffix(row).id != *id {
            bail!("pivot list does not match dataset: row {row} should be `{id}`");
        }
    }
    let pivots = PivotSet::from_indices(&data, spec, pivot_file.pivot_indices)?;

    let start = Instant::now();
    let table = PivotTable::build(&data, spec, &pivots)?;
    let elapsed = start.elapsed();
    table
        .save(&args.out)
        .with_context(|| format!("cannot write index {}", args.out.display()))?;
    println!(
        "built {}x{} index (distance={spec}, fingerprint={:016x})",
        table.n_rows(),
        table.n_pivots(),
        table.dataset_fingerprint()
    );
    println!(
        "wrote {}.meta and {}.pvtb",
        args.out.display(),
        args.out.display()
    );
    eprintln!("build took {:.1?}", elapsed);
    Ok(ExitCode::SUCCESS)
}

pub fn query(args: QueryArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.common.config.as_deref())?;
    let tau = pick_required(args.tau, config.tau, "tau")?;
    if tau < 0.0 {
        bail!("--tau must be non-negative");
    }
    run_query_stream(
        args.common,
        config,
        QueryMode::Range {
            tau,
            exact_distances: args.exact_distances,
        },
    )
}

pub fn knn(args: KnnArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.common.config.as_deref())?;
    let k = pick_required(args.k, config.knn, "k")?;
    run_query_stream(args.common, config, QueryMode::Knn { k })
}

struct LoadedIndex {
    data: Dataset,
    queries: Vec<pivotprune::Suffix>,
    table: PivotTable,
}

fn load_for_queries(
    common: &crate::QueryCommon,
    config: &RunConfig,
) -> anyhow::Result<LoadedIndex> {
    let dataset_path = pick_required(common.dataset.clone(), config.dataset.clone(), "dataset")?;
    let index_path = pick_required(common.index.clone(), config.index.clone(), "index")?;
    let queries_path = pick_required(common.queries.clone(), config.queries.clone(), "queries")?;

    // The distance kind comes from the index metadata; peek at it first so
    // the dataset can be featurized consistently before the full load.
    let spec = PivotTable::peek_distance(&index_path)
        .with_context(|| format!("cannot read index metadata {}.meta", index_path.display()))?;
    let data = load_prepared(&dataset_path, spec)?;
    let table = PivotTable::load(&index_path, &data)
        .with_context(|| format!("cannot load index {}", index_path.display()))?;

    let query_data = Dataset::load(&queries_path)
        .with_context(|| format!("cannot load queries {}", queries_path.display()))?;
    let needs_featurizing = spec.requires_features() && query_data.feature_dim().is_none();
    if (needs_featurizing || spec == DistanceSpec::Levenshtein)
        && query_data.alphabet() != data.alphabet()
    {
        bail!(
            "queries {} use a different activity alphabet than the dataset",
            queries_path.display()
        );
    }
    let query_data = if needs_featurizing {
        featurize_bag_of_activities(&query_data)
    } else {
        query_data
    };
    Ok(LoadedIndex {
        data,
        queries: query_data.suffixes().to_vec(),
        table,
    })
}

fn run_query_stream(
    common: crate::QueryCommon,
    config: RunConfig,
    mode: QueryMode,
) -> anyhow::Result<ExitCode> {
    let batch_size = pick(common.batch_size, config.batch_size, DEFAULT_BATCH_SIZE);
    let workers = pick(common.workers, config.workers, default_workers());
    if batch_size == 0 || workers == 0 {
        bail!("--batch-size and --workers must be at least 1");
    }
    let output = common.output.clone().or(config.output.clone());
    let loaded = load_for_queries(&common, &config)?;

    let n_batches = loaded.queries.len().div_ceil(batch_size);
    let mut entries: Vec<BatchEntry> = Vec::with_capacity(loaded.queries.len());
    let mut aggregate = PruneStats::default();
    let mut failures = 0usize;
    let start = Instant::now();
    for (bi, chunk) in loaded.queries.chunks(batch_size).enumerate() {
        let batch_start = Instant::now();
        let batch = batch_query(
            &loaded.table,
            &loaded.data,
            chunk,
            mode,
            batch_size,
            workers,
        );
        aggregate.merge(&batch.aggregate);
        failures += batch.entries.iter().filter(|e| e.outcome.is_err()).count();
        eprintln!(
            "batch {}/{}: {} queries, computed {}, pruned {}, accepted {} ({:.1?})",
            bi + 1,
            n_batches,
            chunk.len(),
            batch.aggregate.computed,
            batch.aggregate.pruned_lb,
            batch.aggregate.accepted_ub,
            batch_start.elapsed()
        );
        entries.extend(batch.entries);
    }

    match &output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("cannot write results {}", path.display()))?;
            write_jsonl(std::io::BufWriter::new(file), &entries)?;
            println!("wrote {} records -> {}", entries.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout().lock();
            write_jsonl(stdout, &entries)?;
        }
    }
    eprintln!(
        "{} queries in {:.1?}: computed {}, pruned {}, accepted {}, pivot evals {}{}",
        loaded.queries.len(),
        start.elapsed(),
        aggregate.computed,
        aggregate.pruned_lb,
        aggregate.accepted_ub,
        aggregate.pivot_evals,
        if failures > 0 {
            format!(", {failures} FAILED")
        } else {
            String::new()
        }
    );
    Ok(ExitCode::SUCCESS)
}

pub fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.common.config.as_deref())?;
    let mode = match (args.tau.or(config.tau), args.knn_k.or(config.knn)) {
        (Some(tau), None) => VerifyMode::Range { tau },
        (None, Some(k)) => VerifyMode::Knn { k },
        (None, None) => bail!("one of --tau or --knn-k is required"),
        (Some(_), Some(_)) => bail!("--tau and --knn-k are mutually exclusive"),
    };
    let output = args.common.output.clone().or(config.output.clone());
    let loaded = load_for_queries(&args.common, &config)?;

    let start = Instant::now();
    let report = oracle::verify(&loaded.table, &loaded.data, &loaded.queries, mode);
    let elapsed = start.elapsed();

    match mode {
        VerifyMode::Range { tau } => {
            println!(
                "verified {} range queries (tau={tau})",
                report.queries_checked
            )
        }
        VerifyMode::Knn { k } => {
            println!("verified {} knn queries (k={k})", report.queries_checked)
        }
    }
    println!("  accuracy:             {:.6}", report.accuracy);
    println!("  mismatches:           {}", report.mismatches.len());
    println!("  baseline evaluations: {}", report.evaluations_baseline);
    println!(
        "  pruned evaluations:   {} (ratio {:.4})",
        report.evaluations_pruned,
        report.evaluation_ratio()
    );
    eprintln!("verification took {:.1?}", elapsed);
    for m in report.mismatches.iter().take(10) {
        println!("  MISMATCH {}: {}", m.query_id, m.description);
    }
    if let Some(path) = output {
        write_json(&path, &report)?;
        println!("wrote {}", path.display());
    }
    if report.accuracy < 1.0 {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchRow {
    k_pivots: usize,
    computed: u64,
    pruned_lb: u64,
    accepted_ub: u64,
    pivot_evals: u64,
    brute_force_evals: u64,
    evaluation_ratio: f64,
}

#[derive(Serialize)]
struct BenchReport {
    distance: DistanceSpec,
    n: usize,
    dim: usize,
    clusters: usize,
    queries: usize,
    rng_seed: u64,
    tau_percentile: f64,
    tau: f64,
    rows: Vec<BenchRow>,
}

pub fn bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_deref())?;
    let spec = pick(args.distance, parse_distance(&config)?, DEFAULT_DISTANCE);
    let n = args.n.unwrap_or(10_000);
    let clusters = args.clusters.unwrap_or(8);
    let dim = args.dim.unwrap_or(8);
    let k_list = args.k_pivots.unwrap_or_else(|| vec![16]);
    let n_queries = args.queries.unwrap_or(100);
    let rng_seed = pick(args.rng_seed, config.rng_seed, 42);
    let tau_percentile = args.tau_percentile.unwrap_or(5.0);
    let workers = pick(args.workers, config.workers, default_workers());
    if n_queries > n {
        bail!("--queries cannot exceed --n");
    }

    let data = match spec {
        DistanceSpec::Euclidean | DistanceSpec::Angular => {
            synth::gaussian_clusters(n, dim, clusters, rng_seed)
        }
        // clusters = template count, dim = template length.
        DistanceSpec::Levenshtein => synth::mutated_sequences(n, clusters, dim, 10, 4, rng_seed),
    };
    let tau = synth::sample_distance_percentile(&data, spec, 20_000, rng_seed + 1, tau_percentile)?;
    let queries: Vec<pivotprune::Suffix> = synth::sample_row_indices(n, n_queries, rng_seed + 2)
        .into_iter()
        .map(|i| data.suffix(i).clone())
        .collect();
    println!(
        "synthetic benchmark: distance={spec} n={n} dim={dim} clusters={clusters} \
         queries={n_queries} tau={tau:.6} (p{tau_percentile}, seed {rng_seed})"
    );
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12} {:>13} {:>8}",
        "K", "computed", "pruned_lb", "accepted_ub", "pivot_evals", "brute_force", "ratio"
    );
    let brute_force_evals = (n * n_queries) as u64;
    let mut rows = Vec::new();
    for &k in &k_list {
        let start = Instant::now();
        let pivots = greedy_farthest_point(&data, spec, k, 0)?;
        let table = PivotTable::build(&data, spec, &pivots)?;
        let batch = batch_query(
            &table,
            &data,
            &queries,
            QueryMode::Range {
                tau,
                exact_distances: false,
            },
            DEFAULT_BATCH_SIZE,
            workers,
        );
        for entry in &batch.entries {
            if let Err(e) = &entry.outcome {
                bail!("query {} failed: {e}", entry.query_id);
            }
        }
        let s = batch.aggregate;
        let ratio = (s.computed + s.pivot_evals) as f64 / brute_force_evals as f64;
        println!(
            "{k:>5} {:>12} {:>12} {:>12} {:>12} {:>13} {ratio:>8.4}",
            s.computed, s.pruned_lb, s.accepted_ub, s.pivot_evals, brute_force_evals
        );
        eprintln!("  K={k}: select+build+query took {:.1?}", start.elapsed());
        rows.push(BenchRow {
            k_pivots: k,
            computed: s.computed,
            pruned_lb: s.pruned_lb,
            accepted_ub: s.accepted_ub,
            pivot_evals: s.pivot_evals,
            brute_force_evals,
            evaluation_ratio: ratio,
        });
    }
    if let Some(path) = args.output.or(config.output) {
        let report = BenchReport {
            distance: spec,
            n,
            dim,
            clusters,
            queries: n_queries,
            rng_seed,
            tau_percentile,
            tau,
            rows,
        };
        write_json(&path, &report)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> anyhow::Result<()> {
    let file =
        std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
