//! Acceptance suite: one test per release criterion, each printing a PASS
//! line so `cargo test --test acceptance -- --nocapture` reads as a
//! checklist. Every tolerance is pinned here, not in helper code.

use pivotprune::dataset::{Dataset, Suffix};
use pivotprune::metric::{distance, DistanceSpec};
use pivotprune::pivots::{brute_force_k_center, greedy_farthest_point, KCenterCap, PivotSet};
use pivotprune::query::{batch_query, knn_query, range_query, PruneStats, QueryMode};
use pivotprune::synth;
use pivotprune::{bound_pair, decide, oracle, query_pivot_row, Decision, PivotTable};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tolerance on bound soundness checks.
const BOUND_TOL: f64 = 1e-9;
/// Tolerance on the greedy 2-approximation factor.
const APPROX_TOL: f64 = 1e-9;
/// Ceiling on the clustered-benchmark evaluation ratio.
const MAX_EVAL_RATIO: f64 = 0.5;

fn dataset_for(spec: DistanceSpec, n: usize, seed: u64) -> Dataset {
    match spec {
        DistanceSpec::Euclidean | DistanceSpec::Angular => synth::gaussian_clusters(n, 8, 8, seed),
        DistanceSpec::Levenshtein => synth::mutated_sequences(n, 20, 12, 10, 4, seed),
    }
}

/// Criterion 1: with pivot rows (2, 6) and (7, 9) at tau = 4 the lower bound
/// is exactly 5, the decision is Prune, and the embedded engine run records
/// zero exact candidate evaluations.
#[test]
fn a1_two_pivot_example_discards_without_evaluation() {
    let bracket = bound_pair(&[2.0, 6.0], &[7.0, 9.0]);
    assert_eq!(bracket.lower, 5.0);
    assert_eq!(bracket.upper, 9.0);
    assert_eq!(decide(bracket, 4.0), Decision::Prune);

    // The same rows realized in sequence space: d(x,z1)=2, d(x,z2)=6,
    // d(y,z1)=7, d(y,z2)=9 hold exactly for these four sequences.
    let alphabet: Vec<String> = (0..16).map(|i| format!("a{i}")).collect();
    let x = Suffix::new("x", vec![0, 1, 2]);
    let y = Suffix::new("y", (9..16).collect());
    let z1 = Suffix::new("z1", vec![0]);
    let z2 = Suffix::new("z2", (0..9).collect());
    let data = Dataset::new(vec![x.clone(), y, z1, z2], alphabet, None).unwrap();
    let pivots = PivotSet::from_indices(&data, DistanceSpec::Levenshtein, vec![2, 3]).unwrap();
    let table = PivotTable::build(&data, DistanceSpec::Levenshtein, &pivots).unwrap();
    assert_eq!(table.row(0), &[2.0, 6.0]);
    assert_eq!(table.row(1), &[7.0, 9.0]);

    let result = range_query(&table, &data, &x, 4.0, false).unwrap();
    assert_eq!(result.stats.computed, 0, "no exact evaluation may happen");
    assert!(result.stats.pruned_lb >= 1);
    assert!(result.matches.iter().all(|m| m.suffix_id != "y"));

    println!("criterion 1 PASS: two-pivot example pruned with zero exact evaluations");
}

/// Criterion 2: over the full generated grid the pruned engines return
/// exactly the exhaustive results — every configuration at accuracy 1.0,
/// membership exact, distances within 1e-9.
#[test]
fn a2_pruned_results_match_exhaustive_on_full_grid() {
    // Distances are compared within 1e-9; membership exactly.
    assert_eq!(oracle::DISTANCE_TOL, 1e-9);
    let mut configurations = 0;
    for spec in DistanceSpec::ALL {
        for (ni, &n) in [100usize, 2000].iter().enumerate() {
            let seed = 1000 + ni as u64;
            let data = dataset_for(spec, n, seed);
            let queries: Vec<Suffix> = synth::sample_row_indices(n, 100, seed ^ 0x51)
                .into_iter()
                .map(|i| data.suffix(i).clone())
                .collect();
            let taus: Vec<f64> = [1.0, 10.0, 50.0]
                .iter()
                .map(|&p| {
                    synth::sample_distance_percentile(&data, spec, 2000, seed + 7, p).unwrap()
                })
                .collect();
            for k_pivots in [1usize, 4, 16] {
                let pivots = greedy_farthest_point(&data, spec, k_pivots, 0).unwrap();
                let table = PivotTable::build(&data, spec, &pivots).unwrap();
                for &tau in &taus {
                    let report = oracle::verify(
                        &table,
                        &data,
                        &queries,
                        pivotprune::VerifyMode::Range { tau },
                    );
                    assert_eq!(
                        report.accuracy, 1.0,
                        "{spec} n={n} K={k_pivots} tau={tau}: {:#?}",
                        report.mismatches
                    );
                    configurations += 1;
                }
                for k in [1usize, 5, 20] {
                    let report =
                        oracle::verify(&table, &data, &queries, pivotprune::VerifyMode::Knn { k });
                    assert_eq!(
                        report.accuracy, 1.0,
                        "{spec} n={n} K={k_pivots} k={k}: {:#?}",
                        report.mismatches
                    );
                    configurations += 1;
                }
            }
        }
    }
    assert_eq!(configurations, 108);
    println!("criterion 2 PASS: {configurations} configurations at accuracy 1.0");
}

/// Criterion 3: on 10,000 random pairs per metric the bracket contains the
/// true distance within 1e-9.
#[test]
fn a3_bounds_bracket_true_distances() {
    for spec in DistanceSpec::ALL {
        let data = dataset_for(spec, 500, 77);
        let pivots = greedy_farthest_point(&data, spec, 6, 0).unwrap();
        let table = PivotTable::build(&data, spec, &pivots).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut stats = PruneStats::default();
        for _ in 0..10_000 {
            let qi = rng.gen_range(0..data.len());
            let yi = rng.gen_range(0..data.len());
            let q_row = query_pivot_row(&table, data.suffix(qi), &mut stats).unwrap();
            let bracket = bound_pair(&q_row, table.row(yi));
            let d = distance(spec, data.suffix(qi), data.suffix(yi)).unwrap();
            assert!(
                bracket.lower <= d + BOUND_TOL,
                "{spec}: lower {} > d {}",
                bracket.lower,
                d
            );
            assert!(
                d <= bracket.upper + BOUND_TOL,
                "{spec}: d {} > upper {}",
                d,
                bracket.upper
            );
        }
    }
    println!("criterion 3 PASS: 10,000 brackets per metric are sound within 1e-9");
}

#[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
struct ClusteredBaseline {
    n: usize,
    dim: usize,
    clusters: usize,
    k_pivots: usize,
    queries: usize,
    tau_percentile: f64,
    pair_sample: usize,
    rng_seed: u64,
    computed: u64,
    pruned_lb: u64,
    accepted_ub: u64,
    pivot_evals: u64,
    brute_force_evals: u64,
    evaluation_ratio: f64,
}

fn run_clustered_benchmark() -> ClusteredBaseline {
    let (n, dim, clusters, k_pivots, n_queries) = (10_000, 8, 8, 16, 100);
    let (tau_percentile, pair_sample, rng_seed) = (5.0, 20_000, 42u64);
    let data = synth::gaussian_clusters(n, dim, clusters, rng_seed);
    let tau = synth::sample_distance_percentile(
        &data,
        DistanceSpec::Euclidean,
        pair_sample,
        rng_seed + 1,
        tau_percentile,
    )
    .unwrap();
    let pivots = greedy_farthest_point(&data, DistanceSpec::Euclidean, k_pivots, 0).unwrap();
    let table = PivotTable::build(&data, DistanceSpec::Euclidean, &pivots).unwrap();
    let queries: Vec<Suffix> = synth::sample_row_indices(n, n_queries, rng_seed + 2)
        .into_iter()
        .map(|i| data.suffix(i).clone())
        .collect();
    let batch = batch_query(
        &table,
        &data,
        &queries,
        QueryMode::Range {
            tau,
            exact_distances: false,
        },
        500,
        8,
    );
    assert!(batch.entries.iter().all(|e| e.outcome.is_ok()));
    let stats = batch.aggregate;
    let brute_force_evals = (n * n_queries) as u64;
    ClusteredBaseline {
        n,
        dim,
        clusters,
        k_pivots,
        queries: n_queries,
        tau_percentile,
        pair_sample,
        rng_seed,
        computed: stats.computed,
        pruned_lb: stats.pruned_lb,
        accepted_ub: stats.accepted_ub,
        pivot_evals: stats.pivot_evals,
        brute_force_evals,
        evaluation_ratio: (stats.computed + stats.pivot_evals) as f64 / brute_force_evals as f64,
    }
}

const BASELINE_PATH: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/baselines/clustered_n10000_k16.json"
);

/// Criterion 4: on the seeded clustered benchmark the pruned engine performs
/// less than half the exhaustive engine's evaluations, and the exact counters
/// match the committed baseline.
#[test]
fn a4_clustered_benchmark_prunes_majority_of_work() {
    let measured = run_clustered_benchmark();
    assert!(
        measured.evaluation_ratio < MAX_EVAL_RATIO,
        "evaluation ratio {} not below {MAX_EVAL_RATIO}",
        measured.evaluation_ratio
    );
    let committed: ClusteredBaseline =
        serde_json::from_str(&std::fs::read_to_string(BASELINE_PATH).expect(
            "missing committed baseline; regenerate with the regenerate_clustered_baseline test",
        ))
        .unwrap();
    assert_eq!(
        measured, committed,
        "benchmark counters drifted from the committed baseline"
    );
    println!(
        "criterion 4 PASS: evaluation ratio {:.4} (< {MAX_EVAL_RATIO}), counters match baseline",
        measured.evaluation_ratio
    );
}

/// Rewrites the committed baseline from the current implementation:
/// `cargo test -p pivotprune --test acceptance regenerate_clustered_baseline -- --ignored`
#[test]
#[ignore]
fn regenerate_clustered_baseline() {
    let measured = run_clustered_benchmark();
    let json = serde_json::to_string_pretty(&measured).unwrap();
    std::fs::create_dir_all(std::path::Path::new(BASELINE_PATH).parent().unwrap()).unwrap();
    std::fs::write(BASELINE_PATH, json + "\n").unwrap();
    println!("baseline rewritten: {BASELINE_PATH}");
}

/// Criterion 5: greedy selection stays within twice the exhaustive k-center
/// optimum on 50 random instances per metric.
#[test]
fn a5_greedy_pivots_within_twice_optimal() {
    for spec in DistanceSpec::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        for round in 0..50 {
            let n = rng.gen_range(4..=12);
            let k = rng.gen_range(1..=3usize.min(n));
            let data = match spec {
                DistanceSpec::Euclidean | DistanceSpec::Angular => {
                    synth::gaussian_clusters(n, 2, 2, 9000 + round)
                }
                DistanceSpec::Levenshtein => synth::mutated_sequences(n, 2, 6, 4, 4, 9000 + round),
            };
            let greedy = greedy_farthest_point(&data, spec, k, 0).unwrap();
            let best = brute_force_k_center(&data, spec, k, KCenterCap::default()).unwrap();
            assert!(
                greedy.coverage_radius() <= 2.0 * best.coverage_radius() + APPROX_TOL,
                "{spec} n={n} k={k}: greedy {} vs optimal {}",
                greedy.coverage_radius(),
                best.coverage_radius()
            );
        }
    }
    println!("criterion 5 PASS: greedy within 2x optimal on 50 instances per metric");
}

/// Criterion 6: per-query results and stats are identical across worker
/// counts and batch sizes, for both query modes. Exact equality.
#[test]
fn a6_results_invariant_under_batching_and_workers() {
    let data = synth::gaussian_clusters(800, 6, 5, 66);
    let pivots = greedy_farthest_point(&data, DistanceSpec::Euclidean, 8, 0).unwrap();
    let table = PivotTable::build(&data, DistanceSpec::Euclidean, &pivots).unwrap();
    let queries: Vec<Suffix> = synth::sample_row_indices(data.len(), 30, 5)
        .into_iter()
        .map(|i| data.suffix(i).clone())
        .collect();
    let tau =
        synth::sample_distance_percentile(&data, DistanceSpec::Euclidean, 2000, 8, 10.0).unwrap();
    for mode in [
        QueryMode::Range {
            tau,
            exact_distances: true,
        },
        QueryMode::Knn { k: 7 },
    ] {
        let reference = batch_query(&table, &data, &queries, mode, 500, 1);
        for workers in [1usize, 8] {
            for batch_size in [1usize, 500] {
                let run = batch_query(&table, &data, &queries, mode, batch_size, workers);
                assert_eq!(reference.aggregate, run.aggregate);
                assert_eq!(reference.entries.len(), run.entries.len());
                for (a, b) in reference.entries.iter().zip(&run.entries) {
                    assert_eq!(a.query_id, b.query_id);
                    assert_eq!(
                        a.outcome.as_ref().unwrap(),
                        b.outcome.as_ref().unwrap(),
                        "workers={workers} batch_size={batch_size}"
                    );
                }
            }
        }
    }
    println!("criterion 6 PASS: identical results across workers {{1,8}} x batch {{1,500}}");
}

/// Criterion 7: save/load reproduces the matrix bit for bit and rejects a
/// dataset whose fingerprint differs.
#[test]
fn a7_index_round_trip_bit_exact_and_fingerprint_guard() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("suite");
    let data = synth::mutated_sequences(300, 10, 10, 6, 4, 3);
    let pivots = greedy_farthest_point(&data, DistanceSpec::Levenshtein, 8, 0).unwrap();
    let table = PivotTable::build(&data, DistanceSpec::Levenshtein, &pivots).unwrap();
    table.save(&stem).unwrap();
    let back = PivotTable::load(&stem, &data).unwrap();
    for i in 0..table.n_rows() {
        for k in 0..table.n_pivots() {
            assert_eq!(table.entry(i, k).to_bits(), back.entry(i, k).to_bits());
        }
    }
    let mut shrunk: Vec<Suffix> = data.suffixes().to_vec();
    shrunk.pop();
    let shrunk = Dataset::new(shrunk, data.alphabet().to_vec(), data.feature_dim()).unwrap();
    assert!(matches!(
        PivotTable::load(&stem, &shrunk),
        Err(pivotprune::Error::FingerprintMismatch { .. })
    ));
    println!("criterion 7 PASS: bit-exact round trip; stale dataset rejected");
}

/// Criterion 8: the exhaustive engines record exactly N evaluations per
/// query; the pruned range engine's counters sum to N in membership mode.
#[test]
fn a8_evaluation_accounting_is_exact() {
    let data = synth::gaussian_clusters(600, 4, 4, 21);
    let n = data.len() as u64;
    let pivots = greedy_farthest_point(&data, DistanceSpec::Euclidean, 8, 0).unwrap();
    let table = PivotTable::build(&data, DistanceSpec::Euclidean, &pivots).unwrap();
    let taus: Vec<f64> = [5.0, 25.0, 75.0]
        .iter()
        .map(|&p| {
            synth::sample_distance_percentile(&data, DistanceSpec::Euclidean, 2000, 4, p).unwrap()
        })
        .collect();
    for qi in synth::sample_row_indices(data.len(), 20, 17) {
        let q = data.suffix(qi);
        for &tau in &taus {
            let exhaustive =
                oracle::brute_force_range(&data, DistanceSpec::Euclidean, q, tau).unwrap();
            assert_eq!(exhaustive.stats.computed, n);
            assert_eq!(exhaustive.stats.pruned_lb, 0);
            assert_eq!(exhaustive.stats.accepted_ub, 0);

            let pruned = range_query(&table, &data, q, tau, false).unwrap();
            let s = pruned.stats;
            assert_eq!(s.pruned_lb + s.accepted_ub + s.computed, n);
            assert!(s.computed <= n);
        }
        let exhaustive = oracle::brute_force_knn(&data, DistanceSpec::Euclidean, q, 9).unwrap();
        assert_eq!(exhaustive.stats.computed, n);
        let pruned = knn_query(&table, &data, q, 9).unwrap();
        assert!(pruned.stats.computed <= n);
    }
    println!("criterion 8 PASS: exhaustive = N evaluations; pruned counters sum to N");
}
