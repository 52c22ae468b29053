//! Shared fixtures for the criterion benches.

use pivotprune::dataset::Dataset;
use pivotprune::pivots::greedy_farthest_point;
use pivotprune::synth;
use pivotprune::{DistanceSpec, PivotTable};

pub const SEED: u64 = 42;

/// Clustered vector dataset with a ready-to-use pivot table and a
/// 5th-percentile range threshold.
pub fn clustered_setup(n: usize, dim: usize, k_pivots: usize) -> (Dataset, PivotTable, f64) {
    let data = synth::gaussian_clusters(n, dim, 8, SEED);
    let pivots = greedy_farthest_point(&data, DistanceSpec::Euclidean, k_pivots, 0)
        .expect("pivot selection");
    let table = PivotTable::build(&data, DistanceSpec::Euclidean, &pivots).expect("table build");
    let tau = synth::sample_distance_percentile(&data, DistanceSpec::Euclidean, 20_000, SEED, 5.0)
        .expect("threshold sampling");
    (data, table, tau)
}

/// Edit-distance dataset with a ready-to-use pivot table and a
/// 5th-percentile range threshold.
pub fn sequence_setup(n: usize, k_pivots: usize) -> (Dataset, PivotTable, f64) {
    let data = synth::mutated_sequences(n, 20, 12, 10, 4, SEED);
    let pivots = greedy_farthest_point(&data, DistanceSpec::Levenshtein, k_pivots, 0)
        .expect("pivot selection");
    let table = PivotTable::build(&data, DistanceSpec::Levenshtein, &pivots).expect("table build");
    let tau =
        synth::sample_distance_percentile(&data, DistanceSpec::Levenshtein, 20_000, SEED, 5.0)
            .expect("threshold sampling");
    (data, table, tau)
}
