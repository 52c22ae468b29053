//! Seeded synthetic datasets for benchmarks and tests.
//!
//! Two regimes: Gaussian clusters in feature space for the vector metrics,
//! and mutated template sequences for edit distance. Both are fully
//! deterministic given the seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, Suffix};
use crate::error::{Error, Result};
use crate::metric::{distance, DistanceSpec};

fn padded_id(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).max(1).to_string().len();
    format!("s{i:0width$}")
}

/// `n` points in `dim` dimensions drawn from `n_clusters` Gaussian blobs
/// (unit within-cluster deviation, cluster centers uniform in ±10 per axis).
///
/// Activity sequences are a single placeholder symbol; the content of these
/// datasets is the feature vectors.
pub fn gaussian_clusters(n: usize, dim: usize, n_clusters: usize, rng_seed: u64) -> Dataset {
    assert!(n_clusters >= 1, "need at least one cluster");
    assert!(dim >= 1, "need at least one dimension");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let centers: Vec<Vec<f64>> = (0..n_clusters)
        .map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect())
        .collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let suffixes = (0..n)
        .map(|i| {
            let center = &centers[rng.gen_range(0..n_clusters)];
            let point: Vec<f64> = center.iter().map(|c| c + noise.sample(&mut rng)).collect();
            Suffix::new(padded_id(i, n), vec![0]).with_features(point)
        })
        .collect();
    Dataset::new(suffixes, vec!["x".into()], Some(dim)).expect("generated dataset is valid")
}

/// `n` activity sequences derived from `n_templates` random templates of
/// length `template_len` over an alphabet of `alphabet_size` symbols, each
/// with up to `max_mutations` random edits (substitute, insert, or delete).
pub fn mutated_sequences(
    n: usize,
    n_templates: usize,
    template_len: usize,
    alphabet_size: usize,
    max_mutations: usize,
    rng_seed: u64,
) -> Dataset {
    assert!(n_templates >= 1 && template_len >= 1 && alphabet_size >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let alphabet: Vec<String> = (0..alphabet_size).map(|i| format!("a{i}")).collect();
    let templates: Vec<Vec<u32>> = (0..n_templates)
        .map(|_| {
            (0..template_len)
                .map(|_| rng.gen_range(0..alphabet_size as u32))
                .collect()
        })
        .collect();
    let suffixes = (0..n)
        .map(|i| {
            let mut seq = templates[rng.gen_range(0..n_templates)].clone();
            let n_mut = rng.gen_range(0..=max_mutations);
            for _ in 0..n_mut {
                match rng.gen_range(0..3) {
                    0 => {
                        let pos = rng.gen_range(0..seq.len());
                        seq[pos] = rng.gen_range(0..alphabet_size as u32);
                    }
                    1 => {
                        let pos = rng.gen_range(0..=seq.len());
                        seq.insert(pos, rng.gen_range(0..alphabet_size as u32));
                    }
                    _ if seq.len() > 1 => {
                        let pos = rng.gen_range(0..seq.len());
                        seq.remove(pos);
                    }
                    _ => {}
                }
            }
            Suffix::new(padded_id(i, n), seq)
        })
        .collect();
    Dataset::new(suffixes, alphabet, None).expect("generated dataset is valid")
}

/// Points on a line as single-feature suffixes; handy for hand-checkable
/// geometry.
pub fn points_1d(xs: &[f64]) -> Dataset {
    let suffixes = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| Suffix::new(padded_id(i, xs.len()), vec![0]).with_features(vec![x]))
        .collect();
    Dataset::new(suffixes, vec!["x".into()], Some(1)).expect("generated dataset is valid")
}

/// `count` distinct row indices sampled without replacement.
pub fn sample_row_indices(n_rows: usize, count: usize, rng_seed: u64) -> Vec<usize> {
    assert!(count <= n_rows, "cannot sample {count} of {n_rows} rows");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut all: Vec<usize> = (0..n_rows).collect();
    all.shuffle(&mut rng);
    all.truncate(count);
    all
}

/// Estimates a percentile (nearest-rank, `0 < p <= 100`) of the pairwise
/// distance distribution from `n_pairs` sampled distinct-row pairs.
pub fn sample_distance_percentile(
    data: &Dataset,
    spec: DistanceSpec,
    n_pairs: usize,
    rng_seed: u64,
    percentile: f64,
) -> Result<f64> {
    assert!(
        percentile > 0.0 && percentile <= 100.0,
        "percentile must be in (0, 100]"
    );
    if data.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut dists = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let i = rng.gen_range(0..data.len());
        let mut j = rng.gen_range(0..data.len() - 1);
        if j >= i {
            j += 1;
        }
        dists.push(distance(spec, data.suffix(i), data.suffix(j))?);
    }
    dists.sort_unstable_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * dists.len() as f64).ceil() as usize;
    Ok(dists[rank.clamp(1, dists.len()) - 1])
}
