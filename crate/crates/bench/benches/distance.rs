use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pivotprune::metric::{distance, DistanceSpec};
use pivotprune::synth;

fn distance_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance");

    let vectors = synth::gaussian_clusters(1000, 8, 8, pivotprune_bench::SEED);
    let (a, b) = (vectors.suffix(0), vectors.suffix(1));
    group.bench_function("euclidean_dim8", |bench| {
        bench.iter(|| distance(DistanceSpec::Euclidean, black_box(a), black_box(b)).unwrap())
    });
    group.bench_function("angular_dim8", |bench| {
        bench.iter(|| distance(DistanceSpec::Angular, black_box(a), black_box(b)).unwrap())
    });

    let seqs = synth::mutated_sequences(1000, 20, 12, 10, 4, pivotprune_bench::SEED);
    let (a, b) = (seqs.suffix(0), seqs.suffix(1));
    group.bench_function("levenshtein_len12", |bench| {
        bench.iter(|| distance(DistanceSpec::Levenshtein, black_box(a), black_box(b)).unwrap())
    });

    group.finish();
}

criterion_group!(benches, distance_kernels);
criterion_main!(benches);
