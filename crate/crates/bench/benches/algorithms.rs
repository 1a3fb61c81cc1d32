use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cutplane::centers::{centroid_estimate, chebyshev_center, SamplerConfig};
use cutplane::geometry::{estimate_volume, random_polytope};
use cutplane::harness::{generate_synthetic, SyntheticConfig};
use cutplane::perceptron::{localize, perceptron_baseline, OracleStrategy};

fn localization(c: &mut Criterion) {
    let (data, _) = generate_synthetic(&SyntheticConfig::new(0.1, 1)).unwrap();
    let mut group = c.benchmark_group("localize");
    for st in [OracleStrategy::largest_error(), OracleStrategy::smallest_error(), OracleStrategy::random_error(3)] {
        group.bench_function(st.name(), |b| b.iter(|| localize(black_box(&data), st, u64::MAX).unwrap()));
    }
    group.bench_function("perceptron", |b| b.iter(|| perceptron_baseline(black_box(&data), u64::MAX).unwrap()));
    group.finish();
}

fn centers(c: &mut Criterion) {
    let mut group = c.benchmark_group("centers");
    for d in [2, 5, 10] {
        let p = random_polytope(d, 7);
        group.bench_with_input(BenchmarkId::new("chebyshev", d), &p, |b, p| {
            b.iter(|| chebyshev_center(p, 1e-10, 10_000).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("centroid_1000", d), &p, |b, p| {
            b.iter(|| centroid_estimate(p, 1000, &SamplerConfig::for_dim(d, 1)).unwrap())
        });
    }
    group.finish();
}

fn volume(c: &mut Criterion) {
    let mut group = c.benchmark_group("volume");
    group.sample_size(20);
    for d in [2, 4, 6] {
        let p = random_polytope(d, 11);
        group.bench_with_input(BenchmarkId::new("rejection_1e5", d), &p, |b, p| {
            b.iter(|| estimate_volume(p, 100_000, 5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, localization, centers, volume);
criterion_main!(benches);
