use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ftoc_core::simplex::{
    ordering_partition_check, simplex_volume_montecarlo, simplex_volume_montecarlo_parallel,
};
use ftoc_core::{MonteCarloConfig, SimplexSpec};
use std::hint::black_box;

const SAMPLES: u64 = 100_000;

fn montecarlo(c: &mut Criterion) {
    let cfg = MonteCarloConfig::new(SAMPLES, 7).unwrap();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("montecarlo");
    group.throughput(Throughput::Elements(SAMPLES));
    for n in [2usize, 4, 8] {
        let s = SimplexSpec::new(n, 0.0, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", n), &s, |b, s| {
            b.iter(|| simplex_volume_montecarlo(black_box(s), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &s, |b, s| {
            b.iter(|| simplex_volume_montecarlo_parallel(black_box(s), &cfg, workers).unwrap())
        });
    }
    group.finish();
}

fn partition(c: &mut Criterion) {
    let cfg = MonteCarloConfig::new(SAMPLES, 7).unwrap();
    let mut group = c.benchmark_group("partition_check");
    group.sample_size(20);
    for n in [3usize, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| ordering_partition_check(black_box(n), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, montecarlo, partition);
criterion_main!(benches);
