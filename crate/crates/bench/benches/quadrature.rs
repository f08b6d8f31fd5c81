use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ftoc_bench::{function, FIXTURES};
use ftoc_core::funcspace::integrate;
use ftoc_core::{PanelRule, QuadratureConfig};
use std::hint::black_box;

fn integrate_fixtures(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate");
    for rule in [PanelRule::GaussKronrod15, PanelRule::GaussKronrod21] {
        let cfg = QuadratureConfig::new(1e-10, 0.0, 50, rule).unwrap();
        for (name, src, a) in FIXTURES {
            let f = function(src);
            group.bench_with_input(BenchmarkId::new(rule.name(), name), &f, |b, f| {
                b.iter(|| integrate(f, *a, black_box(*a + 1.0), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn nested_integral(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let f = function("cos(x)");
    let mut group = c.benchmark_group("nested_integral");
    for depth in 1..=3usize {
        let mut g = f.clone();
        for _ in 0..depth {
            g = g.integral_from(0.0, &cfg).unwrap();
        }
        group.bench_with_input(BenchmarkId::from_parameter(depth), &g, |b, g| {
            b.iter(|| g.eval(black_box(0.8)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, integrate_fixtures, nested_integral);
criterion_main!(benches);
