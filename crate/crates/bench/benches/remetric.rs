use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use remetrica::{remetric_distance, verify_lipschitz_bound, PairSampler, RemetricParams};
use remetrica_bench::sqrt_half;

fn distance_by_depth(c: &mut Criterion) {
    let ifs = sqrt_half();
    let mut group = c.benchmark_group("remetric_distance");
    for depth in [8usize, 14, 20] {
        let p = RemetricParams::new(1.0, depth).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(depth), &p, |b, p| {
            b.iter(|| remetric_distance(&ifs, p, black_box(&[0.0]), black_box(&[1e-6])).unwrap())
        });
    }
    group.finish();
}

fn budget_truncation(c: &mut Criterion) {
    let ifs = sqrt_half();
    let mut group = c.benchmark_group("remetric_budget");
    for budget in [64usize, 1024, 16384] {
        let p = RemetricParams::new(1.0, 24)
            .unwrap()
            .with_budget(budget)
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(budget), &p, |b, p| {
            b.iter(|| remetric_distance(&ifs, p, black_box(&[0.1]), black_box(&[0.9])).unwrap())
        });
    }
    group.finish();
}

fn verify(c: &mut Criterion) {
    let ifs = sqrt_half();
    let p = RemetricParams::new(1.0, 12).unwrap();
    let pairs = PairSampler::sized(0, 200, ifs.domain()).sample(ifs.domain());
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("sqrt_half_200_pairs", |b| {
        b.iter(|| verify_lipschitz_bound(&ifs, &p, black_box(&pairs)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, distance_by_depth, budget_truncation, verify);
criterion_main!(benches);
