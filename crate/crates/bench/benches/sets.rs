use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use remetrica::{attractor_iterate, hausdorff, hutchinson_apply, FinitePointSet};
use remetrica_bench::cantor;

fn hutchinson(c: &mut Criterion) {
    let ifs = cantor();
    let mut group = c.benchmark_group("hutchinson_apply");
    for steps in [6usize, 10, 14] {
        let seed = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
        let (set, _) = attractor_iterate(&ifs, &seed, steps, 0.0, &[], usize::MAX).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(set.len()), &set, |b, set| {
            b.iter(|| hutchinson_apply(&ifs, black_box(set), 1e-9).unwrap())
        });
    }
    group.finish();
}

fn hausdorff_sizes(c: &mut Criterion) {
    let ifs = cantor();
    let space = ifs.space();
    let mut group = c.benchmark_group("hausdorff");
    for steps in [6usize, 9, 12] {
        let seed = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
        let (a, _) = attractor_iterate(&ifs, &seed, steps, 0.0, &[], usize::MAX).unwrap();
        let b = hutchinson_apply(&ifs, &a, 0.0).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(a.len()),
            &(a, b),
            |bench, (a, b)| bench.iter(|| hausdorff(space, black_box(a), black_box(b)).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, hutchinson, hausdorff_sizes);
criterion_main!(benches);
