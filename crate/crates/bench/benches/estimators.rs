//! Per-pair cost of the two squared-MMD estimators across sampling sizes.
//!
//! The interesting comparison is empirical m=100 against the landmark
//! estimator at (m=100, h=10): the latter touches the same batches but
//! works through an h-dimensional projection.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use mmdbo_bench::batch_pair;
use mmdbo_core::mmd::{mmd2_empirical, mmd2_nystrom};
use mmdbo_core::BaseKernelParams;

fn bench_estimators(c: &mut Criterion) {
    let kernel = BaseKernelParams::rq_mixture(0.2);
    let mut group = c.benchmark_group("mmd2");

    for &m in &[20usize, 100, 1000] {
        let (u, v) = batch_pair(m, 7);
        group.bench_function(format!("empirical_m{m}"), |b| {
            b.iter_batched(
                || (u.clone(), v.clone()),
                |(u, v)| black_box(mmd2_empirical(&kernel, &u, &v).unwrap()),
                BatchSize::SmallInput,
            )
        });
    }

    for &(m, h) in &[(100usize, 10usize), (1000, 100)] {
        let (u, v) = batch_pair(m, 7);
        group.bench_function(format!("nystrom_m{m}_h{h}"), |b| {
            b.iter_batched(
                || (u.clone(), v.clone()),
                |(u, v)| black_box(mmd2_nystrom(&kernel, &u, &v, h, 1e-10, 11).unwrap()),
                BatchSize::SmallInput,
            )
        });
    }

    group.finish();
}

criterion_group!(benches, bench_estimators);
criterion_main!(benches);
