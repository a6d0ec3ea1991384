//! Sequential against rayon-parallel evaluation of a probe spectrum.
//!
//! Build with `--no-default-features` to drop the parallel variant.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fourlevel::experiments::linspace;
use fourlevel::parallel::map_sequential;
use fourlevel::propagation::{propagate_exit, MediumSpec};
use fourlevel::{AtomicSystem, DriveSet};
use std::hint::black_box;

fn spectrum_point(sys: &AtomicSystem, medium: &MediumSpec, d2: f64) -> f64 {
    let drives = DriveSet::ladder(10.0, 1.0, 10.0).with_detunings(0.0, d2, 0.0);
    propagate_exit(sys, &drives, medium)
        .unwrap()
        .probe
        .norm_sqr()
}

fn sweeps(c: &mut Criterion) {
    let sys = AtomicSystem::ladder(1.0, 1.0, 0.005 / 6.0).unwrap();
    let medium = MediumSpec::new(1.0, [12.0, 16.0, 0.2], 200).unwrap();
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    for points in [16usize, 64] {
        let grid = linspace(-30.0, 30.0, points);
        group.bench_with_input(BenchmarkId::new("sequential", points), &grid, |b, g| {
            b.iter(|| map_sequential(black_box(g), |d2| spectrum_point(&sys, &medium, d2)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", points), &grid, |b, g| {
            b.iter(|| {
                fourlevel::parallel::map_parallel(black_box(g), |d2| {
                    spectrum_point(&sys, &medium, d2)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
