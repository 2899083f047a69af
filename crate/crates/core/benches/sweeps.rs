use std::hint::black_box;

use corrchan::analysis::{perturb_eigen_scan, ScanGrid};
use corrchan::optimize::{fig1, sweep, Cells, SweepSpec};
use corrchan::{Exec, PurityOrder};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn conjecture_sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        cells: Cells::Random { count: 200 },
        orders: ["1.1", "1.5", "2", "3", "5", "inf"]
            .iter()
            .map(|p| p.parse::<PurityOrder>().unwrap())
            .collect(),
        trials: 50,
        lattice: None,
        seed: 42,
    };
    let mut g = c.benchmark_group("conjecture_sweep");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep(black_box(&spec), exec).unwrap())
        });
    }
    g.finish();
}

fn two_norm_surface(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut g = c.benchmark_group("fig1_101x101");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| fig1(black_box(&grid), black_box(&grid), exec).unwrap())
        });
    }
    g.finish();
}

fn perturbation_scan(c: &mut Criterion) {
    let grid = ScanGrid::default();
    let mut g = c.benchmark_group("perturbation_scan");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| perturb_eigen_scan(black_box(&grid), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, conjecture_sweep, two_norm_surface, perturbation_scan);
criterion_main!(benches);
