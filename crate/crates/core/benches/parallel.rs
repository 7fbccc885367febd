use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mop_lattice::laxpair::zero_curvature_residual;
use mop_lattice::mop_table::{determinantal_table_with, TableOptions};
use mop_lattice::recurrence::{generate_table_with, GenerateOptions};
use mop_lattice::{
    build_delta, eigencheck, family_field, family_moment_pair, DoubleDouble, Exec, FamilySpec, Precision, Window,
};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn meixner() -> FamilySpec {
    FamilySpec::Meixner1 {
        beta: 1.0,
        c1: 0.5,
        c2: 1.0 / 3.0,
    }
}

fn determinantal(c: &mut Criterion) {
    let mut group = c.benchmark_group("determinantal_table_dd");
    let w = Window::new(8, 8);
    let pair = family_moment_pair::<DoubleDouble>(&meixner(), 3 * 8).unwrap();
    for (name, exec) in POLICIES {
        let opts = TableOptions {
            exec,
            ..TableOptions::for_precision(Precision::Extended)
        };
        group.bench_with_input(BenchmarkId::new(name, "8x8"), &opts, |bch, opts| {
            bch.iter(|| determinantal_table_with(black_box(&pair), w, opts).unwrap())
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_table");
    let w = Window::new(40, 40);
    let field = family_field::<f64>(&meixner(), w).unwrap();
    for (name, exec) in POLICIES {
        let opts = GenerateOptions {
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new(name, "40x40"), &opts, |bch, opts| {
            bch.iter(|| generate_table_with(black_box(&field), w, opts).unwrap())
        });
    }
    group.finish();
}

fn spectral_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_checks");
    let w = Window::new(24, 24);
    let field = family_field::<f64>(&meixner(), w).unwrap();
    let (table, _) = generate_table_with(&field, w, &GenerateOptions::default()).unwrap();
    let delta = build_delta(&field);
    let samples: Vec<f64> = (0..32).map(|k| -4.0 + k as f64 / 4.0).collect();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("eigencheck", name), |bch| {
            bch.iter(|| eigencheck(&delta, black_box(&table), &samples, None, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("zero_curvature", name), |bch| {
            bch.iter(|| zero_curvature_residual(black_box(&field), w, &samples, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, determinantal, generation, spectral_checks);
criterion_main!(benches);
