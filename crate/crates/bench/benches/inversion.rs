use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use diffkern2d_bench::{exp_operator, test_vector};
use diffkern2d_core::inversion::{inverse_from_rho, real_lambda, RhoEvaluator, RhoTable, Solver};
use diffkern2d_core::{Axis, Tolerances};

fn solve(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n in [16, 32] {
        let op = exp_operator(n);
        let b = op.apply_slice(&test_vector(n * n));
        group.bench_with_input(BenchmarkId::new("factor", n), &op, |bch, op| bch.iter(|| Solver::new(black_box(op), &tol).unwrap()));
        let dense = Solver::new(&op, &tol).unwrap();
        group.bench_with_input(BenchmarkId::new("lu_solve", n), &b, |bch, b| bch.iter(|| dense.solve_slice(black_box(b)).unwrap()));
        let iterative = Solver::with_limit(&op, &tol, 0).unwrap();
        group.bench_with_input(BenchmarkId::new("gmres", n), &b, |bch, b| bch.iter(|| iterative.solve_slice(black_box(b)).unwrap()));
    }
    group.finish();
}

fn rho(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("rho");
    group.sample_size(10);
    for n in [8, 16] {
        let solver = Solver::new(&exp_operator(n), &tol).unwrap();
        let (l, m) = (real_lambda(1.1, -0.9), real_lambda(0.6, 2.8));
        group.bench_function(BenchmarkId::new("structured_uncached", n), |b| {
            let ev = RhoEvaluator::from_solver(&solver).unwrap().without_cache();
            b.iter(|| ev.rho_structured(black_box(l), black_box(m), Axis::One).unwrap())
        });
        group.bench_function(BenchmarkId::new("inverse_from_rho", n), |b| {
            let table = RhoTable::from_direct(&solver).unwrap();
            b.iter(|| inverse_from_rho(black_box(&table)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solve, rho);
criterion_main!(benches);
