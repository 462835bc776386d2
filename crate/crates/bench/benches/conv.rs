use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use diffkern2d_bench::{exp_operator, test_vector};

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for n in [16, 32, 64, 128] {
        let op = exp_operator(n);
        let f = test_vector(n * n);
        group.bench_with_input(BenchmarkId::new("fft", n), &f, |b, f| b.iter(|| op.apply_fft(black_box(f))));
        if n <= 64 {
            group.bench_with_input(BenchmarkId::new("direct", n), &f, |b, f| b.iter(|| op.apply_direct(black_box(f))));
        }
        // Assembly is outside the timed loop.
        let dense = op.assemble_dense_real().expect("within the real dense guard");
        group.sample_size(10);
        group.bench_with_input(BenchmarkId::new("dense_real", n), &f, |b, f| b.iter(|| dense.matvec(black_box(f))));
    }
    group.finish();
}

criterion_group!(benches, matvec);
criterion_main!(benches);
