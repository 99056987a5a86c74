use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpg_core::oracle::gen_random_arena;
use mpg_core::{enumerate, fixtures, least_sepm, reweight, solve_values, Rational};

fn bench_least_sepm(c: &mut Criterion) {
    let mut group = c.benchmark_group("least_sepm");
    for n in [16usize, 64, 256] {
        let arena = gen_random_arena(n, 4, 10, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &arena, |b, a| {
            b.iter(|| least_sepm(a, None))
        });
    }
    group.finish();
}

fn bench_solve_values(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_values");
    for n in [8usize, 32, 64] {
        let arena = gen_random_arena(n, 3, 8, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &arena, |b, a| {
            b.iter(|| solve_values(a).unwrap())
        });
    }
    group.finish();
}

fn bench_enumerate(c: &mut Criterion) {
    let ex = fixtures::gamma_ex();
    c.bench_function("enumerate/example", |b| {
        b.iter(|| enumerate(&ex, Rational::from_integer(-1)).unwrap())
    });
    let d = fixtures::gamma_d();
    c.bench_function("enumerate/degenerate", |b| b.iter(|| enumerate(&d, Rational::ZERO).unwrap()));
    let shifted = reweight(&ex, Rational::from_integer(-1)).unwrap();
    c.bench_function("least_sepm/shifted_example", |b| b.iter(|| least_sepm(&shifted, None)));
}

criterion_group!(benches, bench_least_sepm, bench_solve_values, bench_enumerate);
criterion_main!(benches);
