use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linspecial_bench::{balanced_plane, sum_line, CLASS_POLY_DISCRIMINANTS};
use linspecial_core::modular::{class_polynomial, j_eval, tau_delta};
use linspecial_core::quadratic::{reduced_forms, Discriminant};
use linspecial_core::search::{solve_with_table, ModuliTable, SolveOptions};

fn j_evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("j_eval");
    let period = tau_delta(&Discriminant::new(-163).unwrap());
    for digits in [20, 100, 500] {
        let radius = 10f64.powi(-digits);
        g.bench_with_input(BenchmarkId::from_parameter(digits), &radius, |b, &r| b.iter(|| j_eval(&period, r).unwrap()));
    }
    g.finish();
}

fn class_polynomials(c: &mut Criterion) {
    let mut g = c.benchmark_group("class_polynomial");
    g.sample_size(10);
    for d in CLASS_POLY_DISCRIMINANTS {
        let disc = Discriminant::new(d).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d), &disc, |b, disc| b.iter(|| class_polynomial(disc).unwrap()));
    }
    g.finish();
}

fn forms(c: &mut Criterion) {
    let disc = Discriminant::new(-100_003).unwrap();
    c.bench_function("reduced_forms/-100003", |b| b.iter(|| reduced_forms(&disc)));
}

fn table_and_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("moduli_table/200", |b| b.iter(|| ModuliTable::new(200).unwrap()));
    let table = ModuliTable::new(200).unwrap();
    let opts = SolveOptions::with_cap(200);
    for (name, l) in [("sum_line", sum_line()), ("balanced_plane", balanced_plane())] {
        g.bench_function(format!("solve/{name}"), |b| b.iter(|| solve_with_table(&l, &table, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, j_evaluation, class_polynomials, forms, table_and_solve);
criterion_main!(benches);
