use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cantor_measure::cantor::Point;
use cantor_measure::corpus::{Corpus, Shape};
use cantor_measure::exec::Exec;
use cantor_measure::measure::{build_decomposition, verify_decomposition_with};
use cantor_measure::sampler::{mc_integral_with, sampled_average_with, Integrand};

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn monte_carlo(c: &mut Criterion) {
    let code = Corpus::new(1).code(Shape::default());
    let f = Integrand::code(&code);
    let r = Point::seeded(9);
    let mut g = c.benchmark_group("mc_integral");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, 100_000), &exec, |b, &exec| {
            b.iter(|| mc_integral_with(&f, &r, 100_000, exec).unwrap())
        });
    }
    g.finish();

    let step = Integrand::step(Corpus::new(2).step_function(6));
    let mut g = c.benchmark_group("sampled_average");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, 50_000), &exec, |b, &exec| {
            b.iter(|| sampled_average_with(&step, 3, &r, 50_000, exec).unwrap())
        });
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let mut corpus = Corpus::new(3);
    let codes: Vec<_> = (0..50).map(|_| corpus.code(Shape::default())).collect();
    let decs: Vec<_> = codes.iter().map(|c| build_decomposition(c).unwrap()).collect();
    let mut g = c.benchmark_group("verify_decomposition");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, codes.len()), &exec, |b, &exec| {
            b.iter(|| {
                for (c, d) in codes.iter().zip(&decs) {
                    verify_decomposition_with(c, d, exec).unwrap();
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, verification);
criterion_main!(benches);
