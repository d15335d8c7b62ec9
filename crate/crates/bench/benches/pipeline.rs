use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vipsim_core::limits::poisson_upper_limit;
use vipsim_core::quon::gram_matrix;
use vipsim_core::transport::simulate_escape;
use vipsim_core::{coverage_study, McConfig, Scenario, StripGeometry};

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.cfg"));
    Scenario::load(&path).unwrap()
}

fn escape(c: &mut Criterion) {
    let strip = StripGeometry::new(10.0, 1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("simulate_escape");
    for n in [10_000u64, 1_000_000] {
        let mc = McConfig::new(n, 1, McConfig::DEFAULT_CHUNK).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &mc, |b, mc| {
            b.iter(|| simulate_escape(&strip, 1.0, black_box(mc)).unwrap())
        });
    }
    group.finish();
}

fn quon(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_matrix");
    for (n, m) in [(2, 2), (3, 3), (4, 4)] {
        group.bench_function(format!("n{n}_m{m}"), |b| {
            b.iter(|| gram_matrix(n, m, black_box(0.5)).unwrap().eigenvalues())
        });
    }
    group.finish();
}

fn poisson(c: &mut Criterion) {
    c.bench_function("poisson_upper_limit_n20", |b| {
        b.iter(|| poisson_upper_limit(black_box(20), black_box(12.5), 0.9).unwrap())
    });
}

fn coverage(c: &mut Criterion) {
    let s = scenario("vip-design");
    let truth = s.projected_bound(&s.limit_settings()).unwrap().beta2_half_bound;
    let mut group = c.benchmark_group("coverage_study");
    group.sample_size(10);
    group.bench_function("vip_design_100_trials", |b| {
        b.iter(|| coverage_study(&s, truth, 100, 0.9, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, escape, quon, poisson, coverage);
criterion_main!(benches);
