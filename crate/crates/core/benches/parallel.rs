use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fuzzycm::contractions::{cm_contractive_check, CmForm, PairSampling, SelfMap};
use fuzzycm::dynamics::{m_cauchy_check, picard_orbit};
use fuzzycm::grid::{default_r_grid, default_t_grid};
use fuzzycm::suites::ex62_space;

// Same workload on a one-thread pool and on the default pool.
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn bench(c: &mut Criterion) {
    let space = ex62_space();
    let map = SelfMap::phi_step();
    let (r_grid, t_grid) = (default_r_grid(), default_t_grid());
    let sampling = PairSampling::default();
    let trace = picard_orbit(&space, &map, 0.7, &t_grid, 400, 1e-9).unwrap();

    let mut g = c.benchmark_group("cm_check");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &pool, |b, pool| {
            b.iter(|| {
                pool.install(|| {
                    cm_contractive_check(&space, &map, &r_grid, &t_grid, CmForm::Between, &sampling)
                })
            })
        });
    }
    g.finish();

    let mut g = c.benchmark_group("m_cauchy");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &pool, |b, pool| {
            b.iter(|| pool.install(|| m_cauchy_check(&space, &trace, &r_grid, &t_grid)))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
