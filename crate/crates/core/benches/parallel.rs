//! Default rayon pool against a single-thread pool on the hot loops.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;
use tropical_torus::complex::standard_complex;
use tropical_torus::equidist::{standard_test_family, torsion_grid, TestFamily};
use tropical_torus::measure::{haar, monte_carlo_pushforward, IntegralAffineMap};
use tropical_torus::paf::{build_model_function, sup_distance_to_quadratic, tate_iterate, Cocycle};
use tropical_torus::{Lattice, PeriodicComplex, Polarization, Rational};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().expect("pool");
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    vec![("rayon", default), ("sequential", single)]
}

fn base(n: usize) -> PeriodicComplex {
    let lat = Lattice::integer(n);
    standard_complex(&lat, &Polarization::identity(n)).expect("identity form").1
}

fn refinement(c: &mut Criterion) {
    let coarse = base(3);
    let fine = coarse.dyadic_refine(2);
    let mut g = c.benchmark_group("refinement_n3_level2");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                // A fresh clone drops the cached locator so each run rebuilds it.
                let coarse = coarse.clone();
                pool.install(|| black_box(PeriodicComplex::is_refinement(&fine, &coarse).expect("periods")))
            })
        });
    }
    g.finish();
}

fn sup_distance(c: &mut Criterion) {
    let complex = Arc::new(base(2));
    let f0 = build_model_function(complex, &Cocycle::symmetric(Polarization::identity(2)), &Rational::new(1, 8))
        .expect("barycentric");
    let f = tate_iterate(&f0, 4).expect("refines");
    let mut g = c.benchmark_group("sup_distance_n2_level4");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(sup_distance_to_quadratic(&f).expect("exact"))))
        });
    }
    g.finish();
}

fn grid_discrepancy(c: &mut Criterion) {
    let lat = Lattice::integer(2);
    let complex = Arc::new(base(2).dyadic_refine(1));
    let mu = haar(&lat, &complex).expect("haar");
    let family = TestFamily::new(standard_test_family(complex, 8, 0).expect("family"), &mu).expect("integrals");
    let grid = torsion_grid(&lat, 128).expect("grid");
    let mut g = c.benchmark_group("discrepancy_n2_m128");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(family.discrepancy(&grid).expect("exact"))))
        });
    }
    g.finish();
}

fn pushforward(c: &mut Criterion) {
    let z1 = Lattice::integer(1);
    let product = z1.power(3);
    let mu = haar(&product, &PeriodicComplex::kuhn(&product)).expect("haar");
    let alpha = IntegralAffineMap::difference(&z1, 3).expect("difference");
    let mut g = c.benchmark_group("monte_carlo_n1_copies3_50k");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(monte_carlo_pushforward(&mu, &alpha, 50_000, 7).expect("samples"))))
        });
    }
    g.finish();
}

criterion_group!(benches, refinement, sup_distance, grid_discrepancy, pushforward);
criterion_main!(benches);
