//! Kernel timings on the default rayon pool against a one-thread pool.
//! Without the `parallel` feature only the sequential variant is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w2d_core::calculus::Ellipticity;
use w2d_core::contact::{inf_convolution, Side};
use w2d_core::grid::{make_grid, sample};
use w2d_core::maximal::{covering_lemma_check, maximal_function};
use w2d_core::regularity::{density_check, normalize, DensityParams};
use w2d_core::solutions::{singular_rhs, SolutionSpec};
use w2d_core::{GridFunction, Mask};

fn noise(n: usize) -> GridFunction {
    let g = make_grid(2, n).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(n as u64);
    let ball = g.unit_ball();
    let values = (0..g.len())
        .map(|i| {
            if ball.get(i) {
                r.gen_range(-1.0..1.0)
            } else {
                f64::NAN
            }
        })
        .collect();
    GridFunction::new(ball, values).unwrap()
}

#[cfg(feature = "parallel")]
fn variants() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    vec![("parallel", None), ("sequential", Some(one))]
}

#[cfg(not(feature = "parallel"))]
fn variants() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(feature = "parallel")]
fn run<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run<R>(_: &Option<()>, f: impl FnOnce() -> R) -> R {
    f()
}

fn kernels(c: &mut Criterion) {
    let u = noise(257);
    let small = noise(129);
    let abs = small.map(f64::abs).unwrap();
    let g = *small.grid();
    let f = g.open_unit_ball();
    let e = Mask::from_fn(g, |i| f.get(i) && small.values()[i] > 0.5);

    let grid = make_grid(2, 65).unwrap();
    let spec = SolutionSpec::RadialPower { beta: 1.5 };
    let ell = Ellipticity::new(1.0, 1.0).unwrap();
    let su = sample(&spec, &grid).unwrap();
    let sf = singular_rhs(&spec, &grid, 0.0, &ell, Side::Minus).unwrap();
    let nz = normalize(&su, &sf, 0.0, 0.1).unwrap();
    let params = DensityParams {
        k: 2.0,
        m_fac: 8.0,
        theta: 0.3,
        eps2: 0.01,
        gamma: 0.0,
        ellipticity: ell,
    };

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in variants() {
        group.bench_function(BenchmarkId::new("inf_convolution_257", name), |b| {
            b.iter(|| run(&pool, || inf_convolution(&u, 16.0).unwrap()))
        });
        group.bench_function(BenchmarkId::new("maximal_function_129", name), |b| {
            b.iter(|| run(&pool, || maximal_function(&abs)))
        });
        group.bench_function(BenchmarkId::new("covering_check_129", name), |b| {
            b.iter(|| run(&pool, || covering_lemma_check(&e, &f, 0.1, 0.9).unwrap()))
        });
        group.bench_function(BenchmarkId::new("density_scan_65", name), |b| {
            b.iter(|| run(&pool, || density_check(&nz.u, &nz.f, &params).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
