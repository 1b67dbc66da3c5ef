//! Node-wise kernels on a single-thread pool and on the default rayon pool.
//! Without the `parallel` feature both variants run the sequential fallback.

use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use fuzzy_prox::berezin::{symbol_sup_norm, upper_symbol, BerezinChannel};
use fuzzy_prox::bridge::BbBridge;
use fuzzy_prox::group_rep::{make_irrep, sphere_grid};
use fuzzy_prox::linalg::random_hermitian;
use fuzzy_prox::quantum_metric::matrix_lipschitz;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        (
            "sequential",
            ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
        ),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bridge_sup(c: &mut Criterion) {
    let mut group = c.benchmark_group("bridge_sup");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for n in [4usize, 8, 16] {
        let grid = sphere_grid(2 * n + 2).unwrap();
        let bridge = BbBridge::for_grid(n, n, &grid);
        let s = random_hermitian(n + 1, &mut rng);
        let t = random_hermitian(n + 1, &mut rng);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                pool.install(|| b.iter(|| black_box(bridge.sup(&s, &t))))
            });
        }
    }
    group.finish();
}

fn channel(c: &mut Criterion) {
    let mut group = c.benchmark_group("berezin_channel");
    group.sample_size(10);
    for n in [4usize, 8] {
        let grid = sphere_grid(2 * n + 2).unwrap();
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                pool.install(|| b.iter(|| black_box(BerezinChannel::new(n, n, &grid).unwrap())))
            });
        }
    }
    group.finish();
}

fn lipschitz(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_lipschitz");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [4usize, 8] {
        let rep = make_irrep(n).unwrap();
        let t = random_hermitian(n + 1, &mut rng);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                pool.install(|| b.iter(|| black_box(matrix_lipschitz(&rep, &t).unwrap())))
            });
        }
    }
    group.finish();
}

fn symbol_sup(c: &mut Criterion) {
    let mut group = c.benchmark_group("symbol_sup_norm");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 8;
    let grid = Arc::new(sphere_grid(2 * n + 2).unwrap());
    let rep = make_irrep(n).unwrap();
    let t = random_hermitian(n + 1, &mut rng);
    let f = upper_symbol(&rep, &t, &grid).unwrap();
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            pool.install(|| b.iter(|| black_box(symbol_sup_norm(&f))))
        });
    }
    group.finish();
}

criterion_group!(benches, bridge_sup, channel, lipschitz, symbol_sup);
criterion_main!(benches);
