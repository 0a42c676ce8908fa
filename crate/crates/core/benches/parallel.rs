//! Same workloads on a one-thread rayon pool and on the default pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gapcover::formulas::{max_sat, random_3sat5};
use gapcover::proof_systems::{clause_variable_game, game_value_exact};
use gapcover::set_systems::{special_from_universal, verify_special};
use rayon::ThreadPoolBuilder;

fn pools(c: &mut Criterion) {
    let single = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let default = ThreadPoolBuilder::new().build().unwrap();
    let special = special_from_universal(10, 3, 1).unwrap();
    let formula = random_3sat5(21, 1).unwrap();
    let game = clause_variable_game(&random_3sat5(15, 1).unwrap()).unwrap();

    let mut group = c.benchmark_group("pool");
    group.sample_size(10);
    for (name, pool) in [("1-thread", &single), ("default", &default)] {
        group.bench_function(BenchmarkId::new("verify_special(10,3)", name), |b| {
            b.iter(|| pool.install(|| verify_special(&special, 3).unwrap()))
        });
        group.bench_function(BenchmarkId::new("max_sat(n=21)", name), |b| {
            b.iter(|| pool.install(|| max_sat(formula.formula()).unwrap()))
        });
        group.bench_function(BenchmarkId::new("game_value_exact(n=15)", name), |b| {
            b.iter(|| pool.install(|| game_value_exact(&game).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, pools);
criterion_main!(benches);
