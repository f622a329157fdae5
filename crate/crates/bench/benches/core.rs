use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crobs::bott::{self, BundleSpec};
use crobs::crx::{build_weight_complex, FactorCache};
use crobs::kuranishi::{self, ChartOptions, RightInverse};
use crobs_bench::flat_one_form;

fn cech_grid(c: &mut Criterion) {
    c.bench_function("cech P^3 T(-4)", |b| b.iter(|| bott::oracle_table(&BundleSpec::tangent(&[3], &[-4])).unwrap()));
    c.bench_function("cech P^1 x P^3 T(-2, 2)", |b| {
        b.iter(|| bott::oracle_table(&BundleSpec::tangent(&[1, 3], &[-2, 2])).unwrap())
    });
}

fn complexes(c: &mut Criterion) {
    let mut g = c.benchmark_group("weight complex");
    g.sample_size(10);
    for (n, k) in [(3, -3), (5, -2), (5, 4)] {
        g.bench_function(format!("n={n} k={k}"), |b| b.iter(|| build_weight_complex(n, k, 0).unwrap()));
    }
    g.finish();
}

fn bracket(c: &mut Criterion) {
    let cache = FactorCache::new();
    let a = flat_one_form(&cache, 5, -1, 1);
    let b = flat_one_form(&cache, 5, 1, 2);
    c.bench_function("bracket n=5 weights (-1, 1)", |bch| bch.iter(|| a.bracket(&b)));
}

fn chart(c: &mut Criterion) {
    let cache = Arc::new(FactorCache::new());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seed = kuranishi::sample_seed(&mut rng, &cache, 3, &[-1, 1], 1).unwrap();
    let mut g = c.benchmark_group("chart");
    g.sample_size(10);
    g.bench_function("n=3 order 4", |b| {
        b.iter(|| {
            let p = RightInverse::new(cache.clone(), 1);
            kuranishi::chart_phi(&p, &seed, 4, &ChartOptions::default()).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, cech_grid, complexes, bracket, chart);
criterion_main!(benches);
