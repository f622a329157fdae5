//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crobs::crx::{random_form, FactorCache, Form, Geometry, Levels};

/// A random one-form in `ker flat` at weight `k`, reproducible from `seed`.
pub fn flat_one_form(cache: &FactorCache, n: usize, k: i64, seed: u64) -> Form {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Geometry { n, k, levels: Levels::for_weight(n - 2, k, 0) };
    random_form(&mut rng, cache, &g, 1, true)
}
