//! Random model elements, for property suites and benchmarks.

use rand::Rng;

use super::block::{Geometry, SpaceKind};
use super::complex::{all_blocks, BlockData};
use super::factor::FactorCache;
use super::form::Form;
use crate::exactalg::{kernel, Scalar, SparseVec};

/// A degree-`q` vector form on three random blocks with coefficients in
/// `-3..=3`; restricted to `ker flat` when `in_flat_kernel`.
pub fn random_form<R: Rng>(rng: &mut R, cache: &FactorCache, g: &Geometry, q: usize, in_flat_kernel: bool) -> Form {
    let blocks = all_blocks(cache, g);
    let mut out = Form::zero(g.n, g.k, g.levels);
    for _ in 0..3 {
        let w = &blocks[rng.gen_range(0..blocks.len())];
        let b = BlockData::build(cache, g, w);
        let basis: Vec<SparseVec> = if in_flat_kernel {
            kernel(&b.flat[q]).basis().to_vec()
        } else {
            (0..b.t[q].dim).map(SparseVec::unit).collect()
        };
        for v in basis {
            let c = rng.gen_range(-3i64..=3);
            if c != 0 {
                let f = Form::from_coords(cache, g, w, SpaceKind::Vector(q), &v.scale(&Scalar::from_int(c)));
                out = out.add(&f).expect("same weight");
            }
        }
    }
    out
}
