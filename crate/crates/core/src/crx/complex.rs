//! The per-weight complex: block data, ranks, and aggregated cohomology dimensions.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::{self, BlockSpace, BlockWeight, Geometry, Levels, POp, SpaceKind};
use super::factor::{orbit_size, sorted_weights, FactorCache, FactorCtx, Kind};
use crate::exactalg::{rank, SparseMatrix};

/// Highest vector-form degree kept (targets of degree-2 maps).
pub const TOP_T: usize = 3;
/// Highest scalar-form degree kept.
pub const TOP_O: usize = 4;

/// All spaces and operator matrices of one torus block.
pub struct BlockData {
    pub w: BlockWeight,
    pub t: Vec<BlockSpace>,
    pub o: Vec<BlockSpace>,
    /// `flat[q]: T^q -> O^{q+1}` for `q <= 2`.
    pub flat: Vec<SparseMatrix>,
    /// `dh[q]: T^q -> T^{q+1}` for `q <= 2`.
    pub dh: Vec<SparseMatrix>,
    /// `ds[q]: O^q -> O^{q+1}` for `q <= 3`.
    pub ds: Vec<SparseMatrix>,
    /// `O^1 -> T^0`.
    pub sharp0: SparseMatrix,
}

impl BlockData {
    pub fn build(cache: &FactorCache, g: &Geometry, w: &BlockWeight) -> BlockData {
        let t: Vec<BlockSpace> =
            (0..=TOP_T).map(|q| block::space(cache, g, w, SpaceKind::Vector(q))).collect();
        let o: Vec<BlockSpace> =
            (0..=TOP_O).map(|q| block::space(cache, g, w, SpaceKind::Scalar(q))).collect();
        let mat = |op: POp, s: &BlockSpace, d: &BlockSpace| block::matrix(cache, g, w, op, s, d);
        let flat = (0..TOP_T).map(|q| mat(POp::Flat(q), &t[q], &o[q + 1])).collect();
        let dh = (0..TOP_T).map(|q| mat(POp::DbarH(q), &t[q], &t[q + 1])).collect();
        let ds = (0..TOP_O).map(|q| mat(POp::Dbar(q), &o[q], &o[q + 1])).collect();
        let sharp0 = mat(POp::Sharp0, &o[1], &t[0]);
        BlockData { w: w.clone(), t, o, flat, dh, ds, sharp0 }
    }

    pub fn is_empty(&self) -> bool {
        self.t.iter().chain(self.o.iter()).all(|s| s.dim == 0)
    }

    /// `d^2 = 0`, `flat dh = dbar flat`, and `flat sharp = id` on this block.
    pub fn identities_hold(&self) -> bool {
        let d2 = (0..TOP_T - 1).all(|q| self.dh[q + 1].mul(&self.dh[q]).is_zero())
            && (0..TOP_O - 1).all(|q| self.ds[q + 1].mul(&self.ds[q]).is_zero());
        let con1 = (0..TOP_T).all(|q| {
            q + 1 >= self.ds.len()
                || self.flat.get(q + 1).is_none_or(|f| {
                    f.mul(&self.dh[q]) == self.ds[q + 1].mul(&self.flat[q])
                })
        });
        let inv = self.flat[0].mul(&self.sharp0) == SparseMatrix::identity(self.o[1].dim);
        d2 && con1 && inv
    }

    /// `dh^0 sharp dbar` on degree-zero functions.
    pub fn contact_matrix(&self) -> SparseMatrix {
        self.dh[0].mul(&self.sharp0).mul(&self.ds[0])
    }

    pub fn dims(&self) -> BlockDims {
        let stack = |q: usize| rank(&self.flat[q].vstack(&self.dh[q]));
        BlockDims {
            t: self.t.iter().map(|s| s.dim).collect(),
            o: self.o.iter().map(|s| s.dim).collect(),
            r_flat: self.flat.iter().map(rank).collect(),
            r_stack: (0..TOP_T).map(stack).collect(),
            r_dh: self.dh.iter().map(rank).collect(),
            r_ds: self.ds.iter().map(rank).collect(),
            r_ds_flat0: rank(&self.ds[1].mul(&self.flat[0])),
            r_contact: rank(&self.contact_matrix()),
        }
    }
}

/// Raw dimensions and ranks of one block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockDims {
    pub t: Vec<usize>,
    pub o: Vec<usize>,
    pub r_flat: Vec<usize>,
    pub r_stack: Vec<usize>,
    pub r_dh: Vec<usize>,
    pub r_ds: Vec<usize>,
    pub r_ds_flat0: usize,
    pub r_contact: usize,
}

impl BlockDims {
    pub fn summary(&self) -> WeightDims {
        let at = |v: &Vec<usize>, q: i64| if q < 0 { 0 } else { v.get(q as usize).copied().unwrap_or(0) };
        let z1 = self.t[1] - self.r_stack[1];
        let h0_c = self.t[0] - self.r_stack[0];
        let h2_c = self.t[2] - self.r_stack[2] + self.r_flat[1] - self.r_stack[1];
        let h_t = (0..TOP_T as i64).map(|q| at(&self.t, q) - at(&self.r_dh, q) - at(&self.r_dh, q - 1)).collect();
        let h_o = (0..TOP_O as i64).map(|q| at(&self.o, q) - at(&self.r_ds, q) - at(&self.r_ds, q - 1)).collect();
        WeightDims {
            h0_c,
            h2_c,
            contact_rank: self.r_contact,
            h_t,
            h_o,
            h1_ext: z1 + self.r_ds_flat0 - self.r_dh[0],
            z1,
            w: z1 - self.r_contact,
            space_t: self.t.clone(),
            space_o: self.o.clone(),
        }
    }
}

/// Aggregated dimensions at one weight.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDims {
    /// `dim H^0(C)`.
    pub h0_c: usize,
    /// `dim H^2(C)` (equal to `H^2` of the extended complex).
    pub h2_c: usize,
    /// Ambient `dim H^q` of the vector-form complex, `q = 0, 1, 2`.
    pub h_t: Vec<usize>,
    /// Ambient `dim H^q` of the scalar-form complex, `q = 0..=3`.
    pub h_o: Vec<usize>,
    /// `dim H^1` of the extended complex.
    pub h1_ext: usize,
    /// `dim ker(dh)` on `C^1` (grows with the level).
    pub z1: usize,
    pub contact_rank: usize,
    /// Complement of the contact action's image in `z1`.
    pub w: usize,
    pub space_t: Vec<usize>,
    pub space_o: Vec<usize>,
}

impl WeightDims {
    fn add_scaled(&mut self, o: &WeightDims, c: usize) {
        fn acc(a: &mut Vec<usize>, b: &[usize], c: usize) {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * c;
            }
        }
        acc(&mut self.h_t, &o.h_t, c);
        acc(&mut self.h_o, &o.h_o, c);
        acc(&mut self.space_t, &o.space_t, c);
        acc(&mut self.space_o, &o.space_o, c);
        self.h1_ext += o.h1_ext * c;
        self.z1 += o.z1 * c;
        self.h0_c += o.h0_c * c;
        self.h2_c += o.h2_c * c;
        self.contact_rank += o.contact_rank * c;
        self.w += o.w * c;
    }

    /// The level-independent part: everything except space sizes, `z1` and the contact rank.
    pub fn cohomology(&self) -> (usize, usize, usize, usize, Vec<usize>, Vec<usize>) {
        (self.h0_c, self.h1_ext, self.h2_c, self.w, self.h_t.clone(), self.h_o.clone())
    }
}

fn factor_weights(cache: &FactorCache, ctx: &FactorCtx, qmax: usize) -> Vec<Vec<i64>> {
    let lo = -ctx.level - 2;
    let hi = ctx.twist.max(0) + ctx.level + ctx.nc as i64 + 1;
    sorted_weights(ctx.nc, lo, hi, ctx.twist)
        .into_iter()
        .filter(|w| {
            (0..=qmax).any(|q| {
                [false, true].iter().any(|&vec| cache.block(ctx, Kind { q, vec }, w).dim() > 0)
            })
        })
        .collect()
}

/// Sorted block weights with their orbit sizes under coordinate permutations.
pub fn sorted_blocks(cache: &FactorCache, g: &Geometry) -> Vec<(BlockWeight, u128)> {
    let xs = factor_weights(cache, &g.ctx_x(), 1);
    let ys = factor_weights(cache, &g.ctx_y(), g.m().min(TOP_O));
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            out.push((BlockWeight { x: x.clone(), y: y.clone() }, orbit_size(x) * orbit_size(y)));
        }
    }
    out
}

/// Distinct permutations of a weight vector.
pub fn permutations(w: &[i64]) -> Vec<Vec<i64>> {
    let mut v = w.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
            return out;
        };
        let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
        v.swap(i - 1, j);
        v[i..].reverse();
        out.push(v.clone());
    }
}

/// Every nonempty block weight of the geometry, not just sorted representatives.
pub fn all_blocks(cache: &FactorCache, g: &Geometry) -> Vec<BlockWeight> {
    let xs: Vec<Vec<i64>> = factor_weights(cache, &g.ctx_x(), 1).iter().flat_map(|w| permutations(w)).collect();
    let ys: Vec<Vec<i64>> =
        factor_weights(cache, &g.ctx_y(), g.m().min(TOP_O)).iter().flat_map(|w| permutations(w)).collect();
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            out.push(BlockWeight { x: x.clone(), y: y.clone() });
        }
    }
    out
}

pub fn dims_at_levels(n: usize, k: i64, levels: Levels) -> (WeightDims, bool) {
    let (d, ok, _) = weight_dims(&FactorCache::new(), &Geometry { n, k, levels });
    (d, ok)
}

/// Aggregated dimensions of the weight-`k` complex at the given levels, and
/// whether the structural identities held on every block.
pub fn weight_dims(cache: &FactorCache, g: &Geometry) -> (WeightDims, bool, usize) {
    let blocks = sorted_blocks(cache, g);
    let per: Vec<Option<(WeightDims, u128, bool)>> = blocks
        .par_iter()
        .map(|(w, orbit)| {
            let b = BlockData::build(cache, g, w);
            if b.is_empty() {
                return None;
            }
            Some((b.dims().summary(), *orbit, b.identities_hold()))
        })
        .collect();
    let mut total = WeightDims::default();
    let mut ok = true;
    let mut count = 0;
    for (d, orbit, id) in per.into_iter().flatten() {
        total.add_scaled(&d, orbit as usize);
        ok &= id;
        count += 1;
    }
    (total, ok, count)
}

/// Stabilization and identity diagnostics of a built complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub stable: bool,
    pub identities: bool,
    pub blocks: usize,
    pub checked_levels: Levels,
}

/// The weight-`k` complex on `X^{2n-1}`, realized at anti-holomorphic
/// levels derived from `cutoff` and re-checked one level higher.
#[derive(Clone)]
pub struct WeightComplex {
    pub n: usize,
    pub k: i64,
    pub cutoff: i64,
    pub levels: Levels,
    pub dims: WeightDims,
    pub diagnostics: Diagnostics,
    cache: Arc<FactorCache>,
}

#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum CrxError {
    #[error("n must lie in 2..=6, got {0}")]
    BadDimension(usize),
    #[error("cutoff must be nonnegative, got {0}")]
    BadCutoff(i64),
    #[error("cohomology did not stabilize up to cutoff {0}")]
    Unstable(i64),
    #[error("element not in the model: {0}")]
    NotInModel(String),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
}

pub fn check_n(n: usize) -> Result<(), CrxError> {
    if (2..=6).contains(&n) {
        Ok(())
    } else {
        Err(CrxError::BadDimension(n))
    }
}

impl WeightComplex {
    pub fn geometry(&self) -> Geometry {
        Geometry { n: self.n, k: self.k, levels: self.levels }
    }

    pub fn cache(&self) -> &Arc<FactorCache> {
        &self.cache
    }

    pub fn block(&self, w: &BlockWeight) -> BlockData {
        BlockData::build(&self.cache, &self.geometry(), w)
    }

    pub fn is_stable(&self) -> bool {
        self.diagnostics.stable
    }
}

/// Builds the weight-`k` complex at `cutoff`, comparing cohomology with `cutoff + 1`.
pub fn build_weight_complex(n: usize, k: i64, cutoff: i64) -> Result<WeightComplex, CrxError> {
    build_with_cache(n, k, cutoff, Arc::new(FactorCache::new()))
}

pub fn build_with_cache(n: usize, k: i64, cutoff: i64, cache: Arc<FactorCache>) -> Result<WeightComplex, CrxError> {
    check_n(n)?;
    if cutoff < 0 {
        return Err(CrxError::BadCutoff(cutoff));
    }
    let levels = Levels::for_weight(n - 2, k, cutoff);
    let g = Geometry { n, k, levels };
    let (dims, ok, blocks) = weight_dims(&cache, &g);
    let g2 = Geometry { n, k, levels: levels.raised(1) };
    let (dims2, ok2, _) = weight_dims(&cache, &g2);
    let diagnostics = Diagnostics {
        stable: dims.cohomology() == dims2.cohomology(),
        identities: ok && ok2,
        blocks,
        checked_levels: g2.levels,
    };
    Ok(WeightComplex { n, k, cutoff, levels, dims, diagnostics, cache })
}

/// Raises the cutoff from `cutoff` until two consecutive levels agree.
pub fn build_stable(n: usize, k: i64, cutoff: i64, max_cutoff: i64) -> Result<WeightComplex, CrxError> {
    let cache = Arc::new(FactorCache::new());
    let mut c = cutoff;
    loop {
        let wc = build_with_cache(n, k, c, cache.clone())?;
        if wc.is_stable() {
            return Ok(wc);
        }
        if c >= max_cutoff {
            return Err(CrxError::Unstable(c));
        }
        c += 1;
    }
}
