//! Obstruction spaces `W_k`, extended cohomology checks, the dimension-7
//! analysis, and the fillability classifier.
//!
//! `W_k` is a complement of the image of the contact action
//! `f -> dbar_H sharp dbar f` inside `ker dbar_H ∩ ker flat` at weight `k`.
//! Dimensions and memberships do not depend on the complement chosen;
//! residual coefficients do.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bott::{self, BundleSpec};
use crate::cech::{self, CechError};
use crate::crx::{
    all_blocks, build_with_cache, check_n, BlockData, BlockWeight, CrxError, DeformationTensor, FactorCache, Form,
    Geometry, Levels, Preimage, SpaceKind, TensorFile, WeightComplex, SCHEMA_VERSION,
};
use crate::exactalg::{complement, kernel, Scalar, Solver, SparseMatrix, SparseVec, Subspace};

#[cfg(test)]
mod tests;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ObstructionError {
    #[error(transparent)]
    Crx(#[from] CrxError),
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error("the closed form covers k <= 0, got k = {0}")]
    PositiveWeight(i64),
    #[error("theory/implementation discrepancy at n={n}, k={k} for {what}: expected {expected}, computed {computed}")]
    Mismatch { n: usize, k: i64, what: &'static str, expected: usize, computed: usize },
    #[error("weight {k} lies outside the built range [{kmin}, {kmax}]")]
    OutOfRange { k: i64, kmin: i64, kmax: i64 },
    #[error("input is not closed at weight {0}: dbar_H or flat of it is nonzero")]
    NotClosed(i64),
    #[error("cohomology at n={n}, k={k} did not stabilize up to cutoff {cutoff}")]
    Unstable { n: usize, k: i64, cutoff: i64 },
    #[error("tensor is for n={got}, expected n={expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("bracket of classes at weights {k1} and {k2} is not dbar_H-exact")]
    NotExact { k1: i64, k2: i64 },
    #[error("the dimension-7 analysis needs n = 4")]
    NotDimensionSeven,
}

/// Shared factor cache plus memoized weight complexes.
pub struct Context {
    cache: Arc<FactorCache>,
    complexes: Mutex<HashMap<(usize, i64, i64), Arc<WeightComplex>>>,
    /// How many times the cutoff may be raised when a weight does not stabilize.
    pub extra_cutoff: i64,
}

impl Default for Context {
    fn default() -> Self {
        Context::new()
    }
}

impl Context {
    pub fn new() -> Self {
        Context { cache: Arc::new(FactorCache::new()), complexes: Mutex::new(HashMap::new()), extra_cutoff: 1 }
    }

    pub fn cache(&self) -> &Arc<FactorCache> {
        &self.cache
    }

    /// The complex at `(n, k)`, starting at `cutoff` and raising it until stable.
    pub fn complex(&self, n: usize, k: i64, cutoff: i64) -> Result<Arc<WeightComplex>, ObstructionError> {
        if let Some(wc) = self.complexes.lock().unwrap().get(&(n, k, cutoff)) {
            return Ok(wc.clone());
        }
        let mut c = cutoff;
        let wc = loop {
            let wc = build_with_cache(n, k, c, self.cache.clone())?;
            if wc.is_stable() {
                break wc;
            }
            if c >= cutoff + self.extra_cutoff {
                return Err(ObstructionError::Unstable { n, k, cutoff: c });
            }
            c += 1;
        };
        let wc = Arc::new(wc);
        self.complexes.lock().unwrap().insert((n, k, cutoff), wc.clone());
        Ok(wc)
    }
}

/// Dimension of the `dbar sharp H^1(P^1, O(k))` term: zero for `k >= -2`.
pub fn dbar_sharp_dim(k: i64) -> usize {
    if k < -2 {
        bott::h_line(1, k, 1)
    } else {
        0
    }
}

/// `dim W_k` for `k <= 0` from the product formula
/// `h^1(O(k)) h^0(T(-k)) + (h^1(T(k)) + dim dbar sharp H^1(O(k))) h^0(O(-k))`,
/// first factors on `P^1`, second on `P^{n-2}`.
pub fn w_dim_closed(n: usize, k: i64) -> Result<usize, ObstructionError> {
    check_n(n)?;
    if k > 0 {
        return Err(ObstructionError::PositiveWeight(k));
    }
    let m = n - 2;
    Ok(bott::h_line(1, k, 1) * bott::h_tangent(m, -k, 0)
        + (bott::h_tangent(1, k, 1) + dbar_sharp_dim(k)) * bott::h_line(m, -k, 0))
}

/// `dim W_k` by linear algebra in the model.
pub fn w_dim_linear(ctx: &Context, n: usize, k: i64, cutoff: i64) -> Result<usize, ObstructionError> {
    Ok(ctx.complex(n, k, cutoff)?.dims.w)
}

/// `dim W_k` for `k >= 0`, by linear algebra.
pub fn w_dim_positive(ctx: &Context, n: usize, k: i64, cutoff: i64) -> Result<usize, ObstructionError> {
    if k < 0 {
        return Err(ObstructionError::OutOfRange { k, kmin: 0, kmax: i64::MAX });
    }
    w_dim_linear(ctx, n, k, cutoff)
}

/// `ker dbar_H ∩ ker flat`, the contact image in it, and a complement, on one block.
pub struct WBlock {
    pub geometry: Geometry,
    pub w: BlockWeight,
    pub closed: Subspace,
    pub image: Subspace,
    pub complement: Subspace,
    split: Solver,
}

impl WBlock {
    pub fn build(cache: &FactorCache, g: &Geometry, w: &BlockWeight) -> Result<WBlock, ObstructionError> {
        let b = BlockData::build(cache, g, w);
        let closed = kernel(&b.flat[1].vstack(&b.dh[1]));
        let contact = b.contact_matrix();
        let image = Subspace::span(contact.nrows(), contact.columns());
        let complement = complement(&image, &closed).map_err(|e| CrxError::Mismatch(e.to_string()))?;
        let cols: Vec<SparseVec> = image.basis().iter().chain(complement.basis()).cloned().collect();
        let split = Solver::new(&SparseMatrix::from_columns(closed.ambient(), cols));
        Ok(WBlock { geometry: *g, w: w.clone(), closed, image, complement, split })
    }

    pub fn dim(&self) -> usize {
        self.complement.dim()
    }

    /// Splits closed coordinates `v` as `image part + complement part`,
    /// returning the complement part; `None` if `v` is not closed.
    pub fn residual(&self, v: &SparseVec) -> Option<SparseVec> {
        let x = self.split.solve(v).ok()?;
        let r = self.image.dim();
        let mut out = SparseVec::new();
        for (i, c) in x.entries() {
            if *i >= r {
                out = out.add_scaled(&self.complement.basis()[i - r], c);
            }
        }
        Some(out)
    }

    pub fn complement_forms(&self, cache: &FactorCache) -> Vec<Form> {
        self.complement
            .basis()
            .iter()
            .map(|v| Form::from_coords(cache, &self.geometry, &self.w, SpaceKind::Vector(1), v))
            .collect()
    }
}

/// `W_k` of a built weight complex.
pub struct WSpace {
    pub n: usize,
    pub k: i64,
    pub levels: Levels,
    pub dim: usize,
    cache: Arc<FactorCache>,
}

impl WSpace {
    pub fn block(&self, w: &BlockWeight) -> Result<WBlock, ObstructionError> {
        WBlock::build(&self.cache, &Geometry { n: self.n, k: self.k, levels: self.levels }, w)
    }

    /// Basis vectors of `W_k` as forms, block by block, stopping after `limit`.
    pub fn basis(&self, limit: usize) -> Result<Vec<Form>, ObstructionError> {
        let g = Geometry { n: self.n, k: self.k, levels: self.levels };
        let mut out = Vec::new();
        for w in all_blocks(&self.cache, &g) {
            if out.len() >= limit {
                break;
            }
            let b = self.block(&w)?;
            out.extend(b.complement_forms(&self.cache).into_iter().take(limit - out.len()));
        }
        Ok(out)
    }
}

/// `W_k` for a built complex, cross-checked against the closed form for `k <= 0`.
pub fn w_space(wc: &WeightComplex) -> Result<WSpace, ObstructionError> {
    if wc.k <= 0 {
        let expected = w_dim_closed(wc.n, wc.k)?;
        if expected != wc.dims.w {
            return Err(ObstructionError::Mismatch {
                n: wc.n,
                k: wc.k,
                what: "dim W",
                expected,
                computed: wc.dims.w,
            });
        }
    }
    Ok(WSpace { n: wc.n, k: wc.k, levels: wc.levels, dim: wc.dims.w, cache: wc.cache().clone() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Ext {
    pub k: i64,
    pub linear: usize,
    /// The Künneth value `h^1` of `T(k, -k)` on `P^1 x P^{n-2}`, for `k <= 0`.
    pub kunneth: Option<usize>,
}

/// `dim H^1` of the extended complex, cross-checked against Künneth for `k <= 0`.
pub fn h1_extended(ctx: &Context, n: usize, k: i64, cutoff: i64) -> Result<H1Ext, ObstructionError> {
    let wc = ctx.complex(n, k, cutoff)?;
    let linear = wc.dims.h1_ext;
    let kunneth = (k <= 0).then(|| bott::h_product_tangent(1, n - 2, (k, -k), 1));
    if let Some(e) = kunneth {
        if e != linear {
            return Err(ObstructionError::Mismatch { n, k, what: "dim H^1 of the extended complex", expected: e, computed: linear });
        }
    }
    Ok(H1Ext { k, linear, kunneth })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H2Check {
    pub k: i64,
    /// `dim H^2` of `(ker flat, dbar_H)`.
    pub h2: usize,
    /// `dim H^2` of the ambient vector-form complex.
    pub ambient: usize,
    /// Rank of contraction with `F` from the ambient `H^2` to `H^3` of the line bundle.
    pub contraction_rank: Option<usize>,
    pub contraction_target: Option<usize>,
    /// `ambient - contraction_rank`, when the scalar `H^2` vanishes.
    pub via_contraction: Option<usize>,
}

/// `dim H^2(C)` at weight `k`. When the ambient `H^2` is nonzero and the
/// scalar `H^2` vanishes, the count is also derived from the kernel of the
/// contraction with `F` and the two must agree away from `n = 4`.
pub fn h2_check(ctx: &Context, n: usize, k: i64, cutoff: i64) -> Result<H2Check, ObstructionError> {
    let wc = ctx.complex(n, k, cutoff)?;
    let h2 = wc.dims.h2_c;
    let ambient = wc.dims.h_t[2];
    let mut out = H2Check { k, h2, ambient, contraction_rank: None, contraction_target: None, via_contraction: None };
    if ambient > 0 && wc.dims.h_o[2] == 0 {
        let r = cech::contraction_rank(&BundleSpec::tangent(&[1, n - 2], &[k, -k]), 2)?;
        if r.source != ambient {
            return Err(ObstructionError::Mismatch { n, k, what: "ambient dim H^2", expected: r.source, computed: ambient });
        }
        out.contraction_rank = Some(r.rank);
        out.contraction_target = Some(r.target);
        out.via_contraction = Some(ambient - r.rank);
        if n != 4 && ambient - r.rank != h2 {
            return Err(ObstructionError::Mismatch { n, k, what: "dim H^2 via contraction", expected: ambient - r.rank, computed: h2 });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub k1: i64,
    pub k2: i64,
    pub bracket_nonzero: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dim7Report {
    /// `(k, dim H^1)` of the extended complex for `k >= 0`.
    pub h1_nonnegative: Vec<(i64, usize)>,
    /// `(k, dim H^2)` for `k <= 0`.
    pub h2_nonpositive: Vec<(i64, usize)>,
    /// `(k, dim H^2)` for `k > 0`, recorded.
    pub h2_positive: Vec<(i64, usize)>,
    pub brackets: Vec<BracketCheck>,
}

impl Dim7Report {
    pub fn h1_concentrated(&self) -> bool {
        self.h1_nonnegative.iter().all(|(_, d)| *d == 0)
    }

    pub fn h2_concentrated(&self) -> bool {
        self.h2_nonpositive.iter().all(|(_, d)| *d == 0)
    }

    pub fn brackets_exact(&self) -> bool {
        self.brackets.iter().all(|b| b.exact)
    }

    pub fn passed(&self) -> bool {
        self.h1_concentrated() && self.h2_concentrated() && self.brackets_exact()
    }
}

/// A nonzero `W_k` vector from a random block of the weight complex.
fn w_representative(ctx: &Context, rng: &mut ChaCha8Rng, n: usize, k: i64, cutoff: i64) -> Result<Option<Form>, ObstructionError> {
    let ws = w_space(&*ctx.complex(n, k, cutoff)?)?;
    if ws.dim == 0 {
        return Ok(None);
    }
    let g = Geometry { n, k, levels: ws.levels };
    let blocks = all_blocks(ctx.cache(), &g);
    for _ in 0..256 {
        let b = ws.block(&blocks[rng.gen_range(0..blocks.len())])?;
        if b.dim() > 0 {
            let forms = b.complement_forms(ctx.cache());
            return Ok(Some(forms[rng.gen_range(0..forms.len())].clone()));
        }
    }
    Ok(None)
}

/// The checks in dimension 7 (`n = 4`): `H^1` of the extended complex vanishes
/// on `k >= 0`, `H^2` vanishes on `k <= 0`, and brackets of negative-weight
/// classes are exact.
pub fn dim7_analysis(
    ctx: &Context,
    kmin: i64,
    kmax: i64,
    cutoff: i64,
    pairs: &[(i64, i64)],
    seed: u64,
) -> Result<Dim7Report, ObstructionError> {
    let n = 4;
    let mut report = Dim7Report { h1_nonnegative: vec![], h2_nonpositive: vec![], h2_positive: vec![], brackets: vec![] };
    for k in kmin..=kmax {
        let wc = ctx.complex(n, k, cutoff)?;
        if k >= 0 {
            report.h1_nonnegative.push((k, wc.dims.h1_ext));
        }
        if k <= 0 {
            report.h2_nonpositive.push((k, wc.dims.h2_c));
        } else {
            report.h2_positive.push((k, wc.dims.h2_c));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = Preimage::new(ctx.cache().clone());
    for &(k1, k2) in pairs {
        let (Some(a), Some(b)) = (w_representative(ctx, &mut rng, n, k1, cutoff)?, w_representative(ctx, &mut rng, n, k2, cutoff)?) else {
            continue;
        };
        let br = a.bracket(&b);
        let exact = br.is_zero() || pre.solve(&br, 1, true, 1)?.is_some();
        if !exact {
            return Err(ObstructionError::NotExact { k1, k2 });
        }
        report.brackets.push(BracketCheck { k1, k2, bracket_nonzero: !br.is_zero(), exact });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillabilityVerdict {
    pub schema_version: u32,
    pub n: usize,
    #[serde(rename = "fillable_N")]
    pub fillable_n: bool,
    #[serde(rename = "fillable_M")]
    pub fillable_m: bool,
    pub stable: bool,
    /// `false` for `n <= 3`, where the `M`-side verdict is the linear criterion only.
    #[serde(rename = "fillable_M_theorem_backed")]
    pub fillable_m_theorem_backed: bool,
    /// Components outside the contact image on negative weights (basis-dependent certificate).
    pub residuals: TensorFile,
    /// The same on positive weights.
    pub positive_residuals: TensorFile,
    /// Weight zero, informational only.
    pub weight_zero_residual: TensorFile,
}

/// Infinitesimal gauge fixing: splits each weight component of a closed
/// tensor into contact image plus `W_k`, and reads the verdicts off the
/// `W_k` parts.
pub fn classify(
    ctx: &Context,
    dt: &DeformationTensor,
    n: usize,
    kmin: i64,
    kmax: i64,
    cutoff: i64,
) -> Result<FillabilityVerdict, ObstructionError> {
    check_n(n)?;
    if dt.n != n {
        return Err(ObstructionError::WrongDimension { expected: n, got: dt.n });
    }
    let mut residual = DeformationTensor::zero(n);
    for (&k, f) in &dt.coeffs {
        if k < kmin || k > kmax {
            return Err(ObstructionError::OutOfRange { k, kmin, kmax });
        }
        if !f.flat().is_zero() || !f.dbar_h().is_zero() {
            return Err(ObstructionError::NotClosed(k));
        }
        let wc = ctx.complex(n, k, cutoff)?;
        let levels = wc.levels.max(f.levels);
        let f = f.raise_to(levels);
        let g = Geometry { n, k, levels };
        let mut r = Form::zero(n, k, levels);
        for (w, part) in f.split_blocks() {
            let v = part.coords(ctx.cache(), &w, SpaceKind::Vector(1))?;
            let wb = WBlock::build(ctx.cache(), &g, &w)?;
            let res = wb.residual(&v).ok_or(ObstructionError::NotClosed(k))?;
            for (t, c) in Form::from_coords(ctx.cache(), &g, &w, SpaceKind::Vector(1), &res).terms {
                r.add_term(t, &c);
            }
        }
        residual.insert(r)?;
    }
    let neg = residual.restrict(|k| k < 0);
    let pos = residual.restrict(|k| k > 0);
    let zero = residual.restrict(|k| k == 0);
    let fillable_n = neg.is_zero();
    let fillable_m = pos.is_zero();
    Ok(FillabilityVerdict {
        schema_version: SCHEMA_VERSION,
        n,
        fillable_n,
        fillable_m,
        stable: fillable_n && fillable_m,
        fillable_m_theorem_backed: n > 3,
        residuals: neg.to_file(),
        positive_residuals: pos.to_file(),
        weight_zero_residual: zero.to_file(),
    })
}

/// `dt + contact_action(f)` for a function `f` given weight by weight.
pub fn add_contact(dt: &DeformationTensor, f: &[Form]) -> Result<DeformationTensor, ObstructionError> {
    let mut out = dt.clone();
    for g in f {
        out.insert(g.contact_action())?;
    }
    Ok(out)
}

/// A random function at weight `k` supported on a few blocks.
pub fn random_function<R: Rng>(rng: &mut R, cache: &FactorCache, n: usize, k: i64, blocks: usize) -> Form {
    let g = Geometry { n, k, levels: Levels::for_weight(n - 2, k, 0) };
    let all = all_blocks(cache, &g);
    let mut out = Form::zero(n, k, g.levels);
    for _ in 0..blocks {
        let w = &all[rng.gen_range(0..all.len())];
        let dim = crate::crx::block_space_dim(cache, &g, w, SpaceKind::Scalar(0));
        for i in 0..dim {
            let c = Scalar::from_int(rng.gen_range(-3i64..=3));
            let f = Form::from_coords(cache, &g, w, SpaceKind::Scalar(0), &SparseVec::unit(i).scale(&c));
            for (t, v) in f.terms {
                out.add_term(t, &v);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub k: i64,
    pub h1_ext: usize,
    pub h2: usize,
    pub w_closed: Option<usize>,
    pub w_linear: usize,
    #[serde(rename = "match")]
    pub matched: bool,
    pub cutoff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub schema_version: u32,
    pub n: usize,
    pub kmin: i64,
    pub kmax: i64,
    pub weights: Vec<WeightRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<FillabilityVerdict>,
}

impl ObstructionReport {
    pub fn all_match(&self) -> bool {
        self.weights.iter().all(|w| w.matched)
    }

    /// `sum_{k=K}^{-2} dim W_k` for `K = -2, -3, ...` down to `kmin`.
    pub fn tail_sums(&self) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        let mut acc = 0;
        for k in (self.kmin..=-2).rev() {
            if let Some(r) = self.weights.iter().find(|r| r.k == k) {
                acc += r.w_linear;
                out.push((k, acc));
            }
        }
        out
    }
}

/// Per-weight `H^1` of the extended complex, `H^2`, and `W_k` both ways.
pub fn obstruction_report(ctx: &Context, n: usize, kmin: i64, kmax: i64, cutoff: i64) -> Result<ObstructionReport, ObstructionError> {
    check_n(n)?;
    let mut weights = Vec::new();
    for k in kmin..=kmax {
        let wc = ctx.complex(n, k, cutoff)?;
        let w_closed = if k <= 0 { Some(w_dim_closed(n, k)?) } else { None };
        let d = &wc.dims;
        weights.push(WeightRecord {
            k,
            h1_ext: d.h1_ext,
            h2: d.h2_c,
            w_closed,
            w_linear: d.w,
            matched: w_closed.is_none_or(|c| c == d.w),
            cutoff: wc.cutoff,
        });
    }
    Ok(ObstructionReport { schema_version: SCHEMA_VERSION, n, kmin, kmax, weights, verdict: None })
}
