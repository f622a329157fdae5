//! Brute-force Čech cohomology of twisted line and tangent sheaves on
//! `P^m` and `P^m x P^l`, over the standard affine cover.
//!
//! Every cochain space splits into finite blocks indexed by the exponent
//! vector of the Laurent monomial involved, and the block complex depends
//! only on which exponents are negative (and, for tangent sheaves, which are
//! exactly -1). Blocks are therefore grouped by that sign pattern, each
//! pattern is computed once and weighted by the number of blocks inside the
//! exponent box.
//!
//! Tangent sheaves are realized through the Euler sequence: the block
//! complex is the mapping cone of `O(d) -> O(d+1)^{m+1}`, so a class is
//! carried by its generator components `c_i` (coefficients of
//! `z^{mu+e_i} d/dz_i`), with the auxiliary `O(d)` part solved for when
//! needed.

mod blocks;
mod complex;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::bott::{BundleError, BundleSpec, FactorSheaf, Structure};
use crate::exactalg::{rank, Scalar, SparseMatrix, SparseVec};

pub use blocks::{key_counts, FactorKey};
pub use complex::{induced_rank, Complex, Label, Slot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CechError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("exponent box {got} is below the stabilization bound {bound}")]
    BoxTooSmall { got: i64, bound: i64 },
    #[error("operation needs {0}")]
    WrongStructure(&'static str),
}

/// Smallest admissible exponent box: `sum |twist| + dim + 2`.
pub fn box_bound(bundle: &BundleSpec) -> i64 {
    bundle.twist.iter().map(|d| d.abs()).sum::<i64>() + bundle.base_dim() as i64 + 2
}

fn check(bundle: &BundleSpec, b: i64) -> Result<(), CechError> {
    bundle.validate()?;
    let bound = box_bound(bundle);
    if b < bound {
        return Err(CechError::BoxTooSmall { got: b, bound });
    }
    Ok(())
}

fn factor_complex(f: &FactorSheaf, key: FactorKey) -> Complex {
    if f.tangent {
        blocks::cone_complex(f.m, key)
    } else {
        blocks::line_complex(f.m, key.neg)
    }
}

fn tensor_all(parts: Vec<Complex>) -> Complex {
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    it.fold(first, |acc, c| Complex::tensor(&acc, &c))
}

/// Block complex of the whole bundle at one sign pattern per factor.
pub fn block_complex(bundle: &BundleSpec, keys: &[FactorKey]) -> Complex {
    let parts: Vec<Complex> = bundle
        .summands()
        .iter()
        .map(|s| tensor_all(s.iter().zip(keys).map(|(f, &k)| factor_complex(f, k)).collect()))
        .collect();
    Complex::direct_sum(&parts)
}

/// Sign patterns occurring in the box, with the number of blocks of each.
pub fn weighted_keys(bundle: &BundleSpec, b: i64) -> Vec<(Vec<FactorKey>, u128)> {
    let tangent_factor: Vec<bool> = (0..bundle.factors.len())
        .map(|i| bundle.summands().iter().any(|s| s[i].tangent))
        .collect();
    let per: Vec<BTreeMap<FactorKey, u128>> = bundle
        .factors
        .iter()
        .zip(&bundle.twist)
        .zip(&tangent_factor)
        .map(|((&m, &d), &t)| {
            let raw = key_counts(m, d, b);
            if t {
                raw
            } else {
                let mut merged = BTreeMap::new();
                for (k, c) in raw {
                    *merged.entry(FactorKey { neg: k.neg, minus_one: 0 }).or_insert(0) += c;
                }
                merged
            }
        })
        .collect();
    let mut out: Vec<(Vec<FactorKey>, u128)> = vec![(Vec::new(), 1)];
    for table in &per {
        out = out
            .iter()
            .flat_map(|(ks, c)| {
                table.iter().map(move |(k, c2)| {
                    let mut ks = ks.clone();
                    ks.push(*k);
                    (ks, c * c2)
                })
            })
            .collect();
    }
    out
}

/// `h^q` of the bundle, summed over all monomial blocks in the box.
pub fn cech_dim(bundle: &BundleSpec, q: usize, b: i64) -> Result<usize, CechError> {
    Ok(cech_dims(bundle, b)?.get(q).copied().unwrap_or(0))
}

/// All `h^q`, `q = 0..=dim`, in one pass over the blocks.
pub fn cech_dims(bundle: &BundleSpec, b: i64) -> Result<Vec<usize>, CechError> {
    check(bundle, b)?;
    let n = bundle.base_dim();
    if bundle.summands().is_empty() {
        return Ok(vec![0; n + 1]);
    }
    let keys = weighted_keys(bundle, b);
    let per: Vec<Vec<u128>> = keys
        .par_iter()
        .map(|(ks, c)| {
            let cx = block_complex(bundle, ks);
            (0..=n as i32).map(|q| c * cx.cohomology(q) as u128).collect()
        })
        .collect();
    Ok((0..=n).map(|q| per.iter().map(|v| v[q]).sum::<u128>() as usize).collect())
}

/// Index of a basis cochain: intersection per factor, coefficient monomial
/// per factor, and for tangent sheaves the `(factor, coordinate)` of the
/// generator `d/dz`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CochainKey {
    pub masks: Vec<u32>,
    pub monomial: Vec<Vec<i64>>,
    pub generator: Option<(usize, usize)>,
}

impl CochainKey {
    /// Exponent vector of the underlying `O(d)` block on each factor.
    fn block(&self) -> Vec<Vec<i64>> {
        let mut mu = self.monomial.clone();
        if let Some((f, i)) = self.generator {
            mu[f][i] -= 1;
        }
        mu
    }

    fn label(&self) -> Label {
        self.masks
            .iter()
            .enumerate()
            .map(|(f, &mask)| match self.generator {
                Some((g, i)) if g == f => Slot::Gen { gen: i as u8, mask },
                _ => Slot::Line { mask },
            })
            .collect()
    }

    fn from_label(label: &Label, mu: &[Vec<i64>]) -> Option<Self> {
        let mut generator = None;
        let mut monomial = mu.to_vec();
        let mut masks = Vec::new();
        for (f, s) in label.iter().enumerate() {
            match *s {
                Slot::Aux { .. } => return None,
                Slot::Gen { gen, .. } => {
                    generator = Some((f, gen as usize));
                    monomial[f][gen as usize] += 1;
                }
                Slot::Line { .. } => {}
            }
            masks.push(s.mask());
        }
        Some(CochainKey { masks, monomial, generator })
    }
}

/// A Čech cochain with finitely many nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CechClass {
    pub bundle: BundleSpec,
    pub degree: usize,
    pub cochain: BTreeMap<CochainKey, Scalar>,
}

impl CechClass {
    pub fn zero(bundle: &BundleSpec, degree: usize) -> Self {
        CechClass { bundle: bundle.clone(), degree, cochain: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.cochain.is_empty()
    }

    fn insert(&mut self, k: CochainKey, v: Scalar) {
        let mut e = self.cochain.remove(&k).unwrap_or_else(Scalar::zero);
        e += &v;
        if !e.is_zero() {
            self.cochain.insert(k, e);
        }
    }

    pub fn add_scaled(&self, other: &CechClass, c: &Scalar) -> CechClass {
        let mut out = self.clone();
        for (k, v) in &other.cochain {
            out.insert(k.clone(), v * c);
        }
        out
    }

    /// Entries grouped by monomial block.
    fn by_block(&self) -> BTreeMap<Vec<Vec<i64>>, Vec<(Label, Scalar)>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (k, v) in &self.cochain {
            out.entry(k.block()).or_default().push((k.label(), v.clone()));
        }
        out
    }
}

fn label_index(cx: &Complex, q: i32) -> HashMap<Label, usize> {
    if q < cx.lo || q > cx.hi() {
        return HashMap::new();
    }
    cx.labels[(q - cx.lo) as usize].iter().cloned().enumerate().map(|(i, l)| (l, i)).collect()
}

fn block_keys(mu: &[Vec<i64>]) -> Vec<FactorKey> {
    mu.iter().map(|m| FactorKey::of(m)).collect()
}

fn to_vec(entries: &[(Label, Scalar)], idx: &HashMap<Label, usize>) -> Option<SparseVec> {
    let mut pairs = Vec::new();
    for (l, v) in entries {
        pairs.push((*idx.get(l)?, v.clone()));
    }
    Some(SparseVec::from_pairs(pairs))
}

fn aux_columns(cx: &Complex, q: i32) -> Vec<usize> {
    if q < cx.lo || q > cx.hi() {
        return Vec::new();
    }
    cx.labels[(q - cx.lo) as usize]
        .iter()
        .enumerate()
        .filter(|(_, l)| l.iter().any(|s| matches!(s, Slot::Aux { .. })))
        .map(|(i, _)| i)
        .collect()
}

fn select_columns(m: &SparseMatrix, cols: &[usize]) -> SparseMatrix {
    SparseMatrix::from_columns(m.nrows(), cols.iter().map(|&j| m.column(j).clone()).collect())
}

/// Whether the class is a cocycle. For tangent sheaves this means the
/// auxiliary part of the Euler cone can be completed to a cocycle.
pub fn is_cocycle(class: &CechClass) -> bool {
    let q = class.degree as i32;
    class.by_block().iter().all(|(mu, entries)| {
        let cx = block_complex(&class.bundle, &block_keys(mu));
        let Some(v) = to_vec(entries, &label_index(&cx, q)) else {
            return false;
        };
        let d = cx.diff(q);
        let dv = d.mul_vec(&v);
        let aux = select_columns(&d, &aux_columns(&cx, q));
        crate::exactalg::ColumnEchelon::of_matrix(&aux, false).contains(&dv)
    })
}

/// Number of classes among `classes` that are independent modulo coboundaries.
pub fn rank_mod_coboundaries(classes: &[CechClass]) -> usize {
    let Some(first) = classes.first() else {
        return 0;
    };
    let q = first.degree as i32;
    let mut blocks: BTreeMap<Vec<Vec<i64>>, Vec<(usize, Vec<(Label, Scalar)>)>> = BTreeMap::new();
    for (c, class) in classes.iter().enumerate() {
        for (mu, entries) in class.by_block() {
            blocks.entry(mu).or_default().push((c, entries));
        }
    }
    // global space: concatenation of the generator-part coordinates of every touched block
    let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); classes.len()];
    let mut bound_cols: Vec<SparseVec> = Vec::new();
    let mut offset = 0;
    for (mu, members) in &blocks {
        let cx = block_complex(&first.bundle, &block_keys(mu));
        let idx = label_index(&cx, q);
        let keep: Vec<usize> = {
            let aux = aux_columns(&cx, q);
            (0..cx.dim(q)).filter(|i| !aux.contains(i)).collect()
        };
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        for (c, entries) in members {
            for (l, v) in entries {
                cols[*c].push((offset + pos[&idx[l]], v.clone()));
            }
        }
        for col in cx.diff(q - 1).columns() {
            bound_cols.push(col.remap(|i| pos.get(&i).map(|p| p + offset)));
        }
        offset += keep.len();
    }
    let b = SparseMatrix::from_columns(offset, bound_cols);
    let v = SparseMatrix::from_columns(offset, cols.into_iter().map(SparseVec::from_pairs).collect());
    rank(&v.hstack(&b)) - rank(&b)
}

/// Explicit representatives of `H^q`, one per dimension, drawn block by block.
pub fn cech_basis(bundle: &BundleSpec, q: usize) -> Result<Vec<CechClass>, CechError> {
    let b = box_bound(bundle);
    check(bundle, b)?;
    let mut out = Vec::new();
    if bundle.summands().is_empty() {
        return Ok(out);
    }
    for (keys, _) in weighted_keys(bundle, b) {
        let cx = block_complex(bundle, &keys);
        if cx.cohomology(q as i32) == 0 {
            continue;
        }
        let reps = cx.representatives(q as i32);
        let labels = &cx.labels[(q as i32 - cx.lo) as usize];
        let per_factor: Vec<Vec<Vec<i64>>> = keys
            .iter()
            .enumerate()
            .map(|(f, &k)| expand_key(bundle, f, k, b))
            .collect();
        for mu in cartesian(&per_factor) {
            for r in &reps {
                let mut class = CechClass::zero(bundle, q);
                for (i, v) in r.entries() {
                    if let Some(k) = CochainKey::from_label(&labels[*i], &mu) {
                        class.insert(k, v.clone());
                    }
                }
                out.push(class);
            }
        }
    }
    Ok(out)
}

fn expand_key(bundle: &BundleSpec, f: usize, k: FactorKey, b: i64) -> Vec<Vec<i64>> {
    let m = bundle.factors[f];
    let d = bundle.twist[f];
    let tangent = bundle.summands().iter().any(|s| s[f].tangent);
    if tangent {
        blocks::blocks_with_key(m, d, b, k)
    } else {
        // line-only factor: the key was merged over `minus_one`
        let mut out = Vec::new();
        let mut sub = k.neg;
        loop {
            let key = FactorKey { neg: k.neg, minus_one: sub };
            out.extend(blocks::blocks_with_key(m, d, b, key));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & k.neg;
        }
        out.sort();
        out
    }
}

fn cartesian(lists: &[Vec<Vec<i64>>]) -> Vec<Vec<Vec<i64>>> {
    let mut out: Vec<Vec<Vec<i64>>> = vec![Vec::new()];
    for l in lists {
        out = out
            .iter()
            .flat_map(|p| {
                l.iter().map(move |x| {
                    let mut p = p.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Multiplication by the homogeneous coordinate `z_index` of `factor`.
pub fn multiply(bundle: &BundleSpec, factor: usize, index: usize, class: &CechClass) -> CechClass {
    let mut target = bundle.clone();
    target.twist[factor] += 1;
    let mut out = CechClass::zero(&target, class.degree);
    for (k, v) in &class.cochain {
        let mut k = k.clone();
        k.monomial[factor][index] += 1;
        out.insert(k, v.clone());
    }
    out
}

/// Signs of the factor hyperplane classes in `F`: `-1` on the first factor
/// and `+1` on the second for products, `+1` on a single factor.
pub fn f_signs(factors: usize) -> Vec<i64> {
    if factors == 1 {
        vec![1]
    } else {
        vec![-1, 1]
    }
}

/// Cup product with the dlog 1-cocycle of `F`, followed by contraction:
/// a tangent class of degree `q` goes to a line class of degree `q+1`.
pub fn contract_with_f(class: &CechClass) -> Result<CechClass, CechError> {
    if class.bundle.structure == Structure::Line {
        return Err(CechError::WrongStructure("a tangent-valued class"));
    }
    let nf = class.bundle.factors.len();
    let signs = f_signs(nf);
    let target = BundleSpec::line(&class.bundle.factors, &class.bundle.twist);
    let mut out = CechClass::zero(&target, class.degree + 1);
    for (k, v) in &class.cochain {
        let (f, gen) = k.generator.expect("tangent cochain without generator");
        let m = class.bundle.factors[f];
        let later: u32 = k.masks[f + 1..].iter().map(|x| x.count_ones() - 1).sum();
        let sign = signs[f] * if later.is_multiple_of(2) { 1 } else { -1 };
        let slot = Slot::Gen { gen: gen as u8, mask: k.masks[f] };
        for (s, c) in blocks::contract_slot(m, &slot) {
            let mut nk = k.clone();
            nk.masks[f] = s.mask();
            nk.monomial[f][gen] -= 1;
            nk.generator = None;
            out.insert(nk, v * &Scalar::from_int(sign * c));
        }
    }
    Ok(out)
}

/// Matrix of the contraction with `F` on one block, degree `q` to `q+1`.
pub fn contraction_matrix(bundle: &BundleSpec, keys: &[FactorKey], q: i32) -> (Complex, Complex, SparseMatrix) {
    let src = block_complex(bundle, keys);
    let line = BundleSpec::line(&bundle.factors, &bundle.twist);
    let tgt = block_complex(&line, keys);
    let signs = f_signs(bundle.factors.len());
    let tidx = label_index(&tgt, q + 1);
    let mut trip = Vec::new();
    if q >= src.lo && q <= src.hi() {
        for (c, l) in src.labels[(q - src.lo) as usize].iter().enumerate() {
            let Some(f) = l.iter().position(|s| matches!(s, Slot::Gen { .. })) else {
                continue;
            };
            let later: i32 = l[f + 1..].iter().map(blocks::slot_degree).sum();
            let sign = signs[f] * if later % 2 == 0 { 1 } else { -1 };
            for (s, v) in blocks::contract_slot(bundle.factors[f], &l[f]) {
                let mut nl = l.clone();
                nl[f] = s;
                let r = *tidx.get(&nl).expect("contraction target outside block");
                trip.push((r, c, Scalar::from_int(sign * v)));
            }
        }
    }
    let m = SparseMatrix::from_triplets(tgt.dim(q + 1), src.dim(q), &trip);
    (src, tgt, m)
}

/// Dimensions and rank for `(.)⌟F : H^q(T) -> H^{q+1}(O)` summed over blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapRank {
    pub source: usize,
    pub target: usize,
    pub rank: usize,
}

pub fn contraction_rank(bundle: &BundleSpec, q: usize) -> Result<MapRank, CechError> {
    if bundle.structure == Structure::Line {
        return Err(CechError::WrongStructure("a tangent bundle"));
    }
    let b = box_bound(bundle);
    check(bundle, b)?;
    let q = q as i32;
    let parts: Vec<(u128, u128, u128)> = weighted_keys(bundle, b)
        .par_iter()
        .map(|(ks, c)| {
            let (src, tgt, m) = contraction_matrix(bundle, ks, q);
            let hs = src.cohomology(q) as u128;
            let ht = tgt.cohomology(q + 1) as u128;
            let r = if hs == 0 || ht == 0 { 0 } else { induced_rank(&src, q, &m, &tgt, q + 1) as u128 };
            (c * hs, c * ht, c * r)
        })
        .collect();
    Ok(MapRank {
        source: parts.iter().map(|p| p.0).sum::<u128>() as usize,
        target: parts.iter().map(|p| p.1).sum::<u128>() as usize,
        rank: parts.iter().map(|p| p.2).sum::<u128>() as usize,
    })
}

/// Rank of `H^q(P^m, O(d)) -> H^q(P^m, O(d+1))^{m+1}`, `s -> (z_i s)_i`.
pub fn euler_rank(m: usize, d: i64, q: usize) -> usize {
    let bundle = BundleSpec::line(&[m], &[d]);
    let b = box_bound(&bundle);
    let q = q as i32;
    key_counts(m, d, b)
        .iter()
        .map(|(key, c)| {
            let src = blocks::line_complex(m, key.neg);
            if src.cohomology(q) == 0 {
                return 0;
            }
            let parts: Vec<Complex> = (0..=m).map(|i| blocks::line_complex(m, key.shifted_neg(i))).collect();
            let tgt = Complex::direct_sum(&parts);
            let mut trip = Vec::new();
            for (i, part) in parts.iter().enumerate() {
                let off = Complex::sum_offset(&parts, i, q);
                let idx = label_index(part, q);
                for (col, l) in src.labels[q as usize].iter().enumerate() {
                    trip.push((off + idx[l], col, Scalar::one()));
                }
            }
            let f = SparseMatrix::from_triplets(tgt.dim(q), src.dim(q), &trip);
            c * induced_rank(&src, q, &f, &tgt, q) as u128
        })
        .sum::<u128>() as usize
}
