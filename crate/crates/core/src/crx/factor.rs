//! Horizontal form spaces on a single projective factor, split by torus weight.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::mono::{self, FMono, MAXC, NOVEC};
use crate::exactalg::{ColumnEchelon, Scalar, SparseMatrix, SparseVec};

/// A projective factor `P^{nc-1}` with twist `O(twist)` at anti-holomorphic level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorCtx {
    pub nc: usize,
    pub twist: i64,
    pub level: i64,
}

/// Form degree and whether the form is vector valued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Kind {
    pub q: usize,
    pub vec: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FOp {
    /// Scalar Dolbeault operator.
    Dbar,
    /// Horizontal Dolbeault operator on vectors.
    DbarH,
    /// Vector of degree q to scalar of degree q+1.
    Flat,
    /// Degree-one scalar to degree-zero vector, `dzbar_i -> d/dz_i` on numerators.
    Sharp0,
}

impl FOp {
    pub fn source(self, q: usize) -> Kind {
        match self {
            FOp::Dbar => Kind { q, vec: false },
            FOp::DbarH | FOp::Flat => Kind { q, vec: true },
            FOp::Sharp0 => Kind { q: 1, vec: false },
        }
    }

    pub fn target(self, q: usize) -> Kind {
        match self {
            FOp::Dbar | FOp::Flat => Kind { q: q + 1, vec: false },
            FOp::DbarH => Kind { q: q + 1, vec: true },
            FOp::Sharp0 => Kind { q: 0, vec: true },
        }
    }

    pub fn apply(self, t: &FMono, ctx: &FactorCtx) -> Vec<(FMono, i64)> {
        match self {
            FOp::Dbar => mono::dbar(t, ctx.nc, ctx.level),
            FOp::DbarH => {
                let mut v = mono::dbar(t, ctx.nc, ctx.level);
                v.extend(mono::h_correction(t, ctx.nc));
                v
            }
            FOp::Flat => mono::flat(t),
            FOp::Sharp0 => {
                let mut v = *t;
                v.vec = t.mask.trailing_zeros() as u8;
                v.mask = 0;
                vec![(v, 1)]
            }
        }
    }
}

/// Horizontal subspace of one torus block. Basis vectors are kernel
/// relations of the horizontality constraints: basis vector `i` has
/// coefficient 1 on monomial `free[i]` and is otherwise supported on
/// non-free monomials, so coordinates are read off the free monomials.
#[derive(Debug)]
pub struct FactorBlock {
    pub monos: Vec<FMono>,
    pub index: HashMap<FMono, usize>,
    pub basis: Vec<SparseVec>,
    pub free: Vec<usize>,
    pub free_pos: HashMap<usize, usize>,
}

impl FactorBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis coordinates of a horizontal combination of monomials.
    pub fn coords<'a>(&self, terms: impl IntoIterator<Item = (&'a FMono, &'a Scalar)>) -> SparseVec {
        let mut pairs = Vec::new();
        for (m, c) in terms {
            if let Some(&i) = self.index.get(m) {
                if let Some(&p) = self.free_pos.get(&i) {
                    pairs.push((p, c.clone()));
                }
            }
        }
        SparseVec::from_pairs(pairs)
    }

    pub fn expand(&self, i: usize) -> impl Iterator<Item = (FMono, &Scalar)> + '_ {
        self.basis[i].entries().iter().map(|(j, c)| (self.monos[*j], c))
    }

    pub fn label(&self, i: usize) -> FMono {
        self.monos[self.free[i]]
    }
}

fn compositions(lb: &[i64], total: i64, out: &mut Vec<Vec<i64>>) {
    fn rec(i: usize, lb: &[i64], left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i + 1 == lb.len() {
            if left >= lb[i] {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let rest: i64 = lb[i + 1..].iter().sum();
        let mut v = lb[i];
        while v + rest <= left {
            cur.push(v);
            rec(i + 1, lb, left - v, cur, out);
            cur.pop();
            v += 1;
        }
    }
    if lb.is_empty() {
        if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(0, lb, total, &mut Vec::new(), out);
}

/// All monomials of the given kind and torus weight `w`.
pub fn enumerate(ctx: &FactorCtx, kind: Kind, w: &[i64]) -> Vec<FMono> {
    let nc = ctx.nc;
    assert!(nc <= MAXC && w.len() == nc);
    let mut out = Vec::new();
    if ctx.level < 0 || kind.q >= nc || (kind.vec && nc < 2) || w.iter().sum::<i64>() != ctx.twist {
        return out;
    }
    let vecs: Vec<u8> = if kind.vec { (0..nc as u8).collect() } else { vec![NOVEC] };
    for mask in 0u8..(1 << nc) {
        if mask.count_ones() as usize != kind.q {
            continue;
        }
        for &v in &vecs {
            let shift: Vec<i64> = (0..nc)
                .map(|c| w[c] + ((mask >> c) & 1) as i64 + (v as usize == c) as i64)
                .collect();
            let lb: Vec<i64> = shift.iter().map(|s| (-s).max(0)).collect();
            let mut bs = Vec::new();
            compositions(&lb, ctx.level, &mut bs);
            for b in bs {
                let mut t = FMono { a: [0; MAXC], b: [0; MAXC], mask, vec: v };
                let mut ok = true;
                for c in 0..nc {
                    let a = shift[c] + b[c];
                    if a > u8::MAX as i64 || b[c] > u8::MAX as i64 {
                        ok = false;
                    }
                    t.a[c] = a as u8;
                    t.b[c] = b[c] as u8;
                }
                if ok {
                    out.push(t);
                }
            }
        }
    }
    out.sort();
    out
}

pub fn build_block(ctx: &FactorCtx, kind: Kind, w: &[i64]) -> FactorBlock {
    let monos = enumerate(ctx, kind, w);
    let index: HashMap<FMono, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut rows: HashMap<(u8, FMono), usize> = HashMap::new();
    let mut trip = Vec::new();
    for (j, t) in monos.iter().enumerate() {
        let mut cons: Vec<(u8, FMono, i64)> =
            mono::iota_euler(t, ctx.nc).into_iter().map(|(m, c)| (0, m, c)).collect();
        if t.has_vec() {
            let (m, c) = mono::zbar_dot(t);
            cons.push((1, m, c));
        }
        for (tag, m, c) in cons {
            let n = rows.len();
            let r = *rows.entry((tag, m)).or_insert(n);
            trip.push((r, j, Scalar::from_int(c)));
        }
    }
    let mat = SparseMatrix::from_triplets(rows.len(), monos.len(), &trip);
    let e = ColumnEchelon::of_matrix(&mat, true);
    let mut basis = Vec::new();
    let mut free = Vec::new();
    for (j, rel) in e.dependent() {
        free.push(*j);
        basis.push(rel.clone());
    }
    let free_pos = free.iter().enumerate().map(|(p, j)| (*j, p)).collect();
    FactorBlock { monos, index, basis, free, free_pos }
}

type BlockKey = (FactorCtx, Kind, Vec<i64>);
type OpKey = (FactorCtx, FOp, usize, Vec<i64>);

/// Thread-safe memo of factor blocks and factor operator matrices.
#[derive(Default)]
pub struct FactorCache {
    blocks: Mutex<HashMap<BlockKey, Arc<FactorBlock>>>,
    ops: Mutex<HashMap<OpKey, Arc<SparseMatrix>>>,
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(&self, ctx: &FactorCtx, kind: Kind, w: &[i64]) -> Arc<FactorBlock> {
        let key = (*ctx, kind, w.to_vec());
        if let Some(b) = self.blocks.lock().unwrap().get(&key) {
            return b.clone();
        }
        let b = Arc::new(build_block(ctx, kind, w));
        self.blocks.lock().unwrap().entry(key).or_insert(b).clone()
    }

    /// Matrix of `op` from the source block to the target block, both at weight `w`.
    pub fn op(&self, ctx: &FactorCtx, op: FOp, q: usize, w: &[i64]) -> Arc<SparseMatrix> {
        let key = (*ctx, op, q, w.to_vec());
        if let Some(m) = self.ops.lock().unwrap().get(&key) {
            return m.clone();
        }
        let src = self.block(ctx, op.source(q), w);
        let tgt = self.block(ctx, op.target(q), w);
        let m = Arc::new(op_matrix(ctx, op, &src, &tgt));
        self.ops.lock().unwrap().entry(key).or_insert(m).clone()
    }
}

pub fn apply_to_basis(ctx: &FactorCtx, op: FOp, src: &FactorBlock, i: usize) -> HashMap<FMono, Scalar> {
    let mut img: HashMap<FMono, Scalar> = HashMap::new();
    for (t, c) in src.expand(i) {
        for (u, k) in op.apply(&t, ctx) {
            *img.entry(u).or_default() += &(c * &Scalar::from_int(k));
        }
    }
    img.retain(|_, v| !v.is_zero());
    img
}

pub fn op_matrix(ctx: &FactorCtx, op: FOp, src: &FactorBlock, tgt: &FactorBlock) -> SparseMatrix {
    let cols = (0..src.dim())
        .map(|i| {
            let img = apply_to_basis(ctx, op, src, i);
            tgt.coords(img.iter())
        })
        .collect();
    SparseMatrix::from_columns(tgt.dim(), cols)
}

/// Number of permutations of `w` (orbit size under coordinate permutations).
pub fn orbit_size(w: &[i64]) -> u128 {
    let mut counts: HashMap<i64, u128> = HashMap::new();
    for x in w {
        *counts.entry(*x).or_default() += 1;
    }
    let fact = |n: u128| (1..=n).product::<u128>();
    counts.values().fold(fact(w.len() as u128), |acc, c| acc / fact(*c))
}

/// Non-increasing integer vectors of length `len` with entries in `[lo, hi]` summing to `sum`.
pub fn sorted_weights(len: usize, lo: i64, hi: i64, sum: i64) -> Vec<Vec<i64>> {
    fn rec(len: usize, lo: i64, hi: i64, sum: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if len == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let l = len as i64;
        for v in (lo..=hi).rev() {
            if v * l < sum {
                break;
            }
            if lo * (l - 1) > sum - v {
                continue;
            }
            cur.push(v);
            rec(len - 1, lo, v, sum - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, lo, hi, sum, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_block(tgt: &FactorBlock, img: &HashMap<FMono, Scalar>) -> bool {
        let coords = tgt.coords(img.iter());
        let mut rebuilt: HashMap<FMono, Scalar> = HashMap::new();
        for (p, c) in coords.entries() {
            for (t, v) in tgt.expand(*p) {
                *rebuilt.entry(t).or_default() += &(c * v);
            }
        }
        rebuilt.retain(|_, v| !v.is_zero());
        rebuilt == *img
    }

    #[test]
    fn horizontal_scalar_functions_are_unconstrained() {
        let ctx = FactorCtx { nc: 2, twist: -3, level: 4 };
        let b = build_block(&ctx, Kind { q: 0, vec: false }, &[-2, -1]);
        assert_eq!(b.dim(), b.monos.len());
        assert!(b.dim() > 0);
    }

    #[test]
    fn horizontal_one_forms_on_p1() {
        // (0,1)-forms p dzbar_i on P^1 with zbar_0 p_0 + zbar_1 p_1 = 0
        let ctx = FactorCtx { nc: 2, twist: -3, level: 2 };
        let kind = Kind { q: 1, vec: false };
        let mut total = 0;
        for w in [[-1i64, -2], [-2, -1], [0, -3], [-3, 0], [1, -4], [-4, 1], [-5, 2], [2, -5]] {
            let b = build_block(&ctx, kind, &w);
            for i in 0..b.dim() {
                let img: HashMap<FMono, Scalar> = b.expand(i).map(|(t, c)| (t, c.clone())).collect();
                assert!(in_block(&b, &img));
                let mut con: HashMap<FMono, Scalar> = HashMap::new();
                for (t, c) in &img {
                    for (u, k) in mono::iota_euler(t, 2) {
                        *con.entry(u).or_default() += &(c * &Scalar::from_int(k));
                    }
                }
                assert!(con.values().all(|v| v.is_zero()));
            }
            total += b.dim();
        }
        assert!(total > 0);
    }

    #[test]
    fn weights_enumeration() {
        let ws = sorted_weights(3, -2, 3, 1);
        assert!(ws.contains(&vec![3, 0, -2]));
        assert!(ws.contains(&vec![1, 0, 0]));
        assert!(ws.iter().all(|w| w.windows(2).all(|p| p[0] >= p[1]) && w.iter().sum::<i64>() == 1));
        assert_eq!(orbit_size(&[1, 0, 0]), 3);
        assert_eq!(orbit_size(&[2, 1, 0]), 6);
    }
}
