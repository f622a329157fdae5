//! Explicit forms on the cone: sums of product monomials at fixed levels.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use super::block::{self, contributions, BlockWeight, Geometry, Levels, POp, Part, Sector, Side, SpaceKind};
use super::complex::CrxError;
use super::factor::FactorCache;
use super::mono::{self, FMono, NOVEC};
use crate::exactalg::{Scalar, SparseVec};

static BRACKET_FAULT: AtomicBool = AtomicBool::new(false);

/// Test hook: drops the graded sign `(-1)^{pq}` from the bracket, which
/// breaks its symmetry on one-forms and the Leibniz rule. Process-wide.
pub fn set_bracket_fault(on: bool) {
    BRACKET_FAULT.store(on, Ordering::Relaxed);
}

/// An x-part and a y-part; at most one carries a vector index.
pub type PTerm = (FMono, FMono);

/// A weight-`k` form (scalar or vector valued) at the given levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub n: usize,
    pub k: i64,
    pub levels: Levels,
    pub terms: BTreeMap<PTerm, Scalar>,
}

fn sign(p: usize) -> i64 {
    if p.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn sector_of(t: &PTerm) -> Sector {
    let part = if t.0.has_vec() {
        Part::VecX
    } else if t.1.has_vec() {
        Part::VecY
    } else {
        Part::Scalar
    };
    Sector { qx: t.0.degree(), qy: t.1.degree(), part }
}

fn pmul(a: &PTerm, b: &PTerm) -> Option<(PTerm, i64)> {
    let (x, sx) = mono::mul(&a.0, &b.0)?;
    let (y, sy) = mono::mul(&a.1, &b.1)?;
    Some(((x, y), sx * sy * sign(a.1.degree() * b.0.degree())))
}

fn strip_vec(t: &PTerm) -> (PTerm, Option<(Side, usize)>) {
    let mut s = *t;
    let v = if t.0.has_vec() {
        s.0.vec = NOVEC;
        Some((Side::X, t.0.vec as usize))
    } else if t.1.has_vec() {
        s.1.vec = NOVEC;
        Some((Side::Y, t.1.vec as usize))
    } else {
        None
    };
    (s, v)
}

fn deriv_term(t: &PTerm, side: &Side, i: usize) -> Option<(PTerm, i64)> {
    match side {
        Side::X => mono::deriv(&t.0, i).map(|(x, c)| ((x, t.1), c)),
        Side::Y => mono::deriv(&t.1, i).map(|(y, c)| ((t.0, y), c)),
    }
}

impl Form {
    pub fn zero(n: usize, k: i64, levels: Levels) -> Form {
        Form { n, k, levels, terms: BTreeMap::new() }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry { n: self.n, k: self.k, levels: self.levels }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, t: PTerm, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(t).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&t);
        }
    }

    /// Form degree, if all terms share it.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|t| t.0.degree() + t.1.degree());
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn scale(&self, c: &Scalar) -> Form {
        let mut out = Form::zero(self.n, self.k, self.levels);
        for (t, v) in &self.terms {
            out.add_term(*t, &(v * c));
        }
        out
    }

    /// Multiplies by `r_x^a r_y^b` so that the levels become `levels`.
    pub fn raise_to(&self, levels: Levels) -> Form {
        assert!(levels.x >= self.levels.x && levels.y >= self.levels.y, "levels can only be raised");
        let mut cur: BTreeMap<PTerm, Scalar> = self.terms.clone();
        for _ in self.levels.x..levels.x {
            let mut next = BTreeMap::new();
            for (t, c) in &cur {
                for (u, e) in mono::times_r(&t.0, 2) {
                    *next.entry((u, t.1)).or_insert_with(Scalar::zero) += &(c * &Scalar::from_int(e));
                }
            }
            cur = next;
        }
        for _ in self.levels.y..levels.y {
            let mut next = BTreeMap::new();
            for (t, c) in &cur {
                for (u, e) in mono::times_r(&t.1, self.n - 1) {
                    *next.entry((t.0, u)).or_insert_with(Scalar::zero) += &(c * &Scalar::from_int(e));
                }
            }
            cur = next;
        }
        cur.retain(|_, v| !v.is_zero());
        Form { n: self.n, k: self.k, levels, terms: cur }
    }

    /// `self + c * other`, raising both to the larger levels.
    pub fn add_scaled(&self, other: &Form, c: &Scalar) -> Result<Form, CrxError> {
        if self.n != other.n || (self.k != other.k && !self.is_zero() && !other.is_zero()) {
            return Err(CrxError::Mismatch(format!(
                "cannot add weight {} (n={}) to weight {} (n={})",
                other.k, other.n, self.k, self.n
            )));
        }
        let k = if self.is_zero() { other.k } else { self.k };
        let levels = self.levels.max(other.levels);
        let mut out = self.raise_to(levels);
        out.k = k;
        for (t, v) in other.raise_to(levels).terms {
            out.add_term(t, &(&v * c));
        }
        Ok(out)
    }

    pub fn add(&self, other: &Form) -> Result<Form, CrxError> {
        self.add_scaled(other, &Scalar::one())
    }

    pub fn sub(&self, other: &Form) -> Result<Form, CrxError> {
        self.add_scaled(other, &Scalar::from_int(-1))
    }

    /// Applies a linear operator term by term.
    pub fn apply(&self, op: POp) -> Form {
        let g = self.geometry();
        let (cx, cy) = (g.ctx_x(), g.ctx_y());
        let mut out = Form::zero(self.n, self.k, self.levels);
        for (t, c) in &self.terms {
            for (_, side, fop, _, sg) in contributions(op, sector_of(t)) {
                match side {
                    Side::X => {
                        for (u, e) in fop.apply(&t.0, &cx) {
                            out.add_term((u, t.1), &(c * &Scalar::from_int(e * sg)));
                        }
                    }
                    Side::Y => {
                        for (u, e) in fop.apply(&t.1, &cy) {
                            out.add_term((t.0, u), &(c * &Scalar::from_int(e * sg)));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn dbar_h(&self) -> Form {
        let q = self.degree().unwrap_or(0);
        self.apply(POp::DbarH(q))
    }

    pub fn dbar(&self) -> Form {
        let q = self.degree().unwrap_or(0);
        self.apply(POp::Dbar(q))
    }

    pub fn flat(&self) -> Form {
        let q = self.degree().unwrap_or(0);
        self.apply(POp::Flat(q))
    }

    /// Right inverse of `flat` on horizontal scalar forms of positive degree:
    /// terms with x-degree use the `P^1` directions, the others the `P^m` ones.
    pub fn sharp(&self) -> Form {
        let mut out = Form::zero(self.n, self.k, self.levels);
        for (t, c) in &self.terms {
            let (qx, qy) = (t.0.degree(), t.1.degree());
            if qx >= 1 {
                let f = Scalar::new(-sign(qx + qy - 1), qx as i64);
                for i in 0..2 {
                    if let Some((mut u, e)) = mono::iota(&t.0, i) {
                        u.vec = i as u8;
                        out.add_term((u, t.1), &(&(c * &f) * &Scalar::from_int(e)));
                    }
                }
            } else if qy >= 1 {
                let f = Scalar::new(sign(qy - 1), qy as i64);
                for j in 0..self.n - 1 {
                    if let Some((mut u, e)) = mono::iota(&t.1, j) {
                        u.vec = j as u8;
                        out.add_term((t.0, u), &(&(c * &f) * &Scalar::from_int(e)));
                    }
                }
            }
        }
        out
    }

    /// The bracket of vector-valued forms,
    /// `[a, b]^j = a^i d_i b^j - (-1)^{pq} b^i d_i a^j`, at the summed levels.
    pub fn bracket(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.n, self.k + other.k, self.levels.add(other.levels));
        let fault = BRACKET_FAULT.load(Ordering::Relaxed);
        let half = |a: &Form, b: &Form, out: &mut Form, outer: i64| {
            for (ta, ca) in &a.terms {
                let (sa, v) = strip_vec(ta);
                let Some((side, i)) = v else {
                    continue;
                };
                for (tb, cb) in &b.terms {
                    let Some((db, e1)) = deriv_term(tb, &side, i) else {
                        continue;
                    };
                    let Some((t, e2)) = pmul(&sa, &db) else {
                        continue;
                    };
                    let pq = (ta.0.degree() + ta.1.degree()) * (tb.0.degree() + tb.1.degree());
                    let graded = if fault { 1 } else { sign(pq) };
                    let s = if outer < 0 { -graded } else { 1 };
                    out.add_term(t, &(&(ca * cb) * &Scalar::from_int(e1 * e2 * s)));
                }
            }
        };
        half(self, other, &mut out, 1);
        half(other, self, &mut out, -1);
        out
    }

    /// The bracket, refusing inputs outside `ker flat`.
    pub fn try_bracket(&self, other: &Form) -> Result<Form, CrxError> {
        if !self.flat().is_zero() || !other.flat().is_zero() {
            return Err(CrxError::NotInModel("bracket arguments must lie in ker flat".into()));
        }
        Ok(self.bracket(other))
    }

    pub fn block_of(&self, t: &PTerm) -> BlockWeight {
        BlockWeight { x: t.0.weights(2), y: t.1.weights(self.n - 1) }
    }

    pub fn split_blocks(&self) -> BTreeMap<BlockWeight, Form> {
        let mut out: BTreeMap<BlockWeight, Form> = BTreeMap::new();
        for (t, c) in &self.terms {
            out.entry(self.block_of(t))
                .or_insert_with(|| Form::zero(self.n, self.k, self.levels))
                .add_term(*t, c);
        }
        out
    }

    /// Expands block coordinates into a form.
    pub fn from_coords(cache: &FactorCache, g: &Geometry, w: &BlockWeight, kind: SpaceKind, v: &SparseVec) -> Form {
        let sp = block::space(cache, g, w, kind);
        let mut out = Form::zero(g.n, g.k, g.levels);
        for (idx, c) in v.entries() {
            let ss = sp
                .sectors
                .iter()
                .find(|s| s.offset <= *idx && *idx < s.offset + s.dim())
                .expect("coordinate out of range");
            let ny = ss.yb.dim();
            let (i, j) = ((idx - ss.offset) / ny, (idx - ss.offset) % ny);
            for (tx, cx) in ss.xb.expand(i) {
                let cxc = c * cx;
                for (ty, cy) in ss.yb.expand(j) {
                    out.add_term((tx, ty), &(&cxc * cy));
                }
            }
        }
        out
    }

    /// Block coordinates of a form supported on block `w` of the given
    /// space; fails if the form is not in the span of the block basis.
    pub fn coords(&self, cache: &FactorCache, w: &BlockWeight, kind: SpaceKind) -> Result<SparseVec, CrxError> {
        let g = self.geometry();
        let sp = block::space(cache, &g, w, kind);
        let mut pairs = Vec::new();
        for (t, c) in &self.terms {
            let s = sector_of(t);
            let ss = sp.find(&s).ok_or_else(|| CrxError::NotInModel(format!("term outside {kind:?}")))?;
            let (Some(ix), Some(iy)) = (ss.xb.index.get(&t.0), ss.yb.index.get(&t.1)) else {
                return Err(CrxError::NotInModel(format!("term outside block {w:?}")));
            };
            if let (Some(px), Some(py)) = (ss.xb.free_pos.get(ix), ss.yb.free_pos.get(iy)) {
                pairs.push((ss.offset + px * ss.yb.dim() + py, c.clone()));
            }
        }
        let v = SparseVec::from_pairs(pairs);
        if Form::from_coords(cache, &g, w, kind, &v) != *self {
            return Err(CrxError::NotInModel("form is not horizontal".into()));
        }
        Ok(v)
    }

    /// Whether every block of the form lies in the model space of the given kind.
    pub fn in_model(&self, cache: &FactorCache, kind: SpaceKind) -> bool {
        self.split_blocks().iter().all(|(w, f)| f.coords(cache, w, kind).is_ok())
    }

    /// `dbar_H sharp dbar f` for a degree-zero scalar form `f`.
    pub fn contact_action(&self) -> Form {
        self.apply(POp::Dbar(0)).apply(POp::Sharp0).apply(POp::DbarH(0))
    }

    /// The same map on complex parameters; kept separate so callers can say which action they mean.
    pub fn embedding_action(&self) -> Form {
        self.contact_action()
    }

    /// Complex conjugate of a degree-zero scalar form: weight `k` goes to
    /// weight `-k`, the x-level rises by `k` and the y-level drops by `k`.
    pub fn conjugate_function(&self) -> Option<Form> {
        let levels = Levels { x: self.levels.x + self.k, y: self.levels.y - self.k };
        if levels.x < 0 || levels.y < 0 {
            return None;
        }
        let mut out = Form::zero(self.n, -self.k, levels);
        for (t, c) in &self.terms {
            if t.0.mask != 0 || t.1.mask != 0 || t.0.has_vec() || t.1.has_vec() {
                return None;
            }
            let (mut x, mut y) = *t;
            std::mem::swap(&mut x.a, &mut x.b);
            std::mem::swap(&mut y.a, &mut y.b);
            out.add_term((x, y), c);
        }
        Some(out)
    }
}
