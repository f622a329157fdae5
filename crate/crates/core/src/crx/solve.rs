//! Per-block preimages under `dbar_H`, optionally inside `ker flat`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::block::{self, BlockWeight, Geometry, Levels, POp, SpaceKind};
use super::complex::CrxError;
use super::factor::FactorCache;
use super::form::Form;
use crate::exactalg::{complement, kernel, AlgError, Solver, SparseMatrix, SparseVec, Subspace};

type Key = (usize, i64, Levels, BlockWeight, usize, bool);
type PKey = (usize, i64, Levels, BlockWeight);

/// `[dbar_H on C^1 | complement of its image in C^2]` on one block.
struct Projected {
    solver: Solver,
    c1: Vec<SparseVec>,
    c2: Subspace,
    complement: Vec<SparseVec>,
}

struct Stacked {
    solver: Solver,
    /// Rows taken by the `flat` part, placed above the `dbar_H` rows.
    offset: usize,
}

/// Solves `dbar_H x = b` block by block with a fixed, deterministic and
/// linear choice of `x` (lowest-index pivots), caching the factored systems.
pub struct Preimage {
    cache: Arc<FactorCache>,
    solvers: Mutex<HashMap<Key, Arc<Stacked>>>,
    projected: Mutex<HashMap<PKey, Arc<Projected>>>,
}

impl Preimage {
    pub fn new(cache: Arc<FactorCache>) -> Self {
        Preimage { cache, solvers: Mutex::new(HashMap::new()), projected: Mutex::new(HashMap::new()) }
    }

    pub fn cache(&self) -> &Arc<FactorCache> {
        &self.cache
    }

    fn stacked(&self, g: &Geometry, w: &BlockWeight, q: usize, with_flat: bool) -> Arc<Stacked> {
        let key = (g.n, g.k, g.levels, w.clone(), q, with_flat);
        if let Some(s) = self.solvers.lock().unwrap().get(&key) {
            return s.clone();
        }
        let c = &*self.cache;
        let src = block::space(c, g, w, SpaceKind::Vector(q));
        let tgt = block::space(c, g, w, SpaceKind::Vector(q + 1));
        let dh = block::matrix(c, g, w, POp::DbarH(q), &src, &tgt);
        let (m, offset) = if with_flat {
            let o = block::space(c, g, w, SpaceKind::Scalar(q + 1));
            let fl = block::matrix(c, g, w, POp::Flat(q), &src, &o);
            (fl.vstack(&dh), o.dim)
        } else {
            (dh, 0)
        };
        let s = Arc::new(Stacked { solver: Solver::new(&m), offset });
        self.solvers.lock().unwrap().entry(key).or_insert(s).clone()
    }

    fn projected(&self, g: &Geometry, w: &BlockWeight) -> Arc<Projected> {
        let key = (g.n, g.k, g.levels, w.clone());
        if let Some(s) = self.projected.lock().unwrap().get(&key) {
            return s.clone();
        }
        let c = &*self.cache;
        let t1 = block::space(c, g, w, SpaceKind::Vector(1));
        let t2 = block::space(c, g, w, SpaceKind::Vector(2));
        let o2 = block::space(c, g, w, SpaceKind::Scalar(2));
        let o3 = block::space(c, g, w, SpaceKind::Scalar(3));
        let c1 = kernel(&block::matrix(c, g, w, POp::Flat(1), &t1, &o2)).basis().to_vec();
        let c2 = kernel(&block::matrix(c, g, w, POp::Flat(2), &t2, &o3));
        let dh = block::matrix(c, g, w, POp::DbarH(1), &t1, &t2);
        let image: Vec<SparseVec> = c1.iter().map(|v| dh.mul_vec(v)).collect();
        let comp = complement(&Subspace::span(t2.dim, &image), &c2).expect("image of C^1 lies in C^2");
        let cols: Vec<SparseVec> = image.into_iter().chain(comp.basis().iter().cloned()).collect();
        let solver = Solver::new(&SparseMatrix::from_columns(t2.dim, cols));
        let p = Arc::new(Projected { solver, c1, c2, complement: comp.basis().to_vec() });
        self.projected.lock().unwrap().entry(key).or_insert(p).clone()
    }

    /// Splits a two-form `b` in `ker flat` as `dbar_H x + c`, with `x` in
    /// `ker flat` and `c` in a fixed complement of the image; returns `(x, c)`.
    /// The choice is linear and deterministic, and `c = 0` exactly when `b`
    /// is exact at these levels.
    pub fn split_at(&self, b: &Form) -> Result<(Form, Form), CrxError> {
        let g = b.geometry();
        let mut x = Form::zero(b.n, b.k, b.levels);
        let mut rest = Form::zero(b.n, b.k, b.levels);
        for (w, part) in b.split_blocks() {
            let coords = part.coords(&self.cache, &w, SpaceKind::Vector(2))?;
            let p = self.projected(&g, &w);
            if !p.c2.contains(&coords) {
                return Err(CrxError::NotInModel("two-form outside ker flat".into()));
            }
            let y = p.solver.solve(&coords).map_err(|e| CrxError::Mismatch(e.to_string()))?;
            let (mut xv, mut cv) = (SparseVec::new(), SparseVec::new());
            for (i, c) in y.entries() {
                if *i < p.c1.len() {
                    xv = xv.add_scaled(&p.c1[*i], c);
                } else {
                    cv = cv.add_scaled(&p.complement[i - p.c1.len()], c);
                }
            }
            for (t, c) in Form::from_coords(&self.cache, &g, &w, SpaceKind::Vector(1), &xv).terms {
                x.add_term(t, &c);
            }
            for (t, c) in Form::from_coords(&self.cache, &g, &w, SpaceKind::Vector(2), &cv).terms {
                rest.add_term(t, &c);
            }
        }
        Ok((x, rest))
    }

    /// A preimage of the degree-`q+1` vector form `b` at its own levels, or
    /// `None` if some block of `b` is not exact there.
    pub fn solve_at(&self, b: &Form, q: usize, with_flat: bool) -> Result<Option<Form>, CrxError> {
        let g = b.geometry();
        let mut out = Form::zero(b.n, b.k, b.levels);
        for (w, part) in b.split_blocks() {
            let coords = part.coords(&self.cache, &w, SpaceKind::Vector(q + 1))?;
            let st = self.stacked(&g, &w, q, with_flat);
            let rhs = SparseVec::from_pairs(coords.entries().iter().map(|(i, c)| (i + st.offset, c.clone())).collect());
            match st.solver.solve(&rhs) {
                Ok(x) => {
                    let f = Form::from_coords(&self.cache, &g, &w, SpaceKind::Vector(q), &x);
                    for (t, c) in f.terms {
                        out.add_term(t, &c);
                    }
                }
                Err(AlgError::NoSolution) => return Ok(None),
                Err(e) => return Err(CrxError::Mismatch(e.to_string())),
            }
        }
        Ok(Some(out))
    }

    /// As [`Preimage::solve_at`], raising the levels up to `max_raise` times
    /// before giving up. Returns the preimage and the number of raises used.
    pub fn solve(&self, b: &Form, q: usize, with_flat: bool, max_raise: i64) -> Result<Option<(Form, i64)>, CrxError> {
        for r in 0..=max_raise {
            let br = if r == 0 { b.clone() } else { b.raise_to(b.levels.raised(r)) };
            if let Some(x) = self.solve_at(&br, q, with_flat)? {
                return Ok(Some((x, r)));
            }
        }
        Ok(None)
    }
}
