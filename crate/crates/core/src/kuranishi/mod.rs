//! Formal Kuranishi chart: the order-by-order solution
//! `phi_i = -P (1/2) sum_{j<i} [phi_j, phi_{i-j}]` of
//! `dbar_H phi + (1/2)[phi, phi] = 0`, `flat phi = 0`, its inverse, and
//! residual checks.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crx::{
    all_blocks, block_matrices, CrxError, DeformationTensor, FactorCache, Form, Geometry, Levels, Preimage, SpaceKind,
    TensorEntry, SCHEMA_VERSION,
};
use crate::exactalg::{kernel, Scalar};


#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum KuranishiError {
    #[error(transparent)]
    Crx(#[from] CrxError),
    #[error("seed is not closed at weight {0}: dbar_H seed or flat seed is nonzero")]
    NotClosed(i64),
    #[error("weight {k} needed at order {order} lies outside the built range [{kmin}, {kmax}]; widen the range")]
    OutOfRange { k: i64, order: usize, kmin: i64, kmax: i64 },
    #[error("no solution of dbar_H x = b at weight {k} (order {order}): the class of b in H^2 is nonzero")]
    Obstructed { k: i64, order: usize, class: String },
    #[error("truncation order must be at least 1")]
    BadOrder,
}

/// Options for [`chart_phi`].
#[derive(Clone, Copy, Debug)]
pub struct ChartOptions {
    pub kmin: i64,
    pub kmax: i64,
    /// Extra level raises tried before a solve is declared obstructed.
    pub max_raise: i64,
    /// Replace the nonnegative-weight part of the seed by zero after checking
    /// it is `dbar_H`-exact (the negative-representative route in dimension 7).
    pub negative_representative: bool,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions { kmin: -12, kmax: 12, max_raise: 1, negative_representative: false }
    }
}

/// The right inverse `P` of `dbar_H` on `C^1 -> C^2`, block by block.
pub struct RightInverse {
    pre: Preimage,
    max_raise: i64,
}

impl RightInverse {
    pub fn new(cache: Arc<FactorCache>, max_raise: i64) -> Self {
        RightInverse { pre: Preimage::new(cache), max_raise }
    }

    pub fn cache(&self) -> &Arc<FactorCache> {
        self.pre.cache()
    }

    /// `P b` for a weight-homogeneous two-form `b`; `None` if `b` is not
    /// exact even after raising the levels.
    pub fn apply_form(&self, b: &Form) -> Result<Option<Form>, CrxError> {
        for r in 0..=self.max_raise {
            let br = if r == 0 { b.clone() } else { b.raise_to(b.levels.raised(r)) };
            let (x, rest) = self.pre.split_at(&br)?;
            if rest.is_zero() {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    /// `P b` extended linearly to all of `ker flat`: the non-exact part of
    /// `b` (along a fixed complement of the image) is dropped.
    pub fn apply_total(&self, b: &DeformationTensor) -> Result<DeformationTensor, KuranishiError> {
        let mut out = DeformationTensor::zero(b.n);
        for f in b.coeffs.values() {
            out.insert(self.pre.split_at(f)?.0)?;
        }
        Ok(out)
    }

    pub fn apply(&self, b: &DeformationTensor, order: usize) -> Result<DeformationTensor, KuranishiError> {
        let mut out = DeformationTensor::zero(b.n);
        for (k, f) in &b.coeffs {
            let x = self.apply_form(f)?.ok_or_else(|| KuranishiError::Obstructed {
                k: *k,
                order,
                class: DeformationTensor::from_form(f.clone()).to_json(),
            })?;
            out.insert(x)?;
        }
        Ok(out)
    }

    /// A `dbar_H`-preimage of a vector one-form in degree zero, if any.
    pub fn potential(&self, f: &Form) -> Result<Option<Form>, CrxError> {
        Ok(self.pre.solve(f, 0, false, self.max_raise)?.map(|(x, _)| x))
    }
}

/// `Phi(seed) = phi_1 + phi_2 + ...` truncated at `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    pub n: usize,
    /// `terms[i - 1]` is the order-`i` term.
    pub terms: Vec<DeformationTensor>,
    /// Gauge term removed from the seed by the negative-representative route.
    pub correction: Option<DeformationTensor>,
}

impl FormalSeries {
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, i: usize) -> &DeformationTensor {
        &self.terms[i - 1]
    }

    pub fn sum(&self) -> DeformationTensor {
        self.partial_sum(self.order())
    }

    /// `phi_1 + ... + phi_upto`.
    pub fn partial_sum(&self, upto: usize) -> DeformationTensor {
        let mut out = DeformationTensor::zero(self.n);
        for t in self.terms.iter().take(upto) {
            out = out.add(t).expect("same n");
        }
        out
    }

    pub fn weights(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.terms.iter().flat_map(|t| t.weights()).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn to_file(&self) -> SeriesFile {
        let mut entries = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            for e in t.to_file().entries {
                entries.push(SeriesEntry { order: i + 1, entry: e });
            }
        }
        SeriesFile { schema_version: SCHEMA_VERSION, n: self.n, order: self.order(), entries }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub order: usize,
    #[serde(flatten)]
    pub entry: TensorEntry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub schema_version: u32,
    pub n: usize,
    pub order: usize,
    pub entries: Vec<SeriesEntry>,
}

fn half_bracket_sum(terms: &[DeformationTensor], i: usize) -> Result<DeformationTensor, KuranishiError> {
    let n = terms[0].n;
    let mut s = DeformationTensor::zero(n);
    for j in 1..i {
        if j > terms.len() || i - j > terms.len() {
            continue;
        }
        s = s.add(&terms[j - 1].bracket(&terms[i - j - 1])?)?;
    }
    Ok(s.scale(&Scalar::new(1, 2)))
}

fn check_range(t: &DeformationTensor, order: usize, opts: &ChartOptions) -> Result<(), KuranishiError> {
    for k in t.weights() {
        if k < opts.kmin || k > opts.kmax {
            return Err(KuranishiError::OutOfRange { k, order, kmin: opts.kmin, kmax: opts.kmax });
        }
    }
    Ok(())
}

fn check_closed(t: &DeformationTensor) -> Result<(), KuranishiError> {
    for (k, f) in &t.coeffs {
        if !f.dbar_h().is_zero() || !f.flat().is_zero() {
            return Err(KuranishiError::NotClosed(*k));
        }
    }
    Ok(())
}

/// Runs the recursion from a closed seed up to `order`.
pub fn chart_phi(
    p: &RightInverse,
    seed: &DeformationTensor,
    order: usize,
    opts: &ChartOptions,
) -> Result<FormalSeries, KuranishiError> {
    if order == 0 {
        return Err(KuranishiError::BadOrder);
    }
    check_closed(seed)?;
    check_range(seed, 1, opts)?;
    let mut first = seed.clone();
    let mut correction = None;
    if opts.negative_representative {
        let mut corr = DeformationTensor::zero(seed.n);
        for (k, f) in &seed.coeffs {
            if *k < 0 {
                continue;
            }
            let v = p.potential(f)?.ok_or_else(|| KuranishiError::Obstructed {
                k: *k,
                order: 1,
                class: DeformationTensor::from_form(f.clone()).to_json(),
            })?;
            corr.insert(v)?;
        }
        first = seed.restrict(|k| k < 0);
        correction = Some(corr);
    }
    let mut terms = vec![first];
    for i in 2..=order {
        let s = half_bracket_sum(&terms, i)?;
        check_range(&s, i, opts)?;
        let phi = p.apply(&s, i)?.scale(&Scalar::from_int(-1));
        terms.push(phi);
    }
    Ok(FormalSeries { n: seed.n, terms, correction })
}

/// Order-`i` components of `dbar_H Phi + (1/2)[Phi, Phi]` and of `flat Phi`, for `i = 1..=order`.
pub fn integrability_residual(
    series: &FormalSeries,
    order: usize,
) -> Result<Vec<(DeformationTensor, DeformationTensor)>, KuranishiError> {
    let mut out = Vec::new();
    for i in 1..=order.min(series.order()) {
        let lin = series.term(i).dbar_h();
        let quad = half_bracket_sum(&series.terms, i)?;
        out.push((lin.add(&quad)?, series.term(i).flat()));
    }
    Ok(out)
}

/// Whether every residual through `order` vanishes.
pub fn is_integrable_to(series: &FormalSeries, order: usize) -> Result<bool, KuranishiError> {
    Ok(integrability_residual(series, order)?.iter().all(|(a, b)| a.is_zero() && b.is_zero()))
}

/// `phi + P (1/2)[phi, phi]` for a single tensor, with the total `P`.
pub fn inverse_chart(p: &RightInverse, phi: &DeformationTensor) -> Result<DeformationTensor, KuranishiError> {
    let s = phi.bracket(phi)?.scale(&Scalar::new(1, 2));
    Ok(phi.add(&p.apply_total(&s)?)?)
}

/// The inverse chart on a graded series, through its order `m`: order `i`
/// of the output is `phi_i + P (1/2) sum_{j+l=i} [phi_j, phi_l]`.
pub fn inverse_chart_series(p: &RightInverse, series: &FormalSeries) -> Result<FormalSeries, KuranishiError> {
    let mut terms = Vec::new();
    for i in 1..=series.order() {
        let s = if i >= 2 { half_bracket_sum(&series.terms, i)? } else { DeformationTensor::zero(series.n) };
        terms.push(series.term(i).add(&p.apply_total(&s)?)?);
    }
    Ok(FormalSeries { n: series.n, terms, correction: None })
}

/// A sparse closed tensor: at each requested weight, `per_weight` random
/// basis vectors of `ker flat ∩ ker dbar_H` from random blocks, with small
/// integer coefficients.
pub fn sample_seed<R: Rng>(
    rng: &mut R,
    cache: &FactorCache,
    n: usize,
    weights: &[i64],
    per_weight: usize,
) -> Result<DeformationTensor, CrxError> {
    crate::crx::check_n(n)?;
    let mut out = DeformationTensor::zero(n);
    for &k in weights {
        let g = Geometry { n, k, levels: Levels::for_weight(n - 2, k, 0) };
        let blocks = all_blocks(cache, &g);
        let mut found = 0;
        for _ in 0..64 {
            if found == per_weight || blocks.is_empty() {
                break;
            }
            let w = &blocks[rng.gen_range(0..blocks.len())];
            let (flat, dh) = block_matrices(cache, &g, w, 1);
            let z = kernel(&flat.vstack(&dh));
            if z.dim() == 0 {
                continue;
            }
            let v = &z.basis()[rng.gen_range(0..z.dim())];
            let c = loop {
                let c = rng.gen_range(-3i64..=3);
                if c != 0 {
                    break c;
                }
            };
            let f = Form::from_coords(cache, &g, w, SpaceKind::Vector(1), &v.scale(&Scalar::from_int(c)));
            out.insert(f)?;
            found += 1;
        }
    }
    Ok(out)
}
