//! Deformation tensors: finitely many weight components, each an explicit
//! vector-valued `(0,1)`-form, with a JSON form keyed by monomial labels.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::block::Levels;
use super::complex::{check_n, CrxError};
use super::form::{Form, PTerm};
use super::mono::FMono;
use crate::exactalg::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// A tensor `phi = sum_k phi_k` with `phi_k` of weight `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationTensor {
    pub n: usize,
    pub coeffs: BTreeMap<i64, Form>,
}

/// A big integer written as a JSON number when it fits in `i64`, as a string otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigNum {
    Small(i64),
    Big(String),
}

impl BigNum {
    fn of(x: &BigInt) -> BigNum {
        i64::try_from(x).map(BigNum::Small).unwrap_or_else(|_| BigNum::Big(x.to_string()))
    }

    fn value(&self) -> Option<BigInt> {
        match self {
            BigNum::Small(x) => Some(BigInt::from(*x)),
            BigNum::Big(s) => s.trim().parse().ok(),
        }
    }
}

impl std::fmt::Display for BigNum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BigNum::Small(x) => write!(f, "{x}"),
            BigNum::Big(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub weight: i64,
    /// `"<x monomial> ; <y monomial>"`, e.g. `"x0^2 xb1 dxb0 d/dx1 ; y2 yb0"`.
    pub basis: String,
    pub num: BigNum,
    pub den: BigNum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorFile {
    pub schema_version: u32,
    pub n: usize,
    pub entries: Vec<TensorEntry>,
}

pub fn term_label(t: &PTerm, n: usize) -> String {
    format!("{} ; {}", t.0.label('x', 2), t.1.label('y', n - 1))
}

/// Parses a product label and infers the levels from the conjugate degrees.
pub fn parse_term(s: &str, n: usize, k: i64) -> Result<(PTerm, Levels), String> {
    let (xs, ys) = s.split_once(';').ok_or("basis label needs an x part and a y part separated by ';'")?;
    let x = FMono::parse(xs.trim(), 'x').ok_or_else(|| format!("bad x monomial {:?}", xs.trim()))?;
    let y = FMono::parse(ys.trim(), 'y').ok_or_else(|| format!("bad y monomial {:?}", ys.trim()))?;
    let check = |m: &FMono, nc: usize, twist: i64, name: char| -> Result<i64, String> {
        let used = (0..super::mono::MAXC).any(|c| c >= nc && (m.a[c] > 0 || m.b[c] > 0 || m.mask & (1 << c) != 0))
            || (m.has_vec() && m.vec as usize >= nc);
        if used {
            return Err(format!("{name} coordinate index out of range (n = {n})"));
        }
        let hol: i64 = m.a.iter().map(|&e| e as i64).sum();
        let conj: i64 = m.b.iter().map(|&e| e as i64).sum();
        let want = twist + conj + m.degree() as i64 + i64::from(m.has_vec());
        if hol != want {
            return Err(format!("{name} monomial has holomorphic degree {hol}, expected {want} at weight {k}"));
        }
        Ok(conj)
    };
    let lx = check(&x, 2, k, 'x')?;
    let ly = check(&y, n - 1, -k, 'y')?;
    if x.has_vec() && y.has_vec() {
        return Err("at most one vector index per term".into());
    }
    Ok(((x, y), Levels { x: lx, y: ly }))
}

impl DeformationTensor {
    pub fn zero(n: usize) -> Self {
        DeformationTensor { n, coeffs: BTreeMap::new() }
    }

    pub fn from_form(f: Form) -> Self {
        let mut t = DeformationTensor::zero(f.n);
        t.insert(f).expect("same n");
        t
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn weights(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn get(&self, k: i64) -> Option<&Form> {
        self.coeffs.get(&k)
    }

    /// Adds a form into its weight slot.
    pub fn insert(&mut self, f: Form) -> Result<(), CrxError> {
        if f.n != self.n {
            return Err(CrxError::Mismatch(format!("form for n={} added to tensor for n={}", f.n, self.n)));
        }
        if f.is_zero() {
            return Ok(());
        }
        let k = f.k;
        let sum = match self.coeffs.get(&k) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
        Ok(())
    }

    pub fn add_scaled(&self, other: &Self, c: &Scalar) -> Result<Self, CrxError> {
        let mut out = self.clone();
        for f in other.coeffs.values() {
            out.insert(f.scale(c))?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, CrxError> {
        self.add_scaled(other, &Scalar::one())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = DeformationTensor::zero(self.n);
        for f in self.coeffs.values() {
            out.insert(f.scale(c)).expect("same n");
        }
        out
    }

    pub fn map(&self, op: impl Fn(&Form) -> Form) -> Self {
        let mut out = DeformationTensor::zero(self.n);
        for f in self.coeffs.values() {
            out.insert(op(f)).expect("same n");
        }
        out
    }

    pub fn dbar_h(&self) -> Self {
        self.map(Form::dbar_h)
    }

    pub fn flat(&self) -> Self {
        self.map(Form::flat)
    }

    pub fn bracket(&self, other: &Self) -> Result<Self, CrxError> {
        let mut out = DeformationTensor::zero(self.n);
        for a in self.coeffs.values() {
            for b in other.coeffs.values() {
                out.insert(a.bracket(b))?;
            }
        }
        Ok(out)
    }

    pub fn min_weight(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Keeps the components whose weight satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(i64) -> bool) -> Self {
        let coeffs = self.coeffs.iter().filter(|(k, _)| keep(**k)).map(|(k, f)| (*k, f.clone())).collect();
        DeformationTensor { n: self.n, coeffs }
    }

    pub fn to_file(&self) -> TensorFile {
        let mut entries = Vec::new();
        for (k, f) in &self.coeffs {
            for (t, c) in &f.terms {
                entries.push(TensorEntry {
                    weight: *k,
                    basis: term_label(t, self.n),
                    num: BigNum::of(&c.numer()),
                    den: BigNum::of(&c.denom()),
                });
            }
        }
        TensorFile { schema_version: SCHEMA_VERSION, n: self.n, entries }
    }

    /// Builds a tensor from its file form; terms of one weight with
    /// different levels are brought to common levels.
    pub fn from_file(file: &TensorFile) -> Result<Self, String> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", file.schema_version));
        }
        check_n(file.n).map_err(|e| e.to_string())?;
        let mut out = DeformationTensor::zero(file.n);
        for (i, e) in file.entries.iter().enumerate() {
            let at = |msg: String| format!("entry {i}: {msg}");
            let (t, levels) = parse_term(&e.basis, file.n, e.weight).map_err(at)?;
            let (Some(num), Some(den)) = (e.num.value(), e.den.value()) else {
                return Err(at("num and den must be integers".into()));
            };
            let c = Scalar::from_parts(num, den).ok_or_else(|| at("zero denominator".into()))?;
            let mut f = Form::zero(file.n, e.weight, levels);
            f.add_term(t, &c);
            out.insert(f).map_err(|e| at(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    /// Parses JSON; errors carry the line and column, or the entry index.
    pub fn from_json(s: &str) -> Result<Self, String> {
        let file: TensorFile = serde_json::from_str(s).map_err(|e| format!("parse error: {e}"))?;
        Self::from_file(&file)
    }
}
