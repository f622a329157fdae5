use serde::{Deserialize, Serialize};

use super::Scalar;

/// Sparse vector: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    /// Builds from unsorted pairs, summing repeated indices.
    pub fn from_pairs(mut pairs: Vec<(usize, Scalar)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(usize, Scalar)> = Vec::with_capacity(pairs.len());
        for (i, c) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += &c,
                _ => entries.push((i, c)),
            }
        }
        entries.retain(|(_, c)| !c.is_zero());
        SparseVec { entries }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, Scalar::one())] }
    }

    pub fn from_dense(v: &[Scalar]) -> Self {
        SparseVec {
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); len];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, Scalar)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, Scalar)> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Scalar {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(p) => self.entries[p].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn leading(&self) -> Option<&(usize, Scalar)> {
        self.entries.first()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn scale(&self, c: &Scalar) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, x)| (*i, x * c)).collect(),
        }
    }

    /// `self + c * other`
    pub fn add_scaled(&self, other: &SparseVec, c: &Scalar) -> SparseVec {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut p, mut q) = (0, 0);
        while p < a.len() || q < b.len() {
            if q == b.len() || (p < a.len() && a[p].0 < b[q].0) {
                out.push(a[p].clone());
                p += 1;
            } else if p == a.len() || b[q].0 < a[p].0 {
                out.push((b[q].0, &b[q].1 * c));
                q += 1;
            } else {
                let s = &a[p].1 + &(&b[q].1 * c);
                if !s.is_zero() {
                    out.push((a[p].0, s));
                }
                p += 1;
                q += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.add_scaled(other, &Scalar::one())
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.add_scaled(other, &Scalar::from_int(-1))
    }

    pub fn dot(&self, other: &SparseVec) -> Scalar {
        let (a, b) = (&self.entries, &other.entries);
        let (mut p, mut q) = (0, 0);
        let mut acc = Scalar::zero();
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    acc += &(&a[p].1 * &b[q].1);
                    p += 1;
                    q += 1;
                }
            }
        }
        acc
    }

    /// Re-indexes entries through `f`; entries mapped to `None` are dropped.
    pub fn remap(&self, f: impl Fn(usize) -> Option<usize>) -> SparseVec {
        SparseVec::from_pairs(
            self.entries
                .iter()
                .filter_map(|(i, c)| f(*i).map(|j| (j, c.clone())))
                .collect(),
        )
    }
}

/// Column-major sparse matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<SparseVec>,
}

#[derive(Serialize, Deserialize)]
struct Triplet(usize, usize, String);

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![SparseVec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: (0..n).map(SparseVec::unit).collect() }
    }

    pub fn from_columns(rows: usize, cols: Vec<SparseVec>) -> Self {
        for c in &cols {
            if let Some(m) = c.max_index() {
                assert!(m < rows, "row index {m} out of range {rows}");
            }
        }
        SparseMatrix { rows, cols }
    }

    /// Builds from `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, Scalar)]) -> Self {
        let mut buckets: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); cols];
        for (r, c, v) in entries {
            assert!(*r < rows && *c < cols, "triplet ({r},{c}) out of range");
            buckets[*c].push((*r, v.clone()));
        }
        SparseMatrix { rows, cols: buckets.into_iter().map(SparseVec::from_pairs).collect() }
    }

    pub fn from_dense(rows: &[Vec<Scalar>]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                if !v.is_zero() {
                    t.push((i, j, v.clone()));
                }
            }
        }
        Self::from_triplets(nr, nc, &t)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.nnz()).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.cols[c].get(r)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Scalar)> {
        let mut out = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c.entries() {
                out.push((*i, j, v.clone()));
            }
        }
        out.sort_by_key(|t| (t.0, t.1));
        out
    }

    pub fn mul_vec(&self, x: &SparseVec) -> SparseVec {
        let mut acc: Vec<(usize, Scalar)> = Vec::new();
        for (j, c) in x.entries() {
            for (i, v) in self.cols[*j].entries() {
                acc.push((*i, v * c));
            }
        }
        SparseVec::from_pairs(acc)
    }

    /// `self * other`
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), other.nrows(), "dimension mismatch in product");
        SparseMatrix {
            rows: self.rows,
            cols: other.cols.iter().map(|c| self.mul_vec(c)).collect(),
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut buckets: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c.entries() {
                buckets[*i].push((j, v.clone()));
            }
        }
        SparseMatrix {
            rows: self.cols.len(),
            cols: buckets.into_iter().map(|b| SparseVec { entries: b }).collect(),
        }
    }

    /// Stacks `self` on top of `below` (same column count).
    pub fn vstack(&self, below: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), below.ncols(), "vstack column mismatch");
        let off = self.rows;
        SparseMatrix {
            rows: self.rows + below.rows,
            cols: self
                .cols
                .iter()
                .zip(&below.cols)
                .map(|(a, b)| {
                    let mut e = a.entries.clone();
                    e.extend(b.entries().iter().map(|(i, v)| (i + off, v.clone())));
                    SparseVec { entries: e }
                })
                .collect(),
        }
    }

    /// Places `right`'s columns after `self`'s (same row count).
    pub fn hstack(&self, right: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, right.rows, "hstack row mismatch");
        let mut cols = self.cols.clone();
        cols.extend(right.cols.iter().cloned());
        SparseMatrix { rows: self.rows, cols }
    }

    pub fn scale(&self, c: &Scalar) -> SparseMatrix {
        SparseMatrix { rows: self.rows, cols: self.cols.iter().map(|v| v.scale(c)).collect() }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.ncols()), (other.rows, other.ncols()));
        SparseMatrix {
            rows: self.rows,
            cols: self.cols.iter().zip(&other.cols).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let t: Vec<Triplet> = self
            .triplets()
            .into_iter()
            .map(|(i, j, v)| Triplet(i, j, v.to_string()))
            .collect();
        serde_json::json!({ "rows": self.rows, "cols": self.ncols(), "entries": t })
    }
}
