use std::collections::HashMap;

use super::{Scalar, SparseMatrix, SparseVec};

/// Incremental column echelon form.
///
/// Columns are absorbed in index order; each one is reduced against the
/// stored pivots (pivot = lowest row index, normalized to 1). Columns that
/// survive become new pivots, so the selected independent columns are the
/// lexicographically first ones. With `track` set, every stored vector also
/// remembers its expression in terms of the original columns.
#[derive(Clone, Debug)]
pub struct ColumnEchelon {
    nrows: usize,
    track: bool,
    pivots: HashMap<usize, usize>,
    vecs: Vec<SparseVec>,
    combos: Vec<SparseVec>,
    pivot_columns: Vec<usize>,
    dependent: Vec<(usize, SparseVec)>,
    absorbed: usize,
}

pub(crate) enum Reduced {
    Zero(SparseVec),
    Residual(SparseVec, SparseVec),
}

impl ColumnEchelon {
    pub fn new(nrows: usize, track: bool) -> Self {
        ColumnEchelon {
            nrows,
            track,
            pivots: HashMap::new(),
            vecs: Vec::new(),
            combos: Vec::new(),
            pivot_columns: Vec::new(),
            dependent: Vec::new(),
            absorbed: 0,
        }
    }

    pub fn of_matrix(m: &SparseMatrix, track: bool) -> Self {
        let mut e = ColumnEchelon::new(m.nrows(), track);
        for c in m.columns() {
            e.absorb(c);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.vecs.len()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn absorbed(&self) -> usize {
        self.absorbed
    }

    /// Indices of the absorbed columns that were independent of their predecessors.
    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivot_columns
    }

    /// Dependent columns with their kernel relations (only when tracking).
    /// Each relation has coefficient 1 at its column and is otherwise
    /// supported on earlier pivot columns.
    pub fn dependent(&self) -> &[(usize, SparseVec)] {
        &self.dependent
    }

    /// Kernel relations found so far (only when tracking): one per dependent column.
    pub fn relations(&self) -> impl Iterator<Item = &SparseVec> {
        self.dependent.iter().map(|(_, v)| v)
    }

    pub(crate) fn reduce(&self, v: &SparseVec, mut combo: SparseVec) -> Reduced {
        let mut v = v.clone();
        while let Some((r, c)) = find_pivot_entry(&v, &self.pivots) {
            let idx = self.pivots[&r];
            let coef = -c;
            v = v.add_scaled(&self.vecs[idx], &coef);
            if self.track {
                combo = combo.add_scaled(&self.combos[idx], &coef);
            }
        }
        if v.is_zero() {
            Reduced::Zero(combo)
        } else {
            Reduced::Residual(v, combo)
        }
    }

    /// Absorbs the next column. Returns true when it was independent.
    pub fn absorb(&mut self, col: &SparseVec) -> bool {
        let j = self.absorbed;
        self.absorbed += 1;
        let start = if self.track { SparseVec::unit(j) } else { SparseVec::new() };
        match self.reduce(col, start) {
            Reduced::Zero(combo) => {
                if self.track {
                    self.dependent.push((j, combo));
                }
                false
            }
            Reduced::Residual(v, combo) => {
                let (r, lead) = v.leading().cloned().unwrap();
                let inv = lead.inv();
                self.pivots.insert(r, self.vecs.len());
                self.vecs.push(v.scale(&inv));
                if self.track {
                    self.combos.push(combo.scale(&inv));
                }
                self.pivot_columns.push(j);
                true
            }
        }
    }

    /// Whether `v` lies in the span of the absorbed columns.
    pub fn contains(&self, v: &SparseVec) -> bool {
        matches!(self.reduce(v, SparseVec::new()), Reduced::Zero(_))
    }

    /// Coefficients `x` with `sum_j x_j col_j = v`, supported on pivot columns.
    pub fn express(&self, v: &SparseVec) -> Option<SparseVec> {
        assert!(self.track, "express requires a tracking echelon");
        match self.reduce(v, SparseVec::new()) {
            Reduced::Zero(combo) => Some(combo.scale(&Scalar::from_int(-1))),
            Reduced::Residual(..) => None,
        }
    }
}

fn find_pivot_entry(v: &SparseVec, pivots: &HashMap<usize, usize>) -> Option<(usize, Scalar)> {
    v.entries().iter().find(|(r, _)| pivots.contains_key(r)).cloned()
}
