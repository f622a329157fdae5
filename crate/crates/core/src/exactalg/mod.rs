//! Exact rational linear algebra: scalars, sparse matrices, column echelon
//! forms, kernels, particular solutions and complements.
//!
//! Everything is deterministic. Pivots are always taken at the lowest row
//! index, and columns are absorbed left to right, so the same input always
//! yields the same basis and the same particular solution.

mod echelon;
mod scalar;
mod sparse;

pub use echelon::ColumnEchelon;
pub use scalar::Scalar;
pub use sparse::{SparseMatrix, SparseVec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error("right-hand side is not in the image of the map")]
    NoSolution,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subspace is not contained in the enclosing space")]
    NotContained,
    #[error("basis vectors are linearly dependent")]
    Dependent,
}

/// Finite-dimensional subspace of `Q^ambient`, given by an independent basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: (0..ambient).map(SparseVec::unit).collect() }
    }

    /// Checks independence; fails with `Dependent` otherwise.
    pub fn new(ambient: usize, basis: Vec<SparseVec>) -> Result<Self, AlgError> {
        for v in &basis {
            if let Some(m) = v.max_index() {
                if m >= ambient {
                    return Err(AlgError::DimensionMismatch { expected: ambient, got: m + 1 });
                }
            }
        }
        let m = SparseMatrix::from_columns(ambient, basis.clone());
        if rank(&m) != basis.len() {
            return Err(AlgError::Dependent);
        }
        Ok(Subspace { ambient, basis })
    }

    /// Independent subset of `vectors`, keeping the first of each dependent run.
    pub fn span(ambient: usize, vectors: &[SparseVec]) -> Self {
        let mut e = ColumnEchelon::new(ambient, false);
        let basis = vectors.iter().filter(|v| e.absorb(v)).cloned().collect();
        Subspace { ambient, basis }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn as_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_columns(self.ambient, self.basis.clone())
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        ColumnEchelon::of_matrix(&self.as_matrix(), false).contains(v)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        let e = ColumnEchelon::of_matrix(&self.as_matrix(), false);
        other.basis.iter().all(|v| e.contains(v))
    }
}

/// Exact rank over the rationals.
pub fn rank(m: &SparseMatrix) -> usize {
    ColumnEchelon::of_matrix(m, false).rank()
}

/// Null space of `m` as a subspace of `Q^cols`.
pub fn kernel(m: &SparseMatrix) -> Subspace {
    let e = ColumnEchelon::of_matrix(m, true);
    Subspace { ambient: m.ncols(), basis: e.relations().cloned().collect() }
}

/// Some `x` with `m x = b`, supported on the lexicographically first
/// independent columns; `NoSolution` if `b` is outside the image.
pub fn solve(m: &SparseMatrix, b: &SparseVec) -> Result<SparseVec, AlgError> {
    if let Some(r) = b.max_index() {
        if r >= m.nrows() {
            return Err(AlgError::DimensionMismatch { expected: m.nrows(), got: r + 1 });
        }
    }
    Solver::new(m).solve(b)
}

/// A factored matrix that answers repeated `solve` queries with the same
/// deterministic (and linear) choice of particular solution.
#[derive(Clone, Debug)]
pub struct Solver {
    echelon: ColumnEchelon,
    ncols: usize,
}

impl Solver {
    pub fn new(m: &SparseMatrix) -> Self {
        Solver { echelon: ColumnEchelon::of_matrix(m, true), ncols: m.ncols() }
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.echelon.nrows()
    }

    pub fn in_image(&self, b: &SparseVec) -> bool {
        self.echelon.contains(b)
    }

    pub fn solve(&self, b: &SparseVec) -> Result<SparseVec, AlgError> {
        self.echelon.express(b).ok_or(AlgError::NoSolution)
    }
}

/// A complement of `sub` inside `inside`, built by greedily extending the
/// basis of `sub` with basis vectors of `inside` in order.
pub fn complement(sub: &Subspace, inside: &Subspace) -> Result<Subspace, AlgError> {
    if sub.ambient != inside.ambient {
        return Err(AlgError::DimensionMismatch { expected: inside.ambient, got: sub.ambient });
    }
    if !inside.contains_subspace(sub) {
        return Err(AlgError::NotContained);
    }
    let mut e = ColumnEchelon::new(inside.ambient, false);
    for v in &sub.basis {
        e.absorb(v);
    }
    let basis = inside.basis.iter().filter(|v| e.absorb(v)).cloned().collect();
    Ok(Subspace { ambient: inside.ambient, basis })
}

/// `rank(a) + rank(b) - rank([a | b])`: dimension of the intersection of two column spaces.
pub fn intersection_dim(a: &SparseMatrix, b: &SparseMatrix) -> usize {
    rank(a) + rank(b) - rank(&a.hstack(b))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn dense(rows: &[&[i64]]) -> SparseMatrix {
        SparseMatrix::from_dense(
            &rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn identity_and_zero_ranks() {
        assert_eq!(rank(&SparseMatrix::identity(2)), 2);
        assert_eq!(rank(&SparseMatrix::zero(3, 5)), 0);
        assert_eq!(kernel(&SparseMatrix::identity(4)).dim(), 0);
        assert_eq!(kernel(&SparseMatrix::zero(2, 6)).dim(), 6);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = dense(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let k = kernel(&m);
        assert_eq!(rank(&m) + k.dim(), 4);
        for v in k.basis() {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solve_identity_and_zero() {
        let b = SparseVec::from_dense(&[q(3), q(-1), q(0)]);
        assert_eq!(solve(&SparseMatrix::identity(3), &b).unwrap(), b);
        assert_eq!(solve(&SparseMatrix::zero(3, 3), &b), Err(AlgError::NoSolution));
        assert_eq!(solve(&SparseMatrix::zero(3, 3), &SparseVec::new()).unwrap(), SparseVec::new());
    }

    #[test]
    fn solve_picks_first_columns() {
        let m = dense(&[&[1, 1, 0], &[0, 0, 1]]);
        let x = solve(&m, &SparseVec::from_dense(&[q(2), q(5)])).unwrap();
        assert_eq!(x, SparseVec::from_pairs(vec![(0, q(2)), (2, q(5))]));
    }

    #[test]
    fn complement_edge_cases() {
        let full = Subspace::full(3);
        let zero = Subspace::zero(3);
        assert_eq!(complement(&zero, &full).unwrap(), full);
        assert_eq!(complement(&full, &full).unwrap().dim(), 0);
        let line = Subspace::new(3, vec![SparseVec::from_dense(&[q(1), q(1), q(0)])]).unwrap();
        let c = complement(&line, &full).unwrap();
        assert_eq!(c.dim(), 2);
        let plane = Subspace::new(3, vec![SparseVec::unit(0), SparseVec::unit(2)]).unwrap();
        assert_eq!(complement(&line, &plane), Err(AlgError::NotContained));
    }

    #[test]
    fn dependent_basis_rejected() {
        let v = SparseVec::unit(1);
        assert_eq!(Subspace::new(2, vec![v.clone(), v.scale(&q(2))]), Err(AlgError::Dependent));
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
        // sparse entries from a small range so ranks vary
        proptest::collection::vec(prop_oneof![3 => Just(0i64), 2 => -3i64..=3], rows * cols).prop_map(move |xs| {
            SparseMatrix::from_dense(&xs.chunks(cols).map(|r| r.iter().map(|&x| q(x)).collect()).collect::<Vec<_>>())
        })
    }

    fn shaped() -> impl Strategy<Value = (SparseMatrix, Vec<i64>)> {
        (1usize..7, 1usize..8).prop_flat_map(|(r, c)| (matrix(r, c), proptest::collection::vec(-4i64..=4, c)))
    }

    proptest! {
        #[test]
        fn rank_plus_nullity((m, _) in shaped()) {
            let k = kernel(&m);
            prop_assert_eq!(rank(&m) + k.dim(), m.ncols());
            for v in k.basis() {
                prop_assert!(m.mul_vec(v).is_zero());
            }
        }

        #[test]
        fn solve_recovers_an_image_vector((m, x0) in shaped()) {
            let x0 = SparseVec::from_dense(&x0.iter().map(|&x| q(x)).collect::<Vec<_>>());
            let b = m.mul_vec(&x0);
            let x = solve(&m, &b).unwrap();
            prop_assert_eq!(m.mul_vec(&x), b.clone());
            prop_assert_eq!(solve(&m, &b).unwrap(), x);
        }

        #[test]
        fn complement_completes_the_span((m, _) in shaped(), take in 0usize..4) {
            let a = Subspace::span(m.nrows(), m.columns());
            let sub = Subspace::span(m.nrows(), &a.basis()[..take.min(a.dim())]);
            let c = complement(&sub, &a).unwrap();
            let mut all = sub.basis().to_vec();
            all.extend_from_slice(c.basis());
            prop_assert_eq!(rank(&SparseMatrix::from_columns(m.nrows(), all)), a.dim());
            prop_assert_eq!(sub.dim() + c.dim(), a.dim());
        }

        #[test]
        fn scalars_stay_reduced(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in -50i64..50) {
            let x = Scalar::new(a, b);
            let y = Scalar::new(c, if d == 0 { 1 } else { d });
            for z in [&x + &y, &x - &y, &x * &y] {
                prop_assert!(z.denom() > 0.into());
                prop_assert_eq!(num_integer::Integer::gcd(&z.numer(), &z.denom()), if z.is_zero() { z.denom() } else { 1.into() });
            }
            prop_assert_eq!(&(&x * &y) - &(&y * &x), Scalar::zero());
        }
    }
}
