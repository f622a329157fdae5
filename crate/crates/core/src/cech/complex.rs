use crate::exactalg::{rank, ColumnEchelon, Scalar, SparseMatrix, SparseVec};

/// Position of a basis cochain inside one factor's block complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// Line-bundle cochain on the intersection `mask`.
    Line { mask: u32 },
    /// Component along the Euler generator `gen` (an `O(d+1)` cochain).
    Gen { gen: u8, mask: u32 },
    /// Auxiliary `O(d)` cochain of the Euler cone; carries no class data.
    Aux { mask: u32 },
}

impl Slot {
    pub fn mask(&self) -> u32 {
        match *self {
            Slot::Line { mask } | Slot::Gen { mask, .. } | Slot::Aux { mask } => mask,
        }
    }
}

pub type Label = Vec<Slot>;

/// Bounded cochain complex of finite-dimensional spaces with labelled bases.
#[derive(Clone, Debug)]
pub struct Complex {
    pub lo: i32,
    pub labels: Vec<Vec<Label>>,
    /// `d[i]` maps degree `lo + i` to `lo + i + 1`.
    pub d: Vec<SparseMatrix>,
}

impl Complex {
    pub fn hi(&self) -> i32 {
        self.lo + self.labels.len() as i32 - 1
    }

    pub fn dim(&self, q: i32) -> usize {
        self.index(q).map_or(0, |i| self.labels[i].len())
    }

    fn index(&self, q: i32) -> Option<usize> {
        if q < self.lo || q > self.hi() {
            None
        } else {
            Some((q - self.lo) as usize)
        }
    }

    /// Differential out of degree `q` (zero matrix at the ends).
    pub fn diff(&self, q: i32) -> SparseMatrix {
        match self.index(q) {
            Some(i) if i < self.d.len() => self.d[i].clone(),
            _ => SparseMatrix::zero(self.dim(q + 1), self.dim(q)),
        }
    }

    pub fn cohomology(&self, q: i32) -> usize {
        let n = self.dim(q);
        if n == 0 {
            return 0;
        }
        n - rank(&self.diff(q)) - rank(&self.diff(q - 1))
    }

    pub fn squares_to_zero(&self) -> bool {
        (self.lo..self.hi()).all(|q| self.diff(q).mul(&self.diff(q - 1)).is_zero())
    }

    /// Cocycles of degree `q` that are independent modulo coboundaries.
    pub fn representatives(&self, q: i32) -> Vec<SparseVec> {
        let n = self.dim(q);
        if n == 0 {
            return Vec::new();
        }
        let z = crate::exactalg::kernel(&self.diff(q));
        let b = self.diff(q - 1);
        let mut e = ColumnEchelon::new(n, false);
        for c in b.columns() {
            e.absorb(c);
        }
        z.basis().iter().filter(|v| e.absorb(v)).cloned().collect()
    }

    /// Whether `v` is a coboundary in degree `q`.
    pub fn is_coboundary(&self, q: i32, v: &SparseVec) -> bool {
        ColumnEchelon::of_matrix(&self.diff(q - 1), false).contains(v)
    }

    pub fn tensor(a: &Complex, b: &Complex) -> Complex {
        let lo = a.lo + b.lo;
        let hi = a.hi() + b.hi();
        // offsets[q][(p)] = start of the A^p (x) B^{q-p} block inside degree q
        let mut labels = Vec::new();
        let mut offsets: Vec<Vec<(i32, usize)>> = Vec::new();
        for q in lo..=hi {
            let mut lab = Vec::new();
            let mut off = Vec::new();
            for p in a.lo..=a.hi() {
                let r = q - p;
                if r < b.lo || r > b.hi() {
                    continue;
                }
                off.push((p, lab.len()));
                for la in &a.labels[(p - a.lo) as usize] {
                    for lb in &b.labels[(r - b.lo) as usize] {
                        let mut l = la.clone();
                        l.extend(lb.iter().copied());
                        lab.push(l);
                    }
                }
            }
            labels.push(lab);
            offsets.push(off);
        }
        let find = |q: i32, p: i32| -> Option<usize> {
            if q < lo || q > hi {
                return None;
            }
            offsets[(q - lo) as usize].iter().find(|o| o.0 == p).map(|o| o.1)
        };
        let mut d = Vec::new();
        for q in lo..hi {
            let mut trip = Vec::new();
            for &(p, off) in &offsets[(q - lo) as usize] {
                let r = q - p;
                let nb = b.dim(r);
                let da = a.diff(p);
                let db = b.diff(r);
                let sign = if p.rem_euclid(2) == 0 { Scalar::one() } else { Scalar::from_int(-1) };
                for ia in 0..a.dim(p) {
                    for ib in 0..nb {
                        let src = off + ia * nb + ib;
                        if let Some(toff) = find(q + 1, p + 1) {
                            for (ja, v) in da.column(ia).entries() {
                                trip.push((toff + ja * nb + ib, src, v.clone()));
                            }
                        }
                        if let Some(toff) = find(q + 1, p) {
                            let nb2 = b.dim(r + 1);
                            for (jb, v) in db.column(ib).entries() {
                                trip.push((toff + ia * nb2 + jb, src, v * &sign));
                            }
                        }
                    }
                }
            }
            let rows = labels[(q + 1 - lo) as usize].len();
            let cols = labels[(q - lo) as usize].len();
            d.push(SparseMatrix::from_triplets(rows, cols, &trip));
        }
        Complex { lo, labels, d }
    }

    /// Block direct sum; degree ranges are merged.
    pub fn direct_sum(parts: &[Complex]) -> Complex {
        let lo = parts.iter().map(|c| c.lo).min().unwrap();
        let hi = parts.iter().map(|c| c.hi()).max().unwrap();
        let mut labels = Vec::new();
        for q in lo..=hi {
            let mut lab = Vec::new();
            for c in parts {
                if q >= c.lo && q <= c.hi() {
                    lab.extend(c.labels[(q - c.lo) as usize].iter().cloned());
                }
            }
            labels.push(lab);
        }
        let mut d = Vec::new();
        for q in lo..hi {
            let mut trip = Vec::new();
            let (mut so, mut to) = (0, 0);
            for c in parts {
                let m = c.diff(q);
                for (j, col) in m.columns().iter().enumerate() {
                    for (i, v) in col.entries() {
                        trip.push((to + i, so + j, v.clone()));
                    }
                }
                so += c.dim(q);
                to += c.dim(q + 1);
            }
            d.push(SparseMatrix::from_triplets(to, so, &trip));
        }
        Complex { lo, labels, d }
    }

    /// Offset of part `k`'s degree-`q` block inside a direct sum of `parts`.
    pub fn sum_offset(parts: &[Complex], k: usize, q: i32) -> usize {
        parts[..k].iter().map(|c| c.dim(q)).sum()
    }
}

/// Rank of the map induced on degree-`q` cohomology by a chain map whose
/// degree-`q` component is `f` (rows index `target`'s degree-`tq` basis).
pub fn induced_rank(source: &Complex, q: i32, f: &SparseMatrix, target: &Complex, tq: i32) -> usize {
    let z = crate::exactalg::kernel(&source.diff(q));
    let b = target.diff(tq - 1);
    let images: Vec<SparseVec> = z.basis().iter().map(|v| f.mul_vec(v)).collect();
    let img = SparseMatrix::from_columns(target.dim(tq), images);
    rank(&img.hstack(&b)) - rank(&b)
}
