use std::collections::BTreeMap;

use super::complex::{Complex, Slot};
use crate::exactalg::{Scalar, SparseMatrix};

/// Sign pattern of a monomial block on one factor: `neg` holds the
/// coordinates with negative exponent, `minus_one` those equal to -1.
/// The block complexes of a line or tangent sheaf depend on nothing else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorKey {
    pub neg: u32,
    pub minus_one: u32,
}

impl FactorKey {
    pub fn of(mu: &[i64]) -> Self {
        let mut k = FactorKey { neg: 0, minus_one: 0 };
        for (i, &e) in mu.iter().enumerate() {
            if e < 0 {
                k.neg |= 1 << i;
            }
            if e == -1 {
                k.minus_one |= 1 << i;
            }
        }
        k
    }

    /// Negative set of the block shifted by `e_i`.
    pub fn shifted_neg(&self, i: usize) -> u32 {
        self.neg & !(self.minus_one & (1 << i))
    }
}

fn masks_over(m: usize, sup: u32, size: u32) -> Vec<u32> {
    (0u32..(1 << (m + 1)))
        .filter(|x| x.count_ones() == size && x & sup == sup)
        .collect()
}

fn sorted_bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Coface terms of the standard alternating differential: for each `j` not in
/// `mask`, the sign `(-1)^t` where `t` is the position of `j` in `mask | j`.
pub fn cofaces(m: usize, mask: u32) -> Vec<(u32, i64)> {
    (0..=m)
        .filter(|j| mask & (1 << j) == 0)
        .map(|j| {
            let t = (mask & ((1u32 << j) - 1)).count_ones();
            (mask | (1 << j), if t.is_multiple_of(2) { 1 } else { -1 })
        })
        .collect()
}

fn build(lo: i32, labels: Vec<Vec<Slot>>, edge: impl Fn(&Slot) -> Vec<(Slot, i64)>) -> Complex {
    let index: Vec<BTreeMap<Slot, usize>> = labels
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, s)| (*s, i)).collect())
        .collect();
    let mut d = Vec::new();
    for q in 0..labels.len().saturating_sub(1) {
        let mut trip = Vec::new();
        for (c, s) in labels[q].iter().enumerate() {
            for (t, v) in edge(s) {
                let r = *index[q + 1]
                    .get(&t)
                    .unwrap_or_else(|| panic!("coface {t:?} of {s:?} missing"));
                trip.push((r, c, Scalar::from_int(v)));
            }
        }
        d.push(SparseMatrix::from_triplets(labels[q + 1].len(), labels[q].len(), &trip));
    }
    Complex {
        lo,
        labels: labels.into_iter().map(|l| l.into_iter().map(|s| vec![s]).collect()).collect(),
        d,
    }
}

/// Block complex of `O(d)` on `P^m` for a monomial with negative set `neg`.
/// Degree `q` is spanned by the intersections of `q+1` charts containing `neg`.
pub fn line_complex(m: usize, neg: u32) -> Complex {
    let labels = (0..=m)
        .map(|q| masks_over(m, neg, q as u32 + 1).into_iter().map(|mask| Slot::Line { mask }).collect())
        .collect();
    build(0, labels, |s| {
        cofaces(m, s.mask())
            .into_iter()
            .filter(|(x, _)| x & neg == neg)
            .map(|(mask, e)| (Slot::Line { mask }, e))
            .collect()
    })
}

/// Block complex of `T_{P^m}(d)` at monomial `mu` (exponent of the `O(d)`
/// part), realized as the cone of the Euler map
/// `O(d)_mu -> (+)_i O(d+1)_{mu+e_i}`. Degree `q` holds `A^q (+) B^{q+1}`
/// with `A` the generator components and `B` the auxiliary `O(d)` part.
pub fn cone_complex(m: usize, key: FactorKey) -> Complex {
    assert!(m >= 1, "tangent block on a point");
    let mut labels = Vec::new();
    for q in -1..=(m as i32) {
        let mut l = Vec::new();
        if q >= 0 {
            for gen in 0..=m {
                let sup = key.shifted_neg(gen);
                for mask in masks_over(m, sup, q as u32 + 1) {
                    l.push(Slot::Gen { gen: gen as u8, mask });
                }
            }
        }
        if q + 2 <= m as i32 + 1 {
            for mask in masks_over(m, key.neg, (q + 2) as u32) {
                l.push(Slot::Aux { mask });
            }
        }
        labels.push(l);
    }
    build(-1, labels, |s| match *s {
        Slot::Gen { gen, mask } => {
            let sup = key.shifted_neg(gen as usize);
            cofaces(m, mask)
                .into_iter()
                .filter(|(x, _)| x & sup == sup)
                .map(|(mask, e)| (Slot::Gen { gen, mask }, e))
                .collect()
        }
        Slot::Aux { mask } => {
            let mut out: Vec<(Slot, i64)> =
                (0..=m).map(|gen| (Slot::Gen { gen: gen as u8, mask }, 1)).collect();
            out.extend(
                cofaces(m, mask)
                    .into_iter()
                    .filter(|(x, _)| x & key.neg == key.neg)
                    .map(|(mask, e)| (Slot::Aux { mask }, -e)),
            );
            out
        }
        Slot::Line { .. } => unreachable!(),
    })
}

/// Contraction of a generator component with the dlog cocycle
/// `w_ij = dz_j/z_j - dz_i/z_i` (cup product, last index new).
pub fn contract_slot(m: usize, s: &Slot) -> Vec<(Slot, i64)> {
    let Slot::Gen { gen, mask } = *s else {
        return Vec::new();
    };
    let top = *sorted_bits(mask).last().unwrap();
    let mut out = Vec::new();
    for j in top + 1..=m {
        let c = (gen as usize == j) as i64 - (gen as usize == top) as i64;
        if c != 0 {
            out.push((Slot::Line { mask: mask | (1 << j) }, c));
        }
    }
    out
}

/// Degree of a slot inside its factor complex.
pub fn slot_degree(s: &Slot) -> i32 {
    match s {
        Slot::Aux { mask } => mask.count_ones() as i32 - 2,
        _ => s.mask().count_ones() as i32 - 1,
    }
}

/// Number of exponent vectors of length `m+1` with entries in `[-b, b]`,
/// summing to `d`, grouped by their `FactorKey`.
pub fn key_counts(m: usize, d: i64, b: i64) -> BTreeMap<FactorKey, u128> {
    // categories: 0 = nonnegative, 1 = exactly -1, 2 = at most -2
    let ranges = [(0, b), (-1, -1), (-b, -2)];
    let mut out = BTreeMap::new();
    let n = m + 1;
    for code in 0..3usize.pow(n as u32) {
        let mut cats = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            cats.push(c % 3);
            c /= 3;
        }
        let mut dist: BTreeMap<i64, u128> = BTreeMap::from([(0, 1)]);
        let mut empty = false;
        for &cat in &cats {
            let (lo, hi) = ranges[cat];
            if lo > hi {
                empty = true;
                break;
            }
            let mut next = BTreeMap::new();
            for (&s, &w) in &dist {
                for e in lo..=hi {
                    *next.entry(s + e).or_insert(0) += w;
                }
            }
            dist = next;
        }
        if empty {
            continue;
        }
        let cnt = dist.get(&d).copied().unwrap_or(0);
        if cnt == 0 {
            continue;
        }
        let mut key = FactorKey { neg: 0, minus_one: 0 };
        for (i, &cat) in cats.iter().enumerate() {
            if cat > 0 {
                key.neg |= 1 << i;
            }
            if cat == 1 {
                key.minus_one |= 1 << i;
            }
        }
        *out.entry(key).or_insert(0) += cnt;
    }
    out
}

/// All exponent vectors with entries in `[-b, b]`, sum `d`, and the given key.
pub fn blocks_with_key(m: usize, d: i64, b: i64, key: FactorKey) -> Vec<Vec<i64>> {
    fn rec(i: usize, m: usize, left: i64, b: i64, key: FactorKey, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i > m {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let (lo, hi) = if key.minus_one & (1 << i) != 0 {
            (-1, -1)
        } else if key.neg & (1 << i) != 0 {
            (-b, -2)
        } else {
            (0, b)
        };
        for e in lo..=hi {
            cur.push(e);
            rec(i + 1, m, left - e, b, key, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, d, b, key, &mut Vec::new(), &mut out);
    out
}
