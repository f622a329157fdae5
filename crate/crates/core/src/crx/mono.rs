use std::fmt;

/// Most homogeneous coordinates on one factor (`P^4`).
pub const MAXC: usize = 5;
pub const NOVEC: u8 = u8::MAX;

/// A monomial `z^a zbar^b dzbar_mask (d/dz_vec)` on one factor.
///
/// The denominator is implicit: at level `S` a term of form degree `q`
/// is divided by `r^{S+q}`, `r = |z|^2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FMono {
    pub a: [u8; MAXC],
    pub b: [u8; MAXC],
    pub mask: u8,
    pub vec: u8,
}

impl FMono {
    pub fn degree(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn has_vec(&self) -> bool {
        self.vec != NOVEC
    }

    /// Torus weight of coordinate `c`.
    pub fn weight(&self, c: usize) -> i64 {
        self.a[c] as i64
            - self.b[c] as i64
            - ((self.mask >> c) & 1) as i64
            - (self.vec as usize == c) as i64
    }

    pub fn weights(&self, nc: usize) -> Vec<i64> {
        (0..nc).map(|c| self.weight(c)).collect()
    }

    /// Human-readable label over coordinate name `z`, e.g. `x0^2 xb1 dxb0 d/dx1`.
    pub fn label(&self, z: char, nc: usize) -> String {
        let mut parts = Vec::new();
        for c in 0..nc {
            match self.a[c] {
                0 => {}
                1 => parts.push(format!("{z}{c}")),
                e => parts.push(format!("{z}{c}^{e}")),
            }
        }
        for c in 0..nc {
            match self.b[c] {
                0 => {}
                1 => parts.push(format!("{z}b{c}")),
                e => parts.push(format!("{z}b{c}^{e}")),
            }
        }
        for c in 0..nc {
            if self.mask & (1 << c) != 0 {
                parts.push(format!("d{z}b{c}"));
            }
        }
        if self.has_vec() {
            parts.push(format!("d/d{z}{}", self.vec));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }

    /// Inverse of [`FMono::label`].
    pub fn parse(s: &str, z: char) -> Option<FMono> {
        let mut m = FMono { a: [0; MAXC], b: [0; MAXC], mask: 0, vec: NOVEC };
        if s == "1" {
            return Some(m);
        }
        let idx = |t: &str| -> Option<usize> {
            let c: usize = t.parse().ok()?;
            (c < MAXC).then_some(c)
        };
        for tok in s.split(' ') {
            if let Some(rest) = tok.strip_prefix(&format!("d/d{z}")) {
                m.vec = idx(rest)? as u8;
            } else if let Some(rest) = tok.strip_prefix(&format!("d{z}b")) {
                m.mask |= 1 << idx(rest)?;
            } else if let Some(rest) = tok.strip_prefix(&format!("{z}b")) {
                let (c, e) = split_pow(rest)?;
                m.b[idx(c)?] = e;
            } else {
                let rest = tok.strip_prefix(z)?;
                let (c, e) = split_pow(rest)?;
                m.a[idx(c)?] = e;
            }
        }
        Some(m)
    }
}

fn split_pow(s: &str) -> Option<(&str, u8)> {
    match s.split_once('^') {
        Some((c, e)) => Some((c, e.parse().ok()?)),
        None => Some((s, 1)),
    }
}

impl fmt::Display for FMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label('z', MAXC))
    }
}

fn below(mask: u8, c: usize) -> u32 {
    (mask & ((1u8 << c) - 1)).count_ones()
}

fn above(mask: u8, c: usize) -> u32 {
    (mask >> (c + 1)).count_ones()
}

fn parity(n: u32) -> i64 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `dzbar_c ^ (.)`: sign and new mask, or `None` when `c` is present.
pub fn insert_left(mask: u8, c: usize) -> Option<(u8, i64)> {
    (mask & (1 << c) == 0).then(|| (mask | (1 << c), parity(below(mask, c))))
}

/// `(.) ^ dzbar_c`.
pub fn insert_right(mask: u8, c: usize) -> Option<(u8, i64)> {
    (mask & (1 << c) == 0).then(|| (mask | (1 << c), parity(above(mask, c))))
}

/// Sign of `dzbar_A ^ dzbar_B` against the sorted `dzbar_{A+B}`, or `None` if they overlap.
pub fn wedge_sign(a: u8, b: u8) -> Option<i64> {
    if a & b != 0 {
        return None;
    }
    let mut inv = 0;
    for c in 0..8 {
        if b & (1 << c) != 0 {
            inv += above(a, c);
        }
    }
    Some(parity(inv))
}

/// Dolbeault operator of the factor at level `s`, acting on numerators:
/// `d(p/r^{s+q}) = (r dbar p - (s+q) p sum z_i dzbar_i) / r^{s+q+1}`.
pub fn dbar(t: &FMono, nc: usize, s: i64) -> Vec<(FMono, i64)> {
    let mut out = Vec::new();
    let q = t.degree() as i64;
    for c in 0..nc {
        if t.b[c] == 0 {
            continue;
        }
        let Some((mask, sg)) = insert_left(t.mask, c) else {
            continue;
        };
        let mut u = *t;
        u.b[c] -= 1;
        u.mask = mask;
        for e in 0..nc {
            let mut v = u;
            v.a[e] += 1;
            v.b[e] += 1;
            out.push((v, sg * t.b[c] as i64));
        }
    }
    for i in 0..nc {
        let Some((mask, sg)) = insert_left(t.mask, i) else {
            continue;
        };
        let mut v = *t;
        v.a[i] += 1;
        v.mask = mask;
        out.push((v, -(s + q) * sg));
    }
    out
}

/// Projection term of the horizontal Dolbeault operator on a vector
/// `U_j d/dz_j`: `sum_i z_i (dzbar_j ^ U_j) / r  d/dz_i`.
pub fn h_correction(t: &FMono, nc: usize) -> Vec<(FMono, i64)> {
    let j = t.vec as usize;
    let Some((mask, sg)) = insert_left(t.mask, j) else {
        return Vec::new();
    };
    (0..nc)
        .map(|i| {
            let mut v = *t;
            v.vec = i as u8;
            v.a[i] += 1;
            v.mask = mask;
            (v, sg)
        })
        .collect()
}

/// `U_i d/dz_i -> U_i ^ dzbar_i / r` (right wedge).
pub fn flat(t: &FMono) -> Vec<(FMono, i64)> {
    let i = t.vec as usize;
    let Some((mask, sg)) = insert_right(t.mask, i) else {
        return Vec::new();
    };
    let mut v = *t;
    v.vec = NOVEC;
    v.mask = mask;
    vec![(v, sg)]
}

/// Contraction with `zbar_c d/dzbar_c` summed over the factor.
pub fn iota_euler(t: &FMono, nc: usize) -> Vec<(FMono, i64)> {
    (0..nc)
        .filter(|c| t.mask & (1 << c) != 0)
        .map(|c| {
            let mut v = *t;
            v.mask &= !(1 << c);
            v.b[c] += 1;
            (v, parity(below(t.mask, c)))
        })
        .collect()
}

/// `sum_c zbar_c U_c` for a vector term.
pub fn zbar_dot(t: &FMono) -> (FMono, i64) {
    let mut v = *t;
    v.b[t.vec as usize] += 1;
    v.vec = NOVEC;
    (v, 1)
}

/// Holomorphic partial derivative of the numerator.
pub fn deriv(t: &FMono, c: usize) -> Option<(FMono, i64)> {
    if t.a[c] == 0 {
        return None;
    }
    let mut v = *t;
    v.a[c] -= 1;
    Some((v, t.a[c] as i64))
}

/// `r * t`.
pub fn times_r(t: &FMono, nc: usize) -> Vec<(FMono, i64)> {
    (0..nc)
        .map(|e| {
            let mut v = *t;
            v.a[e] += 1;
            v.b[e] += 1;
            (v, 1)
        })
        .collect()
}

/// Product of numerators with the wedge sign; at most one factor may carry a vector.
pub fn mul(x: &FMono, y: &FMono) -> Option<(FMono, i64)> {
    let sg = wedge_sign(x.mask, y.mask)?;
    let mut v = *x;
    for c in 0..MAXC {
        v.a[c] += y.a[c];
        v.b[c] += y.b[c];
    }
    v.mask |= y.mask;
    v.vec = if x.has_vec() { x.vec } else { y.vec };
    Some((v, sg))
}

/// Interior product with `d/dzbar_c` from the left.
pub fn iota(t: &FMono, c: usize) -> Option<(FMono, i64)> {
    if t.mask & (1 << c) == 0 {
        return None;
    }
    let mut v = *t;
    v.mask &= !(1 << c);
    Some((v, parity(below(t.mask, c))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: &[u8], b: &[u8], mask: u8, vec: u8) -> FMono {
        let mut x = FMono { a: [0; MAXC], b: [0; MAXC], mask, vec };
        x.a[..a.len()].copy_from_slice(a);
        x.b[..b.len()].copy_from_slice(b);
        x
    }

    #[test]
    fn labels_round_trip() {
        for t in [m(&[2, 0, 1], &[0, 1, 0], 0b101, 1), m(&[], &[], 0, NOVEC), m(&[0, 3], &[1], 0, NOVEC)] {
            let s = t.label('y', 3);
            assert_eq!(FMono::parse(&s, 'y'), Some(t), "{s}");
        }
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(0b01, 0b10), Some(1));
        assert_eq!(wedge_sign(0b10, 0b01), Some(-1));
        assert_eq!(wedge_sign(0b11, 0b01), None);
        assert_eq!(insert_left(0b001, 2), Some((0b101, -1)));
        assert_eq!(insert_right(0b100, 0), Some((0b101, -1)));
    }
}
