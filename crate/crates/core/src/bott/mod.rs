//! Cohomology dimensions of twisted line and tangent sheaves on projective
//! spaces and their products.
//!
//! Line bundles use the closed Bott formula. Tangent sheaves go through the
//! long exact sequence of the Euler sequence
//! `0 -> O(k) -> O(k+1)^{n+1} -> T(k) -> 0`, whose connecting data are the
//! ranks of coordinate multiplication on cohomology, computed exactly by
//! the Čech module.

mod spec;

use serde::{Deserialize, Serialize};

pub use spec::{BundleError, BundleSpec, FactorSheaf, Structure};

use crate::cech;

fn binom(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `h^q(P^n, O(k))`. A point carries a one-dimensional `H^0` for every twist.
pub fn h_line(n: usize, k: i64, q: usize) -> usize {
    let ni = n as i64;
    if n == 0 {
        return (q == 0) as usize;
    }
    if q == 0 {
        binom(ni + k, ni)
    } else if q == n {
        binom(-k - 1, ni)
    } else {
        0
    }
}

/// `h^q(P^n, T(k))` from the Euler sequence, with exact connecting ranks.
pub fn h_tangent(n: usize, k: i64, q: usize) -> usize {
    match n {
        0 => 0,
        1 => h_line(1, k + 2, q),
        _ => {
            let coker = (n + 1) * h_line(n, k + 1, q) - cech::euler_rank(n, k, q);
            let ker = h_line(n, k, q + 1) - if q < n { cech::euler_rank(n, k, q + 1) } else { 0 };
            coker + ker
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    ClosedForm,
    Oracle,
}

/// `dims[q] = h^q` for `q = 0..=dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyTable {
    pub bundle: BundleSpec,
    pub dims: Vec<usize>,
    pub source: Source,
}

impl CohomologyTable {
    pub fn get(&self, q: i64) -> usize {
        if q < 0 {
            0
        } else {
            self.dims.get(q as usize).copied().unwrap_or(0)
        }
    }

    fn factor(f: &FactorSheaf) -> Self {
        let dims = (0..=f.m)
            .map(|q| if f.tangent { h_tangent(f.m, f.twist, q) } else { h_line(f.m, f.twist, q) })
            .collect();
        let bundle = if f.tangent {
            BundleSpec::tangent_of(&[f.m], &[f.twist], 0)
        } else {
            BundleSpec::line(&[f.m], &[f.twist])
        };
        CohomologyTable { bundle, dims, source: Source::ClosedForm }
    }
}

/// `sum_i a[i] * b[q-i]`.
pub fn kunneth(a: &CohomologyTable, b: &CohomologyTable, q: usize) -> usize {
    (0..=q as i64).map(|i| a.get(i) * b.get(q as i64 - i)).sum()
}

/// Closed-form table for any bundle in scope.
pub fn table(bundle: &BundleSpec) -> Result<CohomologyTable, BundleError> {
    bundle.validate()?;
    let n = bundle.base_dim();
    let mut dims = vec![0; n + 1];
    for summand in bundle.summands() {
        let tables: Vec<CohomologyTable> = summand.iter().map(CohomologyTable::factor).collect();
        for (q, slot) in dims.iter_mut().enumerate() {
            *slot += match tables.as_slice() {
                [a] => a.get(q as i64),
                [a, b] => kunneth(a, b, q),
                _ => unreachable!(),
            };
        }
    }
    Ok(CohomologyTable { bundle: bundle.clone(), dims, source: Source::ClosedForm })
}

/// Čech-oracle table at the minimal admissible box.
pub fn oracle_table(bundle: &BundleSpec) -> Result<CohomologyTable, cech::CechError> {
    let dims = cech::cech_dims(bundle, cech::box_bound(bundle))?;
    Ok(CohomologyTable { bundle: bundle.clone(), dims, source: Source::Oracle })
}

/// `h^q(P^m x P^l, (T_{P^m} (+) T_{P^l}) (a, b))`.
pub fn h_product_tangent(m: usize, l: usize, twist: (i64, i64), q: usize) -> usize {
    table(&BundleSpec::tangent(&[m, l], &[twist.0, twist.1]))
        .expect("valid product bundle")
        .get(q as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(h_line(1, -3, 1), 2);
        assert_eq!(h_line(3, 0, 0), 1);
        assert_eq!(h_line(3, -2, 2), 0);
        assert_eq!(h_line(0, -5, 0), 1);
        assert_eq!(h_line(2, -3, 2), 1);
    }

    #[test]
    fn tangent_values() {
        assert_eq!(h_tangent(3, -4, 2), 1);
        assert_eq!(h_tangent(3, 2, 0), 4 * 20 - 10);
        assert_eq!(h_tangent(3, 0, 0), 15);
        for k in -6..=6 {
            for q in 0..=1 {
                assert_eq!(h_tangent(1, k, q), h_line(1, k + 2, q));
            }
        }
    }

    #[test]
    fn serre_duality() {
        for n in 0..=4usize {
            for k in -8..=8i64 {
                for q in 0..=n {
                    assert_eq!(h_line(n, k, q), h_line(n, -k - n as i64 - 1, n - q), "n={n} k={k} q={q}");
                }
            }
        }
    }

    #[test]
    fn euler_characteristic_is_polynomial() {
        for n in 1..=4usize {
            for k in -8..=8i64 {
                let chi: i64 = (0..=n).map(|q| (-1i64).pow(q as u32) * h_line(n, k, q) as i64).sum();
                // C(n+k, n) as a polynomial in k
                let mut p = 1i128;
                for i in 1..=n as i128 {
                    p *= k as i128 + i;
                }
                let fact: i128 = (1..=n as i128).product();
                assert_eq!(chi as i128, p / fact);
            }
        }
    }

    #[test]
    fn product_tangent_examples() {
        assert_eq!(h_product_tangent(1, 3, (-2, 2), 1), 70);
        assert_eq!(h_product_tangent(1, 0, (-3, 3), 1), 0);
        for (m, l) in [(1, 3), (2, 2), (1, 0)] {
            assert_eq!(h_product_tangent(m, l, (0, 0), 0), m * m + 2 * m + l * l + 2 * l);
        }
        let t = table(&BundleSpec::tangent(&[1, 3], &[4, -4])).unwrap();
        assert_eq!(t.get(2), 5);
    }

    proptest::proptest! {
        #[test]
        fn kunneth_is_symmetric(m in 0usize..5, l in 0usize..5, a in -6i64..=6, b in -6i64..=6, tangent: bool) {
            let x = if tangent && m > 0 { BundleSpec::tangent(&[m], &[a]) } else { BundleSpec::line(&[m], &[a]) };
            let (x, y) = (table(&x).unwrap(), table(&BundleSpec::line(&[l], &[b])).unwrap());
            for q in 0..=m + l {
                proptest::prop_assert_eq!(kunneth(&x, &y, q), kunneth(&y, &x, q));
            }
        }
    }
}
