use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn binom(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
}

/// `h^0(P^m, O(d))`.
fn sections(m: i64, d: i64) -> usize {
    binom(m + d, m)
}

/// `h^0(P^m, T(d))` from the Euler sequence, `d >= -1`.
fn tangent_sections(m: i64, d: i64) -> usize {
    (m + 1) as usize * sections(m, d + 1) - sections(m, d)
}

fn w_oracle(n: usize, k: i64) -> usize {
    let m = n as i64 - 2;
    let h1_line = (-k - 1).max(0) as usize;
    let h1_tangent = (-k - 3).max(0) as usize;
    let extra = if k < -2 { h1_line } else { 0 };
    h1_line * tangent_sections(m, -k) + (h1_tangent + extra) * sections(m, -k)
}

proptest! {
    #[test]
    fn closed_form_matches_euler_sequence(n in 2usize..7, k in -10i64..=0) {
        prop_assert_eq!(w_dim_closed(n, k).unwrap(), w_oracle(n, k));
    }

    #[test]
    fn closed_form_tail_sums_increase(n in 2usize..7, kmin in -10i64..-2) {
        let mut prev = w_dim_closed(n, -2).unwrap();
        for k in (kmin..=-3).rev() {
            let acc = prev + w_dim_closed(n, k).unwrap();
            prop_assert!(acc > prev, "k={}", k);
            prev = acc;
        }
    }
}

#[test]
fn closed_form_values() {
    assert_eq!(w_dim_closed(5, -2).unwrap(), 70);
    assert_eq!(w_dim_closed(5, -3).unwrap(), 280);
    assert_eq!(w_dim_closed(2, -4).unwrap(), 4);
    // On S^3 both summands vanish at k = -2: T of a point is zero and
    // h^1(P^1, T(-2)) = h^1(P^1, O) = 0.
    assert_eq!(w_dim_closed(2, -2).unwrap(), 0);
    for n in 3..7 {
        assert!(w_dim_closed(n, -2).unwrap() > 0);
    }
    for n in 2..7 {
        assert_eq!(w_dim_closed(n, 0).unwrap(), 0);
        assert_eq!(w_dim_closed(n, -1).unwrap(), 0);
    }
    assert_eq!(w_dim_closed(5, 1), Err(ObstructionError::PositiveWeight(1)));
    assert!(w_dim_closed(1, -2).is_err());
}

#[test]
fn linear_algebra_matches_closed_form() {
    let ctx = Context::new();
    for n in 2..=4 {
        for k in -4..=0 {
            let wc = ctx.complex(n, k, 0).unwrap();
            let ws = w_space(&wc).unwrap();
            assert_eq!(ws.dim, w_oracle(n, k), "n={n} k={k}");
        }
    }
    assert_eq!(w_dim_linear(&ctx, 5, -2, 0).unwrap(), 70);
}

#[test]
fn w_basis_is_closed_and_outside_the_contact_image() {
    let ctx = Context::new();
    let wc = ctx.complex(3, -3, 0).unwrap();
    let ws = w_space(&wc).unwrap();
    let basis = ws.basis(ws.dim).unwrap();
    assert_eq!(basis.len(), ws.dim);
    for f in &basis {
        assert!(f.dbar_h().is_zero() && f.flat().is_zero());
        let v = classify(&ctx, &DeformationTensor::from_form(f.clone()), 3, -6, 6, 0).unwrap();
        assert!(!v.fillable_n);
        assert!(v.fillable_m);
    }
}

#[test]
fn extended_h1_matches_kunneth() {
    let ctx = Context::new();
    for n in [3, 4] {
        for k in -3..=0 {
            let h = h1_extended(&ctx, n, k, 0).unwrap();
            assert_eq!(Some(h.linear), h.kunneth);
        }
    }
    assert_eq!(h1_extended(&ctx, 3, 2, 0).unwrap().kunneth, None);
}

#[test]
fn h2_vanishes_through_the_contraction() {
    let ctx = Context::new();
    let c = h2_check(&ctx, 5, 4, 0).unwrap();
    assert_eq!(c.ambient, 5);
    assert_eq!(c.h2, 0);
    assert_eq!(c.contraction_rank, Some(5));
    assert_eq!(c.via_contraction, Some(0));
    for k in [-2, 0, 2] {
        assert_eq!(h2_check(&ctx, 3, k, 0).unwrap().h2, 0);
    }
}

#[test]
fn zero_tensor_is_fillable_both_ways() {
    let ctx = Context::new();
    let v = classify(&ctx, &DeformationTensor::zero(4), 4, -6, 6, 0).unwrap();
    assert!(v.fillable_n && v.fillable_m && v.stable && v.fillable_m_theorem_backed);
    assert!(v.residuals.entries.is_empty());
    let v3 = classify(&ctx, &DeformationTensor::zero(3), 3, -6, 6, 0).unwrap();
    assert!(!v3.fillable_m_theorem_backed);
}

#[test]
fn classification_is_gauge_invariant() {
    let ctx = Context::new();
    let n = 3;
    let wc = ctx.complex(n, -3, 0).unwrap();
    let w = w_space(&wc).unwrap().basis(1).unwrap().remove(0);
    let dt = DeformationTensor::from_form(w);
    let base = classify(&ctx, &dt, n, -6, 6, 0).unwrap();
    assert!(!base.fillable_n);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let fs: Vec<Form> = [-3, -2, 1, 2].iter().map(|&k| random_function(&mut rng, ctx.cache(), n, k, 2)).collect();
        let moved = add_contact(&dt, &fs).unwrap();
        assert_ne!(moved, dt);
        assert_eq!(classify(&ctx, &moved, n, -6, 6, 0).unwrap(), base);
        let pure = add_contact(&DeformationTensor::zero(n), &fs).unwrap();
        let v = classify(&ctx, &pure, n, -6, 6, 0).unwrap();
        assert!(v.fillable_n && v.fillable_m);
    }
}

#[test]
fn classifier_rejects_bad_input() {
    let ctx = Context::new();
    assert_eq!(
        classify(&ctx, &DeformationTensor::zero(3), 4, -6, 6, 0),
        Err(ObstructionError::WrongDimension { expected: 4, got: 3 })
    );
    let wc = ctx.complex(3, -3, 0).unwrap();
    let w = w_space(&wc).unwrap().basis(1).unwrap().remove(0);
    let dt = DeformationTensor::from_form(w);
    assert_eq!(classify(&ctx, &dt, 3, -2, 2, 0), Err(ObstructionError::OutOfRange { k: -3, kmin: -2, kmax: 2 }));
}

#[test]
fn dimension_seven_small_range() {
    let ctx = Context::new();
    let r = dim7_analysis(&ctx, -2, 2, 0, &[(-2, -2), (-2, -3)], 5).unwrap();
    assert!(r.h1_concentrated(), "{:?}", r.h1_nonnegative);
    assert!(r.h2_concentrated(), "{:?}", r.h2_nonpositive);
    assert!(r.brackets_exact());
    assert!(r.passed());
}

#[test]
fn report_round_trips_and_tail_sums_grow() {
    let ctx = Context::new();
    let r = obstruction_report(&ctx, 3, -5, 1, 0).unwrap();
    assert!(r.all_match());
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"match\""));
    let back: ObstructionReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    let sums = r.tail_sums();
    assert_eq!(sums.len(), 4);
    assert!(sums.windows(2).all(|p| p[1].1 > p[0].1));
}
