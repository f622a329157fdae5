use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bott;
use crate::exactalg::{Scalar, SparseVec};

fn expected_t(n: usize, k: i64, q: usize) -> usize {
    bott::h_product_tangent(1, n - 2, (k, -k), q)
}

fn expected_o(n: usize, k: i64, q: usize) -> usize {
    bott::table(&bott::BundleSpec::line(&[1, n - 2], &[k, -k])).unwrap().get(q as i64)
}

fn geometry(n: usize, k: i64) -> Geometry {
    Geometry { n, k, levels: Levels::for_weight(n - 2, k, 0) }
}

/// A random element of `T^q` (restricted to `ker flat` if asked) over a few random blocks.
fn random_element(rng: &mut ChaCha8Rng, cache: &FactorCache, g: &Geometry, q: usize, closed: bool) -> Form {
    super::random_form(rng, cache, g, q, closed)
}

fn assert_in_model(f: &Form, cache: &FactorCache, kind: SpaceKind) {
    assert!(f.in_model(cache, kind), "not in {kind:?}: {} terms", f.terms.len());
}

#[test]
fn small_grid_matches_bott() {
    for n in 2..=4usize {
        for k in -3..=3i64 {
            let wc = build_weight_complex(n, k, 0).unwrap();
            assert!(wc.is_stable(), "n={n} k={k}");
            assert!(wc.diagnostics.identities, "n={n} k={k}");
            for q in 0..3 {
                assert_eq!(wc.dims.h_t[q], expected_t(n, k, q), "n={n} k={k} T q={q}");
            }
            for q in 0..4 {
                assert_eq!(wc.dims.h_o[q], expected_o(n, k, q), "n={n} k={k} O q={q}");
            }
        }
    }
}

#[test]
fn permutations_are_distinct_and_complete() {
    assert_eq!(permutations(&[1, 0, 0]).len(), 3);
    assert_eq!(permutations(&[2, 1, 0]).len(), 6);
    assert_eq!(permutations(&[]).len(), 1);
    let g = geometry(4, -2);
    let cache = FactorCache::new();
    let total: usize = all_blocks(&cache, &g).len();
    let sorted: u128 = complex::sorted_blocks(&cache, &g).iter().map(|(_, o)| *o).sum();
    assert_eq!(total as u128, sorted);
}

#[test]
fn element_operators_match_block_matrices() {
    let cache = FactorCache::new();
    for (n, k) in [(3, -2), (4, 1), (4, -1)] {
        let g = geometry(n, k);
        for w in all_blocks(&cache, &g).iter().take(12) {
            let b = BlockData::build(&cache, &g, w);
            for q in 0..complex::TOP_T {
                for i in 0..b.t[q].dim {
                    let f = Form::from_coords(&cache, &g, w, SpaceKind::Vector(q), &SparseVec::unit(i));
                    let dh = f.apply(POp::DbarH(q));
                    assert_eq!(dh.coords(&cache, w, SpaceKind::Vector(q + 1)).unwrap(), *b.dh[q].column(i));
                    let fl = f.apply(POp::Flat(q));
                    assert_eq!(fl.coords(&cache, w, SpaceKind::Scalar(q + 1)).unwrap(), *b.flat[q].column(i));
                }
            }
            for q in 0..complex::TOP_O {
                for i in 0..b.o[q].dim {
                    let f = Form::from_coords(&cache, &g, w, SpaceKind::Scalar(q), &SparseVec::unit(i));
                    let d = f.apply(POp::Dbar(q));
                    assert_eq!(d.coords(&cache, w, SpaceKind::Scalar(q + 1)).unwrap(), *b.ds[q].column(i));
                }
            }
        }
    }
}

#[test]
fn sharp_is_a_right_inverse_of_flat() {
    let cache = FactorCache::new();
    for (n, k) in [(4, 1), (5, -2)] {
        let g = geometry(n, k);
        for w in all_blocks(&cache, &g).iter().take(10) {
            let b = BlockData::build(&cache, &g, w);
            for q in 1..=3 {
                for i in 0..b.o[q].dim {
                    let th = Form::from_coords(&cache, &g, w, SpaceKind::Scalar(q), &SparseVec::unit(i));
                    let s = th.sharp();
                    assert_in_model(&s, &cache, SpaceKind::Vector(q - 1));
                    assert_eq!(s.flat(), th, "n={n} k={k} q={q}");
                }
            }
        }
    }
}

#[test]
fn raising_levels_preserves_the_model() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = geometry(4, -1);
    let f = random_element(&mut rng, &cache, &g, 1, true);
    let up = f.raise_to(g.levels.raised(1));
    assert_in_model(&up, &cache, SpaceKind::Vector(1));
    assert_eq!(up.dbar_h(), f.dbar_h().raise_to(g.levels.raised(1)));
    assert_eq!(up.flat(), f.flat().raise_to(g.levels.raised(1)));
}

#[test]
fn bracket_identities() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonzero = 0;
    for (n, k1, k2) in [(3, -1, -2), (4, -1, -1), (4, 0, -2), (5, -1, 1)] {
        for _ in 0..3 {
            let (g1, g2) = (geometry(n, k1), geometry(n, k2));
            let a = random_element(&mut rng, &cache, &g1, 1, true);
            let b = random_element(&mut rng, &cache, &g2, 1, true);
            let ab = a.bracket(&b);
            assert_eq!(ab.k, k1 + k2);
            nonzero += usize::from(!ab.is_zero());
            assert_in_model(&ab, &cache, SpaceKind::Vector(2));
            // symmetric for two one-forms
            assert_eq!(b.bracket(&a), ab);
            // closed under the bracket
            assert!(ab.flat().is_zero(), "n={n} flat of bracket");
            // Leibniz
            let lhs = ab.dbar_h();
            let rhs = a.dbar_h().bracket(&b).sub(&a.bracket(&b.dbar_h())).unwrap();
            assert_eq!(lhs, rhs, "n={n} k=({k1},{k2})");
        }
    }
    assert!(nonzero >= 6, "only {nonzero} nonzero brackets");
}

#[test]
fn bracket_of_vector_fields_is_antisymmetric() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (g1, g2) = (geometry(4, -1), geometry(4, 1));
    let a = random_element(&mut rng, &cache, &g1, 0, false);
    let b = random_element(&mut rng, &cache, &g2, 1, true);
    let c = random_element(&mut rng, &cache, &g1, 0, false);
    assert!(!a.bracket(&c).is_zero());
    assert_eq!(a.bracket(&c), c.bracket(&a).scale(&Scalar::from_int(-1)));
    assert_eq!(a.bracket(&b), b.bracket(&a).scale(&Scalar::from_int(-1)));
}

fn random_function(rng: &mut ChaCha8Rng, cache: &FactorCache, g: &Geometry) -> Form {
    let blocks = all_blocks(cache, g);
    let mut out = Form::zero(g.n, g.k, g.levels);
    for _ in 0..3 {
        let w = &blocks[rng.gen_range(0..blocks.len())];
        let dim = block::space(cache, g, w, SpaceKind::Scalar(0)).dim;
        for i in 0..dim {
            let c = Scalar::from_int(rng.gen_range(-2i64..=2));
            let f = Form::from_coords(cache, g, w, SpaceKind::Scalar(0), &SparseVec::unit(i).scale(&c));
            out = out.add(&f).unwrap();
        }
    }
    out
}

#[test]
fn contact_action_lands_in_closed_one_forms() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nonzero = 0;
    for (n, k) in [(3, -2), (4, -3), (5, -2), (5, 1), (5, -3)] {
        let g = geometry(n, k);
        let f = random_function(&mut rng, &cache, &g);
        let v = f.contact_action();
        nonzero += usize::from(!v.is_zero());
        assert_in_model(&v, &cache, SpaceKind::Vector(1));
        assert!(v.flat().is_zero());
        assert!(v.dbar_h().is_zero());
        assert_eq!(v, f.embedding_action());
    }
    assert!(nonzero >= 3);
}

#[test]
fn constants_generate_nothing() {
    let g = geometry(4, 0);
    let mut one = Form::zero(4, 0, Levels { x: 0, y: 0 });
    let e = FMono::parse("1", 'x').unwrap();
    one.add_term((e, e), &Scalar::one());
    let one = one.raise_to(g.levels);
    assert!(!one.is_zero());
    assert!(one.dbar().is_zero());
    assert!(one.contact_action().is_zero());
}

#[test]
fn conjugation_is_an_involution_between_opposite_weights() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, k) in [(4, -2), (5, 1)] {
        let g = geometry(n, k);
        let f = random_function(&mut rng, &cache, &g);
        let c = f.conjugate_function().unwrap();
        assert_eq!(c.k, -k);
        assert_in_model(&c, &cache, SpaceKind::Scalar(0));
        assert_eq!(c.conjugate_function().unwrap(), f);
    }
}

#[test]
fn bracket_rejects_inputs_outside_the_flat_kernel() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = geometry(4, -1);
    let a = random_element(&mut rng, &cache, &g, 1, false);
    assert!(!a.flat().is_zero());
    let b = random_element(&mut rng, &cache, &g, 1, true);
    assert!(a.try_bracket(&b).is_err());
    assert!(b.try_bracket(&b).is_ok());
    let z = Form::zero(4, -1, g.levels);
    assert!(z.bracket(&b).is_zero());
}

#[test]
fn tensor_json_round_trips() {
    let cache = FactorCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut t = DeformationTensor::zero(5);
    for k in [-3, 0, 2] {
        t.insert(random_element(&mut rng, &cache, &geometry(5, k), 1, true).scale(&Scalar::new(1, 3))).unwrap();
    }
    let s = t.to_json();
    let back = DeformationTensor::from_json(&s).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.to_json(), s);
}

#[test]
fn tensor_json_errors_are_located() {
    let e = DeformationTensor::from_json("{\"schema_version\": 1, \"n\": 5,\n \"entries\": [}").unwrap_err();
    assert!(e.contains("line 2"), "{e}");
    let bad = r#"{"schema_version":1,"n":5,"entries":[{"weight":-2,"basis":"x0 ; y0","num":1,"den":1}]}"#;
    let e = DeformationTensor::from_json(bad).unwrap_err();
    assert!(e.starts_with("entry 0"), "{e}");
    let bad_n = r#"{"schema_version":1,"n":9,"entries":[]}"#;
    assert!(DeformationTensor::from_json(bad_n).is_err());
}
