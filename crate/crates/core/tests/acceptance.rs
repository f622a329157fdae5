//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails
//! if any criterion failed.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crobs::bott::{self, BundleSpec};
use crobs::cech;
use crobs::crx::{DeformationTensor, Form};
use crobs::kuranishi::{self, ChartOptions, FormalSeries, RightInverse};
use crobs::obstruction::{self, Context};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bott_vs_cech() -> Outcome {
    let mut rows = 0;
    for m in 0..=4usize {
        for tangent in [false, true] {
            if tangent && m == 0 {
                continue;
            }
            for k in -6..=6 {
                let spec = if tangent { BundleSpec::tangent(&[m], &[k]) } else { BundleSpec::line(&[m], &[k]) };
                let closed = bott::table(&spec).map_err(err)?;
                let oracle = bott::oracle_table(&spec).map_err(err)?;
                for q in 0..=m as i64 {
                    rows += 1;
                    ensure(closed.get(q) == oracle.get(q), || {
                        format!("P^{m} {}({k}) q={q}: bott {} cech {}", if tangent { "T" } else { "O" }, closed.get(q), oracle.get(q))
                    })?;
                }
            }
        }
    }
    for m in 2..=4usize {
        let t = bott::oracle_table(&BundleSpec::tangent(&[m], &[-(m as i64) - 1])).map_err(err)?;
        ensure(t.get(m as i64 - 1) == 1, || format!("h^{}(P^{m}, T({})) = {}", m - 1, -(m as i64) - 1, t.get(m as i64 - 1)))?;
    }
    Ok(format!("{rows} entries agree, exceptional class present for n = 2, 3, 4"))
}

fn h2_vanishing(ctx: &Context) -> Outcome {
    for n in [3, 5, 6] {
        for k in -6..=6 {
            let c = obstruction::h2_check(ctx, n, k, 0).map_err(err)?;
            ensure(c.h2 == 0, || format!("dim H^2 = {} at n={n} k={k}", c.h2))?;
        }
    }
    let c = obstruction::h2_check(ctx, 5, 4, 0).map_err(err)?;
    ensure(c.ambient == 5, || format!("ambient H^2 at n=5 k=4 is {}", c.ambient))?;
    ensure(c.contraction_rank == Some(5) && c.contraction_target == Some(5), || format!("contraction {c:?}"))?;
    let factor = cech::contraction_rank(&BundleSpec::tangent(&[3], &[-4]), 2).map_err(err)?;
    ensure((factor.source, factor.target, factor.rank) == (1, 1, 1), || format!("factor contraction {factor:?}"))?;
    Ok("39 weights, contraction bijective at n=5 k=4".into())
}

fn w_values(ctx: &Context) -> Outcome {
    let w = |n, k| obstruction::w_dim_linear(ctx, n, k, 0).map_err(err);
    let mut bad = Vec::new();
    for n in 2..=6 {
        for k in [0, -1] {
            if w(n, k)? != 0 {
                bad.push(format!("W_{k} != 0 at n={n}"));
            }
        }
        for k in -6..-1 {
            let d = w(n, k)?;
            if obstruction::w_dim_closed(n, k).map_err(err)? != d {
                bad.push(format!("closed form disagrees at n={n} k={k}"));
            }
            if d == 0 {
                bad.push(format!("W_{k} = 0 at n={n}"));
            }
        }
    }
    for n in 4..=6 {
        for k in 0..=6 {
            if w(n, k)? != 0 {
                bad.push(format!("W_{k} != 0 at n={n}"));
            }
        }
    }
    let (a, b) = (w(5, -2)?, w(5, -3)?);
    if (a, b) != (70, 280) {
        bad.push(format!("n=5: W_-2 = {a}, W_-3 = {b}"));
    }
    if bad.is_empty() {
        Ok("W_-2 = 70, W_-3 = 280 at n=5".into())
    } else {
        Err(bad.join("; "))
    }
}

fn dimension_seven(ctx: &Context) -> Outcome {
    let mut pairs = Vec::new();
    for k2 in (-6..=-2).rev() {
        for k1 in (-6..=k2).rev() {
            if k1 + k2 >= -6 {
                pairs.push((k1, k2));
            }
        }
    }
    let r = obstruction::dim7_analysis(ctx, -6, 6, 0, &pairs, 1).map_err(err)?;
    ensure(r.h1_nonnegative.len() == 7 && r.h1_concentrated(), || format!("H^1 on k >= 0: {:?}", r.h1_nonnegative))?;
    ensure(r.h2_nonpositive.len() == 7 && r.h2_concentrated(), || format!("H^2 on k <= 0: {:?}", r.h2_nonpositive))?;
    ensure(!r.brackets.is_empty() && r.brackets_exact(), || format!("brackets {:?}", r.brackets))?;
    let nonzero = r.brackets.iter().filter(|b| b.bracket_nonzero).count();
    Ok(format!("{} brackets exact ({nonzero} nonzero)", r.brackets.len()))
}

fn truncate(s: &FormalSeries, m: usize) -> FormalSeries {
    FormalSeries { n: s.n, terms: s.terms[..m].to_vec(), correction: None }
}

fn nonnegative(t: &DeformationTensor) -> bool {
    t.weights().iter().all(|k| *k >= 0)
}

fn kuranishi_suite() -> Outcome {
    let opts = ChartOptions::default();
    let mut runs = 0;
    for n in [3, 5] {
        let cache = Arc::new(crobs::crx::FactorCache::new());
        let p = RightInverse::new(cache.clone(), 1);
        for s in 0..20u64 {
            let weights: &[i64] = if s % 2 == 0 { &[-1, 1] } else { &[0, 1] };
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * n as u64 + s);
            let seed = kuranishi::sample_seed(&mut rng, &cache, n, weights, 1).map_err(err)?;
            ensure(!seed.is_zero(), || format!("n={n} seed {s} is zero"))?;
            let series = kuranishi::chart_phi(&p, &seed, 4, &opts).map_err(err)?;
            ensure(kuranishi::is_integrable_to(&series, 4).map_err(err)?, || format!("n={n} seed {s}: nonzero residual"))?;
            let back = kuranishi::inverse_chart_series(&p, &truncate(&series, 3)).map_err(err)?;
            ensure(back.term(1) == &seed && back.term(2).is_zero() && back.term(3).is_zero(), || {
                format!("n={n} seed {s}: round trip fails")
            })?;
            if weights[0] >= 0 {
                ensure(series.weights().iter().all(|k| *k >= 0), || format!("n={n} seed {s}: chart leaves k >= 0"))?;
                let graded = kuranishi::inverse_chart_series(&p, &series).map_err(err)?;
                ensure(graded.weights().iter().all(|k| *k >= 0), || format!("n={n} seed {s}: graded inverse leaves k >= 0"))?;
                // the full inverse brackets the whole sum; order 2 is what n = 5 affords
                let upto = if n == 3 { 4 } else { 2 };
                let full = kuranishi::inverse_chart(&p, &series.partial_sum(upto)).map_err(err)?;
                ensure(nonnegative(&full), || format!("n={n} seed {s}: inverse chart leaves k >= 0"))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} seeds integrable through order 4"))
}

fn example(name: &str) -> Result<DeformationTensor, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples").join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    DeformationTensor::from_json(&text).map_err(err)
}

/// Exit status of `crobs classify`.
fn exit_code(fillable_n: bool) -> i32 {
    if fillable_n {
        0
    } else {
        1
    }
}

fn classifier(ctx: &Context) -> Outcome {
    let expected = [("zero.json", true, 0), ("w3_obstructed.json", false, 1), ("gauge_trivial.json", true, 0)];
    for (name, fillable, code) in expected {
        let dt = example(name)?;
        let v = obstruction::classify(ctx, &dt, dt.n, -6, 6, 0).map_err(err)?;
        ensure(v.fillable_n == fillable && exit_code(v.fillable_n) == code, || format!("{name}: fillable_N = {}", v.fillable_n))?;
    }
    let dt = example("w3_obstructed.json")?;
    let base = obstruction::classify(ctx, &dt, dt.n, -6, 6, 0).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..5 {
        let fs: Vec<Form> = [-4, -3, -2, 1, 3]
            .iter()
            .map(|&k| obstruction::random_function(&mut rng, ctx.cache(), dt.n, k, 2))
            .collect();
        let moved = obstruction::add_contact(&dt, &fs).map_err(err)?;
        ensure(moved != dt, || format!("trial {trial}: gauge move is trivial"))?;
        let v = obstruction::classify(ctx, &moved, dt.n, -6, 6, 0).map_err(err)?;
        ensure(v == base, || format!("trial {trial}: verdict changed under a gauge move"))?;
    }
    Ok("3 bundled files, 5 gauge moves".into())
}

fn tail_sums(ctx: &Context) -> Outcome {
    for n in 2..=6 {
        let mut prev = obstruction::w_dim_linear(ctx, n, -2, 0).map_err(err)?;
        for k in (-6..=-3).rev() {
            let acc = prev + obstruction::w_dim_linear(ctx, n, k, 0).map_err(err)?;
            ensure(acc > prev, || format!("n={n}: sum stalls at K={k}"))?;
            prev = acc;
        }
    }
    Ok("strictly increasing for n = 2..6".into())
}

#[test]
fn acceptance() {
    let ctx = Context::new();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        ("Bott vs Cech on P^0..P^4", Some(Duration::from_secs(120)), Box::new(bott_vs_cech)),
        ("H^2 vanishing for n = 3, 5, 6", None, Box::new(|| h2_vanishing(&ctx))),
        ("obstruction spaces W_k", None, Box::new(|| w_values(&ctx))),
        ("dimension seven", None, Box::new(|| dimension_seven(&ctx))),
        ("Kuranishi recursion", Some(Duration::from_secs(300)), Box::new(kuranishi_suite)),
        ("classifier and gauge invariance", None, Box::new(|| classifier(&ctx))),
        ("tail sums of dim W_k", None, Box::new(|| tail_sums(&ctx))),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if took > *limit {
                result = Err(format!("took {took:.1?}, limit {limit:?}"));
            }
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        println!("criterion {}: {tag} [{:.1} s] {name}: {detail}", i + 1, took.as_secs_f64());
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
