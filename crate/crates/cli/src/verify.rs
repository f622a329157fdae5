use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crobs::crx::{random_form, DeformationTensor, Form, Geometry, Levels, SCHEMA_VERSION};
use crobs::kuranishi::{self, ChartOptions, RightInverse};
use crobs::obstruction::{self, Context};

use crate::commands::{cohomology_rows, dim7_pairs, Failure};
use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Group {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub n: usize,
    pub kmin: i64,
    pub kmax: i64,
    pub seed: u64,
    pub groups: Vec<Group>,
    pub passed: bool,
}

/// Collects checks; the first failure's message is kept.
struct Tally {
    checked: usize,
    detail: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checked: 0, detail: None }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.detail.is_none() {
            self.detail = Some(msg());
        }
    }

    fn fail(&mut self, msg: String) {
        self.check(false, || msg);
    }

    fn finish(self, name: &'static str) -> Group {
        Group { name, passed: self.detail.is_none(), checked: self.checked, detail: self.detail }
    }
}

fn geometry(n: usize, k: i64) -> Geometry {
    Geometry { n, k, levels: Levels::for_weight(n - 2, k, 0) }
}

fn bott_cech(cfg: &RunConfig) -> Group {
    let mut t = Tally::new();
    match cohomology_rows(cfg) {
        Ok(rows) => {
            for r in rows {
                t.check(r.matched, || format!("P^{} {}({}) q={}: bott {} cech {}", r.m, r.bundle, r.twist, r.q, r.bott, r.cech));
            }
        }
        Err(Failure { msg, .. }) => t.fail(msg),
    }
    t.finish("bott-cech")
}

fn complexes(cfg: &RunConfig, ctx: &Context) -> Group {
    let mut t = Tally::new();
    for k in cfg.kmin..=cfg.kmax {
        match ctx.complex(cfg.n, k, cfg.start_cutoff()) {
            Ok(wc) => t.check(wc.diagnostics.identities, || format!("k={k}: operator identities fail")),
            Err(e) => t.fail(format!("k={k}: {e}")),
        }
    }
    t.finish("complex")
}

fn bracket_pairs(cfg: &RunConfig) -> Vec<(i64, i64)> {
    let inside = |k: i64| (cfg.kmin..=cfg.kmax).contains(&k);
    [(-1, -2), (-1, -1), (0, -2), (-1, 1), (1, 1)]
        .into_iter()
        .filter(|&(a, b)| inside(a) && inside(b) && inside(a + b))
        .collect()
}

/// Graded symmetry and closure of the bracket, and the Leibniz rule.
fn bracket(cfg: &RunConfig, ctx: &Context) -> (Group, Group) {
    let cache = ctx.cache();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut sym, mut leib) = (Tally::new(), Tally::new());
    for (k1, k2) in bracket_pairs(cfg) {
        for _ in 0..2 {
            let a = random_form(&mut rng, cache, &geometry(cfg.n, k1), 1, true);
            let b = random_form(&mut rng, cache, &geometry(cfg.n, k2), 1, true);
            let ab = a.bracket(&b);
            sym.check(b.bracket(&a) == ab, || format!("[b, a] != [a, b] at weights ({k1}, {k2})"));
            sym.check(ab.flat().is_zero(), || format!("flat [a, b] != 0 at weights ({k1}, {k2})"));
            let rhs = a.dbar_h().bracket(&b).sub(&a.bracket(&b.dbar_h())).expect("same weight");
            leib.check(ab.dbar_h() == rhs, || format!("Leibniz fails at weights ({k1}, {k2})"));
        }
    }
    (sym.finish("bracket-symmetry"), leib.finish("leibniz"))
}

fn w_dims(cfg: &RunConfig, ctx: &Context) -> (Group, Group) {
    let (mut dims, mut vanish) = (Tally::new(), Tally::new());
    for k in cfg.kmin..=cfg.kmax {
        let wc = match ctx.complex(cfg.n, k, cfg.start_cutoff()) {
            Ok(wc) => wc,
            Err(e) => {
                dims.fail(format!("k={k}: {e}"));
                continue;
            }
        };
        let w = wc.dims.w;
        if k <= 0 {
            if let Err(e) = obstruction::w_space(&wc) {
                dims.fail(e.to_string());
            } else {
                dims.check(true, String::new);
            }
        }
        if k == 0 || k == -1 {
            vanish.check(w == 0, || format!("W_{k} = {w}, expected 0"));
        } else if k < -1 {
            vanish.check(w > 0, || format!("W_{k} = 0 at n={}", cfg.n));
        } else if cfg.n >= 4 {
            vanish.check(w == 0, || format!("W_{k} = {w} at n={}, expected 0", cfg.n));
        }
    }
    (dims.finish("w-closed-form"), vanish.finish("w-vanishing"))
}

fn h2(cfg: &RunConfig, ctx: &Context) -> Group {
    let mut t = Tally::new();
    for k in cfg.kmin..=cfg.kmax {
        match obstruction::h2_check(ctx, cfg.n, k, cfg.start_cutoff()) {
            Ok(c) => t.check(c.h2 == 0, || format!("H^2 at k={k} has dim {}", c.h2)),
            Err(e) => t.fail(format!("k={k}: {e}")),
        }
    }
    t.finish("h2-vanishing")
}

fn dimension_seven(cfg: &RunConfig, ctx: &Context) -> Group {
    let mut t = Tally::new();
    match obstruction::dim7_analysis(ctx, cfg.kmin, cfg.kmax, cfg.start_cutoff(), &dim7_pairs(cfg.kmin), cfg.seed) {
        Ok(r) => {
            t.check(r.h1_concentrated(), || format!("H^1 on k >= 0: {:?}", r.h1_nonnegative));
            t.check(r.h2_concentrated(), || format!("H^2 on k <= 0: {:?}", r.h2_nonpositive));
            for b in &r.brackets {
                t.check(b.exact, || format!("bracket at ({}, {}) not exact", b.k1, b.k2));
            }
        }
        Err(e) => t.fail(e.to_string()),
    }
    t.finish("dimension-seven")
}

fn kuranishi_suite(cfg: &RunConfig, ctx: &Context) -> Group {
    let mut t = Tally::new();
    let cache = ctx.cache().clone();
    let p = RightInverse::new(Arc::clone(&cache), 1);
    let opts = ChartOptions { kmin: cfg.kmin, kmax: cfg.kmax, ..ChartOptions::default() };
    // in dimension 7 only nonpositive weights avoid H^2
    let mixed: &[i64] = if cfg.n == 4 { &[-1, 0] } else { &[-1, 1] };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut run = |t: &mut Tally, weights: &[i64], order: usize| -> Option<(DeformationTensor, kuranishi::FormalSeries)> {
        let seed = match kuranishi::sample_seed(&mut rng, &cache, cfg.n, weights, 1) {
            Ok(s) => s,
            Err(e) => {
                t.fail(e.to_string());
                return None;
            }
        };
        match kuranishi::chart_phi(&p, &seed, order, &opts) {
            Ok(s) => Some((seed, s)),
            Err(e) => {
                t.fail(format!("seed weights {weights:?}: {e}"));
                None
            }
        }
    };
    for _ in 0..2 {
        if let Some((_, s)) = run(&mut t, mixed, cfg.order) {
            let ok = kuranishi::is_integrable_to(&s, cfg.order).unwrap_or(false);
            t.check(ok, || format!("nonzero integrability residual through order {}", cfg.order));
        }
    }
    let m = cfg.order.min(3);
    if let Some((seed, s)) = run(&mut t, mixed, m) {
        match kuranishi::inverse_chart_series(&p, &s) {
            Ok(back) => {
                let ok = back.term(1) == &seed && (2..=m).all(|i| back.term(i).is_zero());
                t.check(ok, || format!("inverse chart is not the identity through order {m}"));
            }
            Err(e) => t.fail(e.to_string()),
        }
    }
    if cfg.kmin <= 0 {
        let m = if cfg.n == 4 { m.min(2) } else { m };
        if let Some((_, s)) = run(&mut t, &[0, 1], m) {
            t.check(s.weights().iter().all(|k| *k >= 0), || "chart leaves nonnegative weights".into());
            let back = kuranishi::inverse_chart_series(&p, &s)
                .and_then(|g| Ok((g, kuranishi::inverse_chart(&p, &s.partial_sum(2))?)));
            match back {
                Ok((g, full)) => {
                    let ok = g.weights().iter().chain(&full.weights()).all(|k| *k >= 0);
                    t.check(ok, || "inverse chart leaves nonnegative weights".into());
                }
                Err(e) => t.fail(e.to_string()),
            }
        }
    }
    t.finish("kuranishi")
}

fn gauge(cfg: &RunConfig, ctx: &Context) -> Group {
    let mut t = Tally::new();
    let n = cfg.n;
    let start = cfg.start_cutoff();
    let mut w_vec = None;
    for k in (cfg.kmin..=cfg.kmax.min(-2)).rev() {
        let basis = ctx.complex(n, k, start).map_err(|e| e.to_string()).and_then(|wc| {
            obstruction::w_space(&wc).and_then(|ws| ws.basis(1)).map_err(|e| e.to_string())
        });
        match basis {
            Ok(b) if !b.is_empty() => {
                w_vec = Some(b[0].clone());
                break;
            }
            Ok(_) => {}
            Err(e) => t.fail(e),
        }
    }
    let base = w_vec.map(DeformationTensor::from_form).unwrap_or_else(|| DeformationTensor::zero(n));
    let verdict = match obstruction::classify(ctx, &base, n, cfg.kmin, cfg.kmax, start) {
        Ok(v) => v,
        Err(e) => {
            t.fail(e.to_string());
            return t.finish("gauge-invariance");
        }
    };
    t.check(verdict.stable == (verdict.fillable_n && verdict.fillable_m), || "stable != fillable_N and fillable_M".into());
    t.check(verdict.fillable_n == verdict.residuals.entries.is_empty(), || "residual does not certify the verdict".into());
    let weights: Vec<i64> = [-3, -2, 1, 2].into_iter().filter(|k| (cfg.kmin..=cfg.kmax).contains(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..2 {
        let fs: Vec<Form> = weights.iter().map(|&k| obstruction::random_function(&mut rng, ctx.cache(), n, k, 2)).collect();
        let run = obstruction::add_contact(&base, &fs)
            .and_then(|moved| obstruction::classify(ctx, &moved, n, cfg.kmin, cfg.kmax, start))
            .and_then(|v| {
                let pure = obstruction::add_contact(&DeformationTensor::zero(n), &fs)?;
                Ok((v, obstruction::classify(ctx, &pure, n, cfg.kmin, cfg.kmax, start)?))
            });
        match run {
            Ok((moved, pure)) => {
                t.check(moved == verdict, || "verdict changed under a contact term".into());
                t.check(pure.fillable_n, || "contact image classified as not fillable".into());
            }
            Err(e) => t.fail(e.to_string()),
        }
    }
    t.finish("gauge-invariance")
}

pub fn run(cfg: &RunConfig, inject_fault: bool) -> VerifyReport {
    crobs::crx::set_bracket_fault(inject_fault);
    let ctx = cfg.context();
    let mut groups = vec![bott_cech(cfg), complexes(cfg, &ctx)];
    let (sym, leib) = bracket(cfg, &ctx);
    groups.extend([sym, leib]);
    let (dims, vanish) = w_dims(cfg, &ctx);
    groups.extend([dims, vanish]);
    if cfg.n == 4 {
        groups.push(dimension_seven(cfg, &ctx));
    } else {
        groups.push(h2(cfg, &ctx));
    }
    groups.push(kuranishi_suite(cfg, &ctx));
    groups.push(gauge(cfg, &ctx));
    let passed = groups.iter().all(|g| g.passed);
    VerifyReport { schema_version: SCHEMA_VERSION, n: cfg.n, kmin: cfg.kmin, kmax: cfg.kmax, seed: cfg.seed, groups, passed }
}
