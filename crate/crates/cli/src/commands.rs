use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crobs::bott::{self, BundleSpec};
use crobs::crx::{CrxError, DeformationTensor, SCHEMA_VERSION};
use crobs::kuranishi::{self, ChartOptions, KuranishiError, RightInverse};
use crobs::obstruction::{self, Dim7Report, ObstructionError};

use crate::config::{Format, RunConfig};
use crate::table;

/// What a command prints and the process exit status.
pub struct Outcome {
    pub out: String,
    pub code: i32,
}

/// A failed command: message and exit status.
#[derive(Debug)]
pub struct Failure {
    pub msg: String,
    pub code: i32,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { msg: msg.into(), code: 2 }
    }
}

impl From<CrxError> for Failure {
    fn from(e: CrxError) -> Self {
        let code = match e {
            CrxError::BadDimension(_) | CrxError::BadCutoff(_) | CrxError::NotInModel(_) => 2,
            CrxError::Unstable(_) => 3,
            CrxError::Mismatch(_) => 1,
        };
        Failure { msg: e.to_string(), code }
    }
}

impl From<ObstructionError> for Failure {
    fn from(e: ObstructionError) -> Self {
        let code = match &e {
            ObstructionError::Crx(c) => return c.clone().into(),
            ObstructionError::Unstable { .. } => 3,
            ObstructionError::OutOfRange { .. }
            | ObstructionError::NotClosed(_)
            | ObstructionError::WrongDimension { .. }
            | ObstructionError::PositiveWeight(_)
            | ObstructionError::NotDimensionSeven => 2,
            _ => 1,
        };
        Failure { msg: e.to_string(), code }
    }
}

impl From<KuranishiError> for Failure {
    fn from(e: KuranishiError) -> Self {
        let code = match &e {
            KuranishiError::Crx(c) => return c.clone().into(),
            KuranishiError::Obstructed { .. } => 1,
            _ => 2,
        };
        Failure { msg: e.to_string(), code }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct CohomologyRow {
    pub m: usize,
    pub bundle: &'static str,
    pub twist: i64,
    pub q: usize,
    pub bott: usize,
    pub cech: usize,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Serialize)]
struct CohomologyReport {
    schema_version: u32,
    rows: Vec<CohomologyRow>,
    all_match: bool,
}

/// Factors `P^0 .. P^{min(n-1, 4)}`, line and tangent bundles, twists in range.
pub fn cohomology_rows(cfg: &RunConfig) -> Result<Vec<CohomologyRow>, Failure> {
    let mut rows = Vec::new();
    for m in 0..=(cfg.n - 1).min(4) {
        for (name, tangent) in [("O", false), ("T", true)] {
            if tangent && m == 0 {
                continue;
            }
            for k in cfg.kmin..=cfg.kmax {
                let spec = if tangent { BundleSpec::tangent(&[m], &[k]) } else { BundleSpec::line(&[m], &[k]) };
                let closed = bott::table(&spec).map_err(|e| Failure { msg: e.to_string(), code: 1 })?;
                let oracle = bott::oracle_table(&spec).map_err(|e| Failure { msg: e.to_string(), code: 1 })?;
                for q in 0..=m {
                    let (b, c) = (closed.get(q as i64), oracle.get(q as i64));
                    rows.push(CohomologyRow { m, bundle: name, twist: k, q, bott: b, cech: c, matched: b == c });
                }
            }
        }
    }
    Ok(rows)
}

pub fn cohomology(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let rows = cohomology_rows(cfg)?;
    let all_match = rows.iter().all(|r| r.matched);
    let out = match cfg.format {
        Format::Json => json(&CohomologyReport { schema_version: SCHEMA_VERSION, rows, all_match }),
        Format::Table => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        format!("P^{} {}({})", r.m, r.bundle, r.twist),
                        r.q.to_string(),
                        r.bott.to_string(),
                        r.cech.to_string(),
                        if r.matched { "ok" } else { "MISMATCH" }.to_string(),
                    ]
                })
                .collect();
            table::render(&["bundle", "q", "bott", "cech", ""], &body)
        }
    };
    Ok(Outcome { out, code: if all_match { 0 } else { 1 } })
}

#[derive(Serialize)]
struct ObstructionOutput {
    #[serde(flatten)]
    report: obstruction::ObstructionReport,
    tail_sums: Vec<(i64, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension_seven: Option<Dim7Report>,
}

/// Pairs of negative weights for the bracket check, inside the range.
pub fn dim7_pairs(kmin: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for k2 in (kmin..=-2).rev() {
        for k1 in (kmin..=k2).rev() {
            if k1 + k2 >= kmin {
                out.push((k1, k2));
            }
        }
    }
    out
}

pub fn obstructions(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let ctx = cfg.context();
    let report = obstruction::obstruction_report(&ctx, cfg.n, cfg.kmin, cfg.kmax, cfg.start_cutoff())?;
    let dimension_seven = if cfg.n == 4 {
        let pairs = dim7_pairs(cfg.kmin);
        Some(obstruction::dim7_analysis(&ctx, cfg.kmin, cfg.kmax, cfg.start_cutoff(), &pairs, cfg.seed)?)
    } else {
        None
    };
    let ok = report.all_match() && dimension_seven.as_ref().is_none_or(|d| d.passed());
    let tail_sums = report.tail_sums();
    let out = match cfg.format {
        Format::Json => json(&ObstructionOutput { report, tail_sums, dimension_seven }),
        Format::Table => {
            let body: Vec<Vec<String>> = report
                .weights
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        r.h1_ext.to_string(),
                        r.h2.to_string(),
                        r.w_closed.map_or("-".into(), |w| w.to_string()),
                        r.w_linear.to_string(),
                        if r.matched { "ok" } else { "MISMATCH" }.to_string(),
                    ]
                })
                .collect();
            let mut s = format!("n = {}\n", cfg.n);
            s.push_str(&table::render(&["k", "h1_ext", "h2", "W closed", "W linear", ""], &body));
            if !tail_sums.is_empty() {
                let sums: Vec<String> = tail_sums.iter().map(|(k, s)| format!("{k}:{s}")).collect();
                s.push_str(&format!("sum_(k=K)^(-2) dim W_k: {}\n", sums.join(" ")));
            }
            if let Some(d) = &dimension_seven {
                s.push_str(&format!(
                    "dimension 7: h1 on k >= 0 {}, h2 on k <= 0 {}, brackets exact {}/{}\n",
                    if d.h1_concentrated() { "vanishes" } else { "NONZERO" },
                    if d.h2_concentrated() { "vanishes" } else { "NONZERO" },
                    d.brackets.iter().filter(|b| b.exact).count(),
                    d.brackets.len()
                ));
                let pos: Vec<String> = d.h2_positive.iter().map(|(k, h)| format!("{k}:{h}")).collect();
                s.push_str(&format!("dimension 7: h2 on k > 0 {}\n", pos.join(" ")));
            }
            s
        }
    };
    Ok(Outcome { out, code: if ok { 0 } else { 1 } })
}

pub fn read_tensor(cfg: &RunConfig) -> Result<DeformationTensor, Failure> {
    let path = cfg.input.as_ref().ok_or_else(|| Failure::usage("--input is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    DeformationTensor::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn classify(cfg: &RunConfig, n_given: bool) -> Result<Outcome, Failure> {
    let dt = read_tensor(cfg)?;
    if n_given && dt.n != cfg.n {
        return Err(Failure::usage(format!("input is for n={}, but --n {} was given", dt.n, cfg.n)));
    }
    let ctx = cfg.context();
    let v = obstruction::classify(&ctx, &dt, dt.n, cfg.kmin, cfg.kmax, cfg.start_cutoff())?;
    let out = match cfg.format {
        Format::Json => json(&v),
        Format::Table => {
            let mut s = format!(
                "n = {}\nfillable_N  {}\nfillable_M  {}{}\nstable      {}\n",
                v.n,
                v.fillable_n,
                v.fillable_m,
                if v.fillable_m_theorem_backed { "" } else { " (criterion only)" },
                v.stable
            );
            for (name, f) in [("residual", &v.residuals), ("positive residual", &v.positive_residuals), ("weight-0 residual", &v.weight_zero_residual)] {
                if f.entries.is_empty() {
                    continue;
                }
                let body: Vec<Vec<String>> = f
                    .entries
                    .iter()
                    .map(|e| vec![e.weight.to_string(), e.basis.clone(), e.num.to_string(), e.den.to_string()])
                    .collect();
                s.push_str(&format!("{name}:\n"));
                s.push_str(&table::render(&["k", "basis", "num", "den"], &body));
            }
            s
        }
    };
    Ok(Outcome { out, code: if v.fillable_n { 0 } else { 1 } })
}

#[derive(Serialize)]
struct KuranishiOutput {
    #[serde(flatten)]
    series: crobs::SeriesFile,
    integrable_through_order: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction: Option<crobs::TensorFile>,
}

pub fn kuranishi(cfg: &RunConfig, negative_representative: bool) -> Result<Outcome, Failure> {
    let ctx = cfg.context();
    let cache = ctx.cache().clone();
    let seed = if cfg.input.is_some() {
        read_tensor(cfg)?
    } else {
        let weights: Vec<i64> = [-1, 1].into_iter().filter(|k| (cfg.kmin..=cfg.kmax).contains(k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        kuranishi::sample_seed(&mut rng, &cache, cfg.n, &weights, 1)?
    };
    let p = RightInverse::new(Arc::clone(&cache), 1);
    let opts = ChartOptions { kmin: cfg.kmin, kmax: cfg.kmax, negative_representative, ..ChartOptions::default() };
    let series = kuranishi::chart_phi(&p, &seed, cfg.order, &opts)?;
    let ok = kuranishi::is_integrable_to(&series, cfg.order)?;
    let out = match cfg.format {
        Format::Json => json(&KuranishiOutput {
            series: series.to_file(),
            integrable_through_order: ok,
            correction: series.correction.as_ref().map(|c| c.to_file()),
        }),
        Format::Table => {
            let body: Vec<Vec<String>> = (1..=series.order())
                .map(|i| {
                    let t = series.term(i);
                    let ws: Vec<String> = t.weights().iter().map(i64::to_string).collect();
                    let terms: usize = t.coeffs.values().map(|f| f.terms.len()).sum();
                    vec![i.to_string(), ws.join(","), terms.to_string()]
                })
                .collect();
            let mut s = format!("n = {}\n", cfg.n);
            s.push_str(&table::render(&["order", "weights", "terms"], &body));
            s.push_str(&format!("integrable through order {}: {ok}\n", cfg.order));
            s
        }
    };
    Ok(Outcome { out, code: if ok { 0 } else { 1 } })
}
