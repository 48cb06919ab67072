use std::collections::BTreeMap;
use std::fmt::Write as _;

use lowdisc::heatflow::{
    default_fd_scale, diagnostics, integrate, oracle_check, CollisionStop, FlowDiagnostics,
    FlowOptions, FlowState, OracleConfig,
};
use lowdisc::newman::{analyze as run_analysis, analyze_with_zeros, AnalysisConfig};
use lowdisc::xi::{XiEvaluator, XiOptions};
use lowdisc::zeros::{
    classify_moments, find_zeros, parse_zero_list, positive_sum_below_trigamma, OriginClass,
    ZeroOptions, ZeroTarget,
};
use lowdisc::{enumerate_fundamental, BigReal, FundamentalDiscriminant, Precision};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::cache::{config_hash, ResultCache};
use crate::config::{decimal, discriminant, positive, Failure, Output, RunConfig};
use crate::{AnalyzeArgs, FlowArgs, Format, PlotArgs, ScanArgs};

// Bump when the shape of any cached document changes.
const CACHE_VERSION: &str = "1";

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Object(o) if o.contains_key("stage") => format!(
            "{}: {}",
            o["stage"].as_str().unwrap_or(""),
            o["message"].as_str().unwrap_or("")
        ),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Header plus one row per object; columns follow the first object's keys.
fn objects_to_csv(rows: &[&Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = keys.iter().map(|k| csv_field(&r[k.as_str()])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn has_error(report: &Value) -> bool {
    !report.get("error").map_or(true, Value::is_null)
}

struct AnalysisJob {
    disc: FundamentalDiscriminant,
    cfg: AnalysisConfig,
    zeros: Option<Vec<BigReal>>,
    /// Cache key: every input that can change the report.
    hash: String,
}

impl AnalysisJob {
    fn new(
        disc: FundamentalDiscriminant,
        cfg: AnalysisConfig,
        zeros: Option<(Vec<BigReal>, String)>,
    ) -> Self {
        let zeros_key = zeros.as_ref().map(|(_, text)| config_hash(&[text]));
        let hash = config_hash(&[
            "analyze",
            CACHE_VERSION,
            &disc.neg_d().to_string(),
            &cfg.precision.digits().to_string(),
            &cfg.eps.to_decimal_string(),
            &cfg.tol.to_decimal_string(),
            &format!("{:?}", cfg.zero_count),
            zeros_key.as_deref().unwrap_or("scan"),
        ]);
        AnalysisJob {
            disc,
            cfg,
            zeros: zeros.map(|(g, _)| g),
            hash,
        }
    }

    /// Report JSON text, from the cache when present.
    fn run(self, cache: Option<&ResultCache>) -> Result<String, Failure> {
        let n = self.disc.neg_d();
        if let Some(hit) = cache.and_then(|c| c.get("analyze", n, &self.hash)) {
            return Ok(hit);
        }
        let report = match self.zeros {
            Some(g) => analyze_with_zeros(self.disc, &self.cfg, g),
            None => run_analysis(self.disc, &self.cfg),
        };
        let text = pretty(&report);
        if let Some(c) = cache {
            c.put("analyze", n, &self.hash, &text)?;
        }
        Ok(text)
    }
}

fn analysis_config(rc: &RunConfig, tol: &str, zeros: Option<usize>) -> Result<AnalysisConfig, Failure> {
    if zeros.is_some_and(|n| n < 2) {
        return Err(Failure::Usage("--zeros must be at least 2".into()));
    }
    Ok(AnalysisConfig {
        precision: rc.precision,
        eps: rc.eps.clone(),
        tol: positive("tol", tol, rc.precision)?,
        zero_count: zeros,
    })
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Output, Failure> {
    let rc = RunConfig::from_common(&a.common)?;
    let disc = discriminant(a.disc)?;
    let cfg = analysis_config(&rc, &a.tol, a.zeros)?;
    let zeros = match &a.zeros_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            Some((parse_zero_list(&text, rc.precision)?, text))
        }
        None => None,
    };
    let cache = ResultCache::optional(a.common.cache_dir.as_deref())?;
    let text = AnalysisJob::new(disc, cfg, zeros).run(cache.as_ref())?;
    let report: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("corrupt cache entry: {e}")))?;
    let stdout = match a.format {
        Format::Json => text,
        Format::Csv => objects_to_csv(&[&report]),
    };
    Ok(Output {
        stdout,
        numerical_failure: has_error(&report),
    })
}

#[derive(Serialize)]
struct ScanEntry {
    disc: FundamentalDiscriminant,
    class: Option<OriginClass>,
    /// `−½ Ξ″(0)/Ξ(0) = Σ_{j≥1} γ_j⁻²`.
    zero_square_sum: Option<BigReal>,
    positive_sum_below_trigamma: bool,
    error: Option<String>,
}

fn scan_entry(d: FundamentalDiscriminant, rc: &RunConfig) -> ScanEntry {
    let opts = XiOptions::new(rc.precision).eps(rc.eps.clone()).height(0.0);
    match XiEvaluator::new(d, &opts).and_then(|e| e.moments()) {
        Ok(mp) => ScanEntry {
            disc: d,
            class: Some(classify_moments(&mp)),
            zero_square_sum: Some(mp.zero_square_sum()),
            positive_sum_below_trigamma: positive_sum_below_trigamma(&mp),
            error: None,
        },
        Err(e) => ScanEntry {
            disc: d,
            class: None,
            zero_square_sum: None,
            positive_sum_below_trigamma: false,
            error: Some(e.to_string()),
        },
    }
}

fn scan_one(
    d: FundamentalDiscriminant,
    rc: &RunConfig,
    full: Option<&AnalysisConfig>,
    cache: Option<&ResultCache>,
) -> Result<Value, Failure> {
    let hash = config_hash(&[
        "scan",
        CACHE_VERSION,
        &d.neg_d().to_string(),
        &rc.precision.digits().to_string(),
        &rc.eps.to_decimal_string(),
    ]);
    let text = match cache.and_then(|c| c.get("scan", d.neg_d(), &hash)) {
        Some(hit) => hit,
        None => {
            let text = pretty(&scan_entry(d, rc));
            if let Some(c) = cache {
                c.put("scan", d.neg_d(), &hash, &text)?;
            }
            text
        }
    };
    let mut entry: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("corrupt cache entry: {e}")))?;
    if let Some(cfg) = full {
        let report = AnalysisJob::new(d, cfg.clone(), None).run(cache)?;
        entry["report"] = serde_json::from_str(&report)
            .map_err(|e| Failure::Usage(format!("corrupt cache entry: {e}")))?;
    }
    Ok(entry)
}

#[derive(Serialize)]
struct ScanSummary {
    lo: i64,
    hi: i64,
    count: usize,
    classes: BTreeMap<String, usize>,
    positive_local_min: usize,
    /// Count under the convention `Σ_{j≥1} γ_j⁻² < ¼ψ′(3/4)`.
    positive_sum_below_trigamma: usize,
    low: Option<usize>,
    best_lambda: Option<String>,
    failures: usize,
    entries: Vec<Value>,
}

pub fn scan(a: &ScanArgs) -> Result<Output, Failure> {
    if a.lo > a.hi || a.hi >= 0 {
        return Err(Failure::Usage(format!(
            "need --lo <= --hi < 0, got [{}, {}]",
            a.lo, a.hi
        )));
    }
    let rc = RunConfig::from_common(&a.common)?;
    let full = if a.full {
        Some(analysis_config(&rc, &a.tol, None)?)
    } else {
        None
    };
    let discs = enumerate_fundamental(a.lo, a.hi)?;
    let cache = ResultCache::optional(a.common.cache_dir.as_deref())?;
    // Indexed parallel collect keeps discriminant order.
    let entries: Vec<Value> = discs
        .par_iter()
        .map(|&d| scan_one(d, &rc, full.as_ref(), cache.as_ref()))
        .collect::<Result<_, _>>()?;

    let mut classes = BTreeMap::new();
    let mut failures = 0;
    let mut low = 0;
    let mut best: Option<(f64, String)> = None;
    for e in &entries {
        match e["class"].as_str() {
            Some(c) => *classes.entry(c.to_string()).or_insert(0) += 1,
            None => failures += 1,
        }
        if let Some(r) = e.get("report") {
            failures += usize::from(has_error(r));
            low += usize::from(r["is_low"].as_bool() == Some(true));
            if let Some(l) = r["lambda"].as_str() {
                let v: f64 = l.parse().unwrap_or(f64::NEG_INFINITY);
                if best.as_ref().map_or(true, |(b, _)| v > *b) {
                    best = Some((v, l.to_string()));
                }
            }
        }
    }
    let summary = ScanSummary {
        lo: a.lo,
        hi: a.hi,
        count: entries.len(),
        positive_local_min: classes
            .get(&OriginClass::PositiveLocalMin.to_string())
            .copied()
            .unwrap_or(0),
        classes,
        positive_sum_below_trigamma: entries
            .iter()
            .filter(|e| e["positive_sum_below_trigamma"].as_bool() == Some(true))
            .count(),
        low: a.full.then_some(low),
        best_lambda: best.map(|(_, s)| s),
        failures,
        entries,
    };
    let stdout = match a.format {
        Format::Json => pretty(&summary),
        Format::Csv => {
            let flat: Vec<Value> = summary
                .entries
                .iter()
                .map(|e| {
                    let mut row = e.clone();
                    if let Some(r) = row.as_object_mut().and_then(|o| o.remove("report")) {
                        for k in ["lambda", "is_low"] {
                            row[k] = r[k].clone();
                        }
                    }
                    row
                })
                .collect();
            objects_to_csv(&flat.iter().collect::<Vec<_>>())
        }
    };
    Ok(Output {
        stdout,
        numerical_failure: summary.failures > 0,
    })
}

/// `n` uniformly spaced times from 0 to `t_end` inclusive; just `t_end` for
/// `n = 1`.
fn sample_times(t_end: &BigReal, n: usize) -> Vec<BigReal> {
    if n == 1 {
        return vec![t_end.clone()];
    }
    (0..n)
        .map(|k| t_end * k as i64 / (n as i64 - 1))
        .collect()
}

#[derive(Serialize)]
struct FlowDocument {
    disc: FundamentalDiscriminant,
    m: usize,
    t_end: BigReal,
    tol: BigReal,
    steps: usize,
    rejected: usize,
    samples: Vec<FlowState>,
    diagnostics: Vec<Option<FlowDiagnostics>>,
    collision: Option<CollisionStop>,
}

#[derive(Serialize)]
struct OracleDocument {
    disc: FundamentalDiscriminant,
    m: usize,
    all_ok: bool,
    max_gap: f64,
    rows: Vec<lowdisc::heatflow::OracleRow>,
}

pub fn flow(a: &FlowArgs) -> Result<Output, Failure> {
    let rc = RunConfig::from_common(&a.common)?;
    let p = rc.precision;
    let disc = discriminant(a.disc)?;
    if a.m == 0 {
        return Err(Failure::Usage("--m must be at least 1".into()));
    }
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let t_end = decimal("t-end", &a.t_end, p)?;
    let tol = positive("tol", &a.tol, p)?;
    let times = sample_times(&t_end, a.samples);

    if a.oracle_check {
        let cfg = OracleConfig {
            precision: p,
            eps: rc.eps.clone(),
            tol: tol.clone(),
            ..OracleConfig::new(p)
        };
        let rep = oracle_check(disc, a.m, &times, &cfg)?;
        let all_ok = rep.all_ok();
        let max_gap = rep
            .rows
            .iter()
            .flat_map(|r| r.gaps.iter().copied())
            .fold(0.0, f64::max);
        let doc = OracleDocument {
            disc,
            m: a.m,
            all_ok,
            max_gap,
            rows: rep.rows,
        };
        return Ok(Output {
            stdout: pretty(&doc),
            numerical_failure: !all_ok,
        });
    }

    let zo = ZeroOptions {
        precision: p,
        eps: rc.eps.clone(),
        tol: tol.clone(),
        target: ZeroTarget::Count(a.m),
    };
    let seeds = find_zeros(disc, &zo)?;
    let s0 = FlowState::new(BigReal::zero(p), seeds.gammas)?;
    let mut opts = FlowOptions::new(tol.clone());
    opts.samples = times;
    let tr = integrate(&s0, &t_end, &opts)?;

    let collided = tr.collision.is_some();
    if a.format == Format::Csv && !collided {
        return Ok(Output {
            stdout: tr.to_csv(),
            numerical_failure: false,
        });
    }
    let diags = tr
        .samples
        .iter()
        .map(|s| diagnostics(s, &default_fd_scale(s, &tol), &tol).ok())
        .collect();
    let doc = FlowDocument {
        disc,
        m: a.m,
        t_end,
        tol,
        steps: tr.steps,
        rejected: tr.rejected,
        samples: tr.samples,
        diagnostics: diags,
        collision: tr.collision,
    };
    Ok(Output {
        stdout: pretty(&doc),
        numerical_failure: collided,
    })
}

pub fn plotdata(a: &PlotArgs) -> Result<Output, Failure> {
    let rc = RunConfig::from_common(&a.common)?;
    let p: Precision = rc.precision;
    let disc = discriminant(a.disc)?;
    let lo = decimal("lo", &a.lo, p)?;
    let hi = decimal("hi", &a.hi, p)?;
    if lo > hi {
        return Err(Failure::Usage("need --lo <= --hi".into()));
    }
    let n = a.samples;
    if n == 0 || (n == 1 && lo != hi) {
        return Err(Failure::Usage(
            "--samples must be at least 2 for a non-degenerate range".into(),
        ));
    }
    let height = lo.abs().to_f64().max(hi.abs().to_f64());
    let e = XiEvaluator::new(disc, &XiOptions::new(p).eps(rc.eps.clone()).height(height))?;
    // `(lo·(n−1−k) + hi·k)/(n−1)` maps k ↦ n−1−k to exact negation when
    // lo = −hi, so symmetric grids stay symmetric after rounding.
    let last = n as i64 - 1;
    let xs: Vec<BigReal> = (0..n as i64)
        .map(|k| {
            if last == 0 {
                lo.clone()
            } else {
                (&lo * (last - k) + &hi * k) / last
            }
        })
        .collect();
    let zs: Vec<BigReal> = xs
        .par_iter()
        .map(|x| e.z_value(x))
        .collect::<lowdisc::Result<_>>()?;
    let mut out = String::from("t,Z\n");
    for (x, z) in xs.iter().zip(&zs) {
        writeln!(out, "{},{}", x.to_decimal_string(), z.to_decimal_string()).expect("string write");
    }
    Ok(Output {
        stdout: out,
        numerical_failure: false,
    })
}
