//! Verdict orchestration, record persistence, and CSV emission.

use crate::config::{ConfigError, ResolvedConfig, RunConfig};
use fockbench_core::criteria::{
    classify_special, sample_criterion_field, verdict_theorem1, verdict_theorem2, Outcome,
    Route, TransformKind, Verdict,
};
use fockbench_core::fock::{
    fock_norm, littlewood_paley_rhs, normalized_kernel, Exponent, FockFunction, Norm,
};
use fockbench_core::operators::{
    apply, compactness_probe, doubling_radii, empirical_norm, NormLowerBound, OperatorKind,
    ProbeOutcome, SymbolPair,
};
use fockbench_core::quad::{QuadError, QuadOptions};
use fockbench_core::symbol::EntireExpr;
use fockbench_core::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Hard process outcomes mapped to exit codes: config errors exit 1,
/// numeric failures exit 2.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] QuadError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numeric(_) => 2,
            RunError::Io(_) => 2,
        }
    }
}

/// Default quadrature options per use: norms at 1e-7, transforms at 1e-5.
pub fn norm_opts(cfg: &ResolvedConfig) -> QuadOptions {
    QuadOptions::with_tol(cfg.tol.unwrap_or(1e-7))
}

pub fn transform_opts(cfg: &ResolvedConfig) -> QuadOptions {
    QuadOptions::with_tol(cfg.tol.unwrap_or(1e-5))
}

/// Cross-checks attached to every verdict record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossChecks {
    pub empirical: EmpiricalRecord,
    pub probe: ProbeRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EmpiricalRecord {
    #[serde(rename = "lower-bound")]
    LowerBound { bound: f64, witness: String },
    #[serde(rename = "diverges")]
    Diverges { witness: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProbeRecord {
    #[serde(rename = "table")]
    Table { radii: Vec<f64>, norms: Vec<f64>, decaying: bool },
    #[serde(rename = "diverges")]
    Diverges { radius: f64 },
}

/// The persisted result of one `verdict` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub verdict: Verdict,
    pub cross_checks: Option<CrossChecks>,
    pub tool_version: String,
    pub wall_time_ms: f64,
}

/// Evaluates the configured operator's verdict: special classification
/// first, then the theorem route matching the exponents, with empirical
/// cross-checks attached.
pub fn run_verdict(cfg: &ResolvedConfig) -> Result<RunRecord, RunError> {
    let start = std::time::Instant::now();
    let op = cfg.op.ok_or_else(|| ConfigError::new("verdict needs an operator tag".into()))?;
    let pair = cfg
        .pair
        .clone()
        .ok_or_else(|| ConfigError::new("verdict needs symbol g".into()))?;
    let opts = transform_opts(cfg);

    let verdict = match classify_special(op, &pair, &cfg.params) {
        Some(v) => v,
        None => theorem_route(op, &pair, cfg, &opts)?,
    };

    let cross_checks = match op {
        OperatorKind::Vg | OperatorKind::VgPsi | OperatorKind::CgPsi
            if verdict.bounded == Outcome::Inconclusive =>
        {
            None
        }
        _ => Some(cross_check(op, &pair, cfg, &opts)?),
    };

    Ok(RunRecord {
        config: cfg.raw.clone(),
        verdict,
        cross_checks,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn theorem_route(
    op: OperatorKind,
    pair: &SymbolPair,
    cfg: &ResolvedConfig,
    opts: &QuadOptions,
) -> Result<Verdict, RunError> {
    // The theorems govern the companion pair operators; J_g and M_g reduce
    // to the pair form with the identity symbol (Corollary 1 ties M_g to
    // J_g), V-side operators without a special rule stay inconclusive.
    let (route_op, route_pair) = match op {
        OperatorKind::JgPair | OperatorKind::CgPair => (op, pair.clone()),
        OperatorKind::Jg | OperatorKind::Mg => (
            OperatorKind::JgPair,
            SymbolPair::with_identity(pair.g.clone()),
        ),
        OperatorKind::Vg | OperatorKind::VgPsi | OperatorKind::CgPsi => {
            let route = if cfg.params.small_into_large() {
                Route::Theorem1
            } else {
                Route::Theorem2
            };
            let mut v = Verdict {
                route,
                bounded: Outcome::Inconclusive,
                compact: Outcome::Inconclusive,
                diagnostics: Default::default(),
            };
            v.diagnostics.put("outside_implemented_theory", 1.0);
            return Ok(v);
        }
    };
    let verdict = if cfg.params.small_into_large() {
        verdict_theorem1(route_op, &route_pair, &cfg.params, opts)?
    } else {
        verdict_theorem2(route_op, &route_pair, &cfg.params, opts)?
    };
    Ok(verdict)
}

fn cross_check(
    op: OperatorKind,
    pair: &SymbolPair,
    cfg: &ResolvedConfig,
    opts: &QuadOptions,
) -> Result<CrossChecks, RunError> {
    let family = cfg.grid.family();
    let empirical = match empirical_norm(op, pair, &cfg.params, &family, opts)? {
        NormLowerBound::Finite { bound, witness, .. } => {
            EmpiricalRecord::LowerBound { bound, witness }
        }
        NormLowerBound::Diverges { witness } => EmpiricalRecord::Diverges { witness },
    };
    let probe = match compactness_probe(op, pair, &cfg.params, &doubling_radii(2.0, 4), opts)? {
        ProbeOutcome::Decay { radii, norms, decaying } => {
            ProbeRecord::Table { radii, norms, decaying }
        }
        ProbeOutcome::Diverges { radius } => ProbeRecord::Diverges { radius },
    };
    Ok(CrossChecks { empirical, probe })
}

/// Canonical JSON for records: pretty-printed with stable field order, so
/// identical configs reproduce byte-identical bytes apart from the wall
/// time.
pub fn record_json(record: &RunRecord) -> String {
    let mut text = serde_json::to_string_pretty(record).expect("record serialization");
    text.push('\n');
    text
}

pub fn write_record(record: &RunRecord, out_dir: &Path) -> Result<std::path::PathBuf, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.json", record.config.id));
    std::fs::write(&path, record_json(record))?;
    Ok(path)
}

/// Emits the verdict's criterion field as CSV (`re,im,value`, 17
/// significant digits).
pub fn write_field_csv(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Option<std::path::PathBuf>, RunError> {
    let Some(op) = cfg.op else { return Ok(None) };
    let Some(pair) = &cfg.pair else {
        return Ok(None);
    };
    let which = match (op, cfg.params.q.is_infinite()) {
        (OperatorKind::JgPair | OperatorKind::Jg | OperatorKind::Mg, true) => {
            TransformKind::MGPsi
        }
        (OperatorKind::JgPair | OperatorKind::Jg | OperatorKind::Mg, false) => TransformKind::BG,
        (OperatorKind::CgPair, true) => TransformKind::MGPsiPsi,
        (OperatorKind::CgPair, false) => TransformKind::BGPsi,
        _ => return Ok(None),
    };
    let field = sample_criterion_field(
        which,
        pair,
        &cfg.params,
        cfg.grid.w_radius,
        cfg.grid.radii,
        cfg.grid.angles,
        cfg.raw.disc_radius.unwrap_or(1.0),
        &transform_opts(cfg),
    )?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}-field.csv", cfg.raw.id));
    std::fs::write(&path, field_csv(&field.field.samples))?;
    Ok(Some(path))
}

pub fn field_csv(samples: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("re,im,value\n");
    for (re, im, value) in samples {
        out.push_str(&format!("{re:.16e},{im:.16e},{value:.16e}\n"));
    }
    out
}

/// One row of the suite summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub id: String,
    pub status: String,
    pub route: Option<Route>,
    pub bounded: Option<Outcome>,
    pub compact: Option<Outcome>,
    pub key_diagnostic: Option<f64>,
}

/// Runs every config in the corpus with per-case isolation; failures mark
/// their row and do not abort the suite. Returns the rows (sorted by id)
/// and the process exit code.
pub fn run_suite(corpus: &[RunConfig], out_dir: &Path) -> (Vec<SummaryRow>, i32) {
    use rayon::prelude::*;
    let mut rows: Vec<SummaryRow> = corpus
        .par_iter()
        .map(|raw| {
            let resolved = match raw.resolve() {
                Err(e) => {
                    return SummaryRow {
                        id: raw.id.clone(),
                        status: format!("config-error: {}", e.message),
                        route: None,
                        bounded: None,
                        compact: None,
                        key_diagnostic: None,
                    }
                }
                Ok(r) => r,
            };
            match run_verdict(&resolved) {
                Err(e) => SummaryRow {
                    id: raw.id.clone(),
                    status: match e {
                        RunError::Config(_) => format!("config-error: {e}"),
                        _ => format!("numeric-error: {e}"),
                    },
                    route: None,
                    bounded: None,
                    compact: None,
                    key_diagnostic: None,
                },
                Ok(record) => {
                    let _ = write_record(&record, out_dir);
                    let key = record
                        .verdict
                        .diagnostics
                        .named
                        .get("m_sup")
                        .or_else(|| record.verdict.diagnostics.named.get("b_grid_sup"))
                        .or_else(|| record.verdict.diagnostics.named.get("b_integral"))
                        .copied();
                    SummaryRow {
                        id: raw.id.clone(),
                        status: "ok".into(),
                        route: Some(record.verdict.route),
                        bounded: Some(record.verdict.bounded),
                        compact: Some(record.verdict.compact),
                        key_diagnostic: key,
                    }
                }
            }
        })
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let exit = if rows.iter().any(|r| r.status.starts_with("numeric-error")) {
        2
    } else if rows.iter().any(|r| r.status.starts_with("config-error")) {
        1
    } else {
        0
    };
    (rows, exit)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("id,status,route,bounded,compact,key_diagnostic\n");
    for row in rows {
        let fmt_opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let route = row.route.map(|r| serde_plain(&r));
        let bounded = row.bounded.map(|o| serde_plain(&o));
        let compact = row.compact.map(|o| serde_plain(&o));
        let key = row.key_diagnostic.map(|v| format!("{v:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.id,
            row.status.replace(',', ";"),
            fmt_opt(&route),
            fmt_opt(&bounded),
            fmt_opt(&compact),
            key
        ));
    }
    out
}

fn serde_plain<T: Serialize >(value: &T) -> String {
    serde_json::to_string(value).unwrap().trim_matches('"').to_string()
}

// --- norm / apply / lp-verify ----------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormReport {
    pub f: String,
    pub p: String,
    pub alpha: f64,
    pub norm: Option<f64>,
    pub attained: Option<bool>,
    pub diverges: bool,
}

pub fn run_norm(cfg: &ResolvedConfig) -> Result<NormReport, RunError> {
    let expr = cfg
        .f
        .clone()
        .ok_or_else(|| ConfigError::new("norm needs field `f`".into()))?;
    let f = FockFunction::new(expr, cfg.params.alpha);
    let norm = fock_norm(&f, cfg.params.p, &norm_opts(cfg))?;
    Ok(match norm {
        Norm::Finite { value, attained } => NormReport {
            f: cfg.raw.f.clone().unwrap(),
            p: cfg.params.p.to_string(),
            alpha: cfg.params.alpha,
            norm: Some(value),
            attained: Some(attained),
            diverges: false,
        },
        Norm::Diverges => NormReport {
            f: cfg.raw.f.clone().unwrap(),
            p: cfg.params.p.to_string(),
            alpha: cfg.params.alpha,
            norm: None,
            attained: None,
            diverges: true,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApplyReport {
    pub op: String,
    pub z: [f64; 2],
    pub value: [f64; 2],
}

pub fn run_apply(cfg: &ResolvedConfig) -> Result<ApplyReport, RunError> {
    let op = cfg.op.ok_or_else(|| ConfigError::new("apply needs an operator tag".into()))?;
    let pair = cfg
        .pair
        .clone()
        .ok_or_else(|| ConfigError::new("apply needs symbol g".into()))?;
    let expr = cfg
        .f
        .clone()
        .ok_or_else(|| ConfigError::new("apply needs field `f`".into()))?;
    let z = cfg
        .raw
        .z
        .ok_or_else(|| ConfigError::new("apply needs point `z`".into()))?;
    let f = FockFunction::new(expr, cfg.params.alpha);
    let value = apply(
        op,
        &pair,
        &f,
        Complex64::new(z[0], z[1]),
        &QuadOptions::with_tol(cfg.tol.unwrap_or(1e-10)),
    )?;
    Ok(ApplyReport { op: op.tag().into(), z, value: [value.re, value.im] })
}

/// Littlewood–Paley window report: RHS/LHS ratios over the standard family
/// and the resulting window constants, at base and once-refined grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaleyReport {
    pub p: String,
    pub alpha: f64,
    pub ratios: Vec<(String, f64)>,
    pub window: (f64, f64),
    pub window_refined: (f64, f64),
}

pub fn run_lp_verify(cfg: &ResolvedConfig) -> Result<Vec<PaleyReport>, RunError> {
    let alpha = cfg.params.alpha;
    let family: Vec<(String, EntireExpr)> = {
        let mut v: Vec<(String, EntireExpr)> = ["1", "z", "z^2", "exp(0.2*z^2)"]
            .iter()
            .map(|t| (t.to_string(), EntireExpr::parse(t).unwrap()))
            .collect();
        for k in 0..5 {
            let w = Complex64::from_polar(1.0 + k as f64, 0.9 * k as f64);
            v.push((
                format!("k({:.3},{:.3})", w.re, w.im),
                normalized_kernel(w, alpha).expr,
            ));
        }
        v
    };
    let mut reports = Vec::new();
    for p in [Exponent::finite(1.0), Exponent::finite(2.0), Exponent::Infinity] {
        let base_opts = norm_opts(cfg);
        let windows: Result<Vec<(Vec<(String, f64)>, (f64, f64))>, RunError> =
            [base_opts, base_opts.refined_once()]
                .iter()
                .map(|opts| {
                    let mut ratios = Vec::new();
                    let mut lo = f64::INFINITY;
                    let mut hi = 0.0f64;
                    for (label, expr) in &family {
                        let f = FockFunction::new(expr.clone(), alpha);
                        let lhs = fock_norm(&f, p, opts)?
                            .value()
                            .ok_or(QuadError::NoConvergence { refinements: 0, last_delta: 0.0 })?;
                        let rhs = littlewood_paley_rhs(&f, p, opts)?
                            .value()
                            .ok_or(QuadError::NoConvergence { refinements: 0, last_delta: 0.0 })?;
                        let ratio = rhs / lhs;
                        lo = lo.min(ratio);
                        hi = hi.max(ratio);
                        ratios.push((label.clone(), ratio));
                    }
                    Ok((ratios, (lo, hi)))
                })
                .collect();
        let windows = windows?;
        reports.push(PaleyReport {
            p: p.to_string(),
            alpha,
            ratios: windows[0].0.clone(),
            window: windows[0].1,
            window_refined: windows[1].1,
        });
    }
    Ok(reports)
}

/// Lattice invariant check over the standard radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeCheck {
    pub r: f64,
    pub nodes: usize,
    pub covering_ok: bool,
    pub min_distance: f64,
    pub max_overlap: usize,
}

pub fn run_lattice_check(probes: usize) -> Vec<LatticeCheck> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| {
            let r_lattice = 8.0;
            let lat = fockbench_core::lattice::make_lattice(r, r_lattice);
            let mut rng = StdRng::seed_from_u64(2024);
            let mut covering_ok = true;
            let mut max_overlap = 0;
            for _ in 0..probes {
                let radius = (r_lattice - r) * rng.gen::<f64>().sqrt();
                let angle = std::f64::consts::TAU * rng.gen::<f64>();
                let z = Complex64::from_polar(radius, angle);
                if lat.nearest_distance(z) >= r {
                    covering_ok = false;
                }
                max_overlap = max_overlap.max(lat.overlap_count(z));
            }
            LatticeCheck {
                r,
                nodes: lat.points.len(),
                covering_ok,
                min_distance: lat.min_pairwise_distance(),
                max_overlap,
            }
        })
        .collect()
}
