//! The characterizing transforms (`P_psi`, `Q_g`, `M`, Berezin-type `B`)
//! and the boundedness/compactness verdict engines.
//!
//! Verdicts follow two disciplines. Numeric routes always produce
//! *evidence* outcomes: the characterizations hold up to unspecified
//! constants, so a grid supremum or a decay table can support but never
//! prove a claim. Analytic fast paths for recognized symbol classes
//! (gauss-poly `g`, affine `psi`) decide the criterion by the sign of the
//! leading exponent and do return exact outcomes.

use crate::envelope::GrowthEnvelope;
use crate::fock::{Exponent, FockParams};
use crate::quad::{
    plane_integrate, sup_field, QuadError, QuadOptions, TailCertificate,
};
use crate::symbol::{EntireExpr, SymbolClass};
use crate::operators::{OperatorKind, SymbolPair};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// pointwise transforms
// ---------------------------------------------------------------------------

/// `P_psi(z) = e^{(alpha/2)(|psi(z)|^2 - |z|^2)} / (1 + |z|)`, exponent
/// assembled before the single `exp`.
pub fn eval_p_psi(pair: &SymbolPair, alpha: f64, z: Complex64) -> f64 {
    let psi_z = pair.psi.eval(z);
    (0.5 * alpha * (psi_z.norm_sqr() - z.norm_sqr()) - z.norm().ln_1p()).exp()
}

/// `Q_g(z) = |g(z)| e^{-alpha |z|^2 / 2} / (1 + |z|)`.
pub fn eval_q_g(pair: &SymbolPair, alpha: f64, z: Complex64) -> f64 {
    (pair.g.log_abs(z) - 0.5 * alpha * z.norm_sqr() - z.norm().ln_1p()).exp()
}

/// Which symbol weights the `M` / `B` transforms: the plain `g` (the
/// `J_{(g,psi)}` criterion) or the composed `g(psi)` (the `C_{(g,psi)}`
/// criterion, where the chain rule contributes `psi'` to `B`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolSide {
    Plain,
    Composed,
}

impl SymbolSide {
    pub fn for_operator(op: OperatorKind) -> Option<SymbolSide> {
        match op {
            OperatorKind::JgPair | OperatorKind::Jg => Some(SymbolSide::Plain),
            OperatorKind::CgPair => Some(SymbolSide::Composed),
            _ => None,
        }
    }
}

/// `M_{(g,psi)}(z) = |g(z)| (1+|psi(z)|) P_psi(z)` or its composed variant
/// with `|g(psi(z))|`.
pub fn eval_m(pair: &SymbolPair, alpha: f64, z: Complex64, side: SymbolSide) -> f64 {
    let psi_z = pair.psi.eval(z);
    let log_g = match side {
        SymbolSide::Plain => pair.g.log_abs(z),
        SymbolSide::Composed => pair.g.log_abs(psi_z),
    };
    (log_g + psi_z.norm().ln_1p() + 0.5 * alpha * (psi_z.norm_sqr() - z.norm_sqr())
        - z.norm().ln_1p())
    .exp()
}

/// A Berezin-transform value; absence of a Gaussian certificate for the
/// integrand is a first-class outcome, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BValue {
    Value(f64),
    DivergesOrUnknown,
}

impl BValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            BValue::Value(v) => Some(*v),
            BValue::DivergesOrUnknown => None,
        }
    }
}

/// The generalized Berezin transform
/// `B(w) = int |k_w(psi(z))|^q ((1+|w|) W(z))^q dm(z)` with
/// `W = Q_g` (plain) or `|psi'| Q_{g(psi)}` (composed). Kernel moduli are
/// assembled in log space.
pub fn berezin_b(
    pair: &SymbolPair,
    q: f64,
    alpha: f64,
    w: Complex64,
    side: SymbolSide,
    opts: &QuadOptions,
) -> Result<BValue, QuadError> {
    assert!(q > 0.0 && q.is_finite());
    let Some(cert) = berezin_certificate(pair, q, alpha, w, side) else {
        return Ok(BValue::DivergesOrUnknown);
    };
    let psi = pair.psi.clone();
    let g = pair.g.clone();
    let psi_prime = pair.psi.differentiate();
    let w_conj = w.conj();
    let log_pref = w.norm().ln_1p();
    let half_alpha = 0.5 * alpha;
    let integrand = move |z: Complex64| {
        let psi_z = psi.eval(z);
        let log_kernel = alpha * (psi_z * w_conj).re - half_alpha * w.norm_sqr();
        let log_weight = match side {
            SymbolSide::Plain => g.log_abs(z),
            SymbolSide::Composed => g.log_abs(psi_z) + psi_prime.log_abs(z),
        } - half_alpha * z.norm_sqr()
            - z.norm().ln_1p();
        (q * (log_kernel + log_pref + log_weight)).exp()
    };
    Ok(BValue::Value(plane_integrate(integrand, &cert, opts)?.value))
}

fn berezin_certificate(
    pair: &SymbolPair,
    q: f64,
    alpha: f64,
    w: Complex64,
    side: SymbolSide,
) -> Option<TailCertificate> {
    let kernel = crate::fock::normalized_kernel(w, alpha).expr;
    let kernel_env = GrowthEnvelope::of(&kernel.compose(&pair.psi))?;
    let weight_env = match side {
        SymbolSide::Plain => GrowthEnvelope::of(&pair.g)?,
        SymbolSide::Composed => GrowthEnvelope::of(&pair.g.compose(&pair.psi))?
            .product(&GrowthEnvelope::of(&pair.psi.differentiate())?),
    };
    let mut env = kernel_env.product(&weight_env).power(q);
    env.log_a += q * w.norm().ln_1p();
    env.certificate(0.5 * alpha * q)
}

// ---------------------------------------------------------------------------
// verdicts
// ---------------------------------------------------------------------------

/// How a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "theorem1")]
    Theorem1,
    #[serde(rename = "theorem2")]
    Theorem2,
    #[serde(rename = "corollary1")]
    Corollary1,
    #[serde(rename = "vg-degree-rule")]
    VgDegreeRule,
    #[serde(rename = "psi-inadmissible")]
    PsiInadmissible,
}

/// Outcome of one criterion question. Exactness is reserved for analytic
/// fast paths over classified symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "exact-positive")]
    ExactPositive,
    #[serde(rename = "positive-evidence")]
    PositiveEvidence,
    #[serde(rename = "exact-negative")]
    ExactNegative,
    #[serde(rename = "negative-evidence")]
    NegativeEvidence,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Outcome {
    pub fn positive(&self) -> bool {
        matches!(self, Outcome::ExactPositive | Outcome::PositiveEvidence)
    }

    pub fn negative(&self) -> bool {
        matches!(self, Outcome::ExactNegative | Outcome::NegativeEvidence)
    }

    pub fn exact(&self) -> bool {
        matches!(self, Outcome::ExactPositive | Outcome::ExactNegative)
    }
}

/// Named numbers and decay/growth tables backing a verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub named: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Vec<(f64, f64)>>,
}

impl Diagnostics {
    pub fn put(&mut self, key: &str, value: f64) {
        self.named.insert(key.to_string(), value);
    }

    pub fn table(&mut self, key: &str, rows: Vec<(f64, f64)>) {
        self.tables.insert(key.to_string(), rows);
    }
}

/// The result of evaluating a criterion: answers to both questions plus
/// the diagnostics that justify them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub route: Route,
    pub bounded: Outcome,
    pub compact: Outcome,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    fn exact(route: Route, bounded: Outcome, compact: Outcome) -> Self {
        Verdict { route, bounded, compact, diagnostics: Diagnostics::default() }
    }
}

/// Probe radii pinned for "vanishing at infinity": `2 * 2^n`, `n = 0..=5`.
pub const DECAY_RADII: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Growth-table radii (the decay radii plus a unit-radius lead-in).
pub const PROBE_RADII: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

fn decays_ten_fold(rows: &[(f64, f64)]) -> bool {
    let sub: Vec<f64> = rows
        .iter()
        .filter(|(r, _)| DECAY_RADII.contains(r))
        .map(|(_, v)| *v)
        .collect();
    if sub.is_empty() {
        return false;
    }
    let first = sub[0];
    let last = sub[sub.len() - 1];
    sub.iter().all(|v| *v < 1e-30) || (first >= 10.0 * last && first > 0.0)
}

fn grows_ten_fold(rows: &[(f64, f64)]) -> bool {
    match (rows.first(), rows.last()) {
        (Some((_, first)), Some((_, last))) => *last >= 10.0 * *first && *last > 0.0,
        _ => false,
    }
}

// --- analytic classification of the sup-norm criterion ---------------------

/// What the leading exponents prove about `M` for classified symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
enum MAnalytic {
    /// Strictly negative leading exponent: `M -> 0`; bounded and compact.
    DecaysToZero { margin: f64 },
    /// Provably unbounded along some ray.
    Unbounded { margin: f64 },
    /// Bounded with a nonzero limit along the critical rays: not compact
    /// (the escape `|psi(z)| -> inf` does happen).
    BoundedPositiveLimit,
    /// Bounded and `psi` constant, so the compactness limit is vacuous.
    BoundedVacuous,
}

/// Gauss-poly data of a symbol when its class carries one.
fn gauss_poly_parts(expr: &EntireExpr) -> Option<(Vec<Complex64>, Complex64, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    match expr.class() {
        SymbolClass::Constant(c) => Some((vec![*c], zero, zero)),
        SymbolClass::Polynomial(coeffs) => Some((coeffs.clone(), zero, zero)),
        SymbolClass::GaussPoly { poly, c2, c1, .. } => Some((poly.clone(), *c2, *c1)),
        _ => None,
    }
}

/// Exact ray analysis of
/// `M(z) = |g_eff(z)| (1+|psi(z)|) e^{(alpha/2)(|psi z|^2 - |z|^2)} / (1+|z|)`
/// for gauss-poly `g_eff` and affine `psi = a z + b`. The quadratic
/// exponent along the ray `theta` is
/// `Re(c2 e^{2 i theta}) + (alpha/2)(|a|^2 - 1)`, maximized at
/// `L = |c2| + (alpha/2)(|a|^2 - 1)`; on maximizing rays the linear term is
/// `Re((c1 + alpha a conj(b)) e^{i theta})`.
fn analytic_m(g_eff: &EntireExpr, psi: &EntireExpr, alpha: f64) -> Option<MAnalytic> {
    let (poly, c2, c1) = gauss_poly_parts(g_eff)?;
    let (a, b) = affine_coeffs(psi)?;
    let leading = c2.norm() + 0.5 * alpha * (a.norm_sqr() - 1.0);
    if leading < 0.0 {
        return Some(MAnalytic::DecaysToZero { margin: -leading });
    }
    if leading > 0.0 {
        return Some(MAnalytic::Unbounded { margin: leading });
    }
    let v = c1 + alpha * a * b.conj();
    let degree = poly.len() - 1;
    let critical_linear = if c2.norm() == 0.0 {
        // every ray is critical
        v.norm()
    } else {
        // e^{2 i theta*} = conj(c2)/|c2|
        let u = (c2.conj() / c2.norm()).sqrt();
        (v * u).re.abs()
    };
    if critical_linear > 0.0 {
        return Some(MAnalytic::Unbounded { margin: critical_linear });
    }
    if degree >= 1 {
        return Some(MAnalytic::Unbounded { margin: degree as f64 });
    }
    if a.norm() == 0.0 {
        Some(MAnalytic::BoundedVacuous)
    } else {
        Some(MAnalytic::BoundedPositiveLimit)
    }
}

/// Affine coefficients `(a, b)` of `psi = a z + b` when classified so.
pub fn affine_coeffs(psi: &EntireExpr) -> Option<(Complex64, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    match psi.class() {
        SymbolClass::Zero => Some((zero, zero)),
        SymbolClass::Constant(c) => Some((zero, *c)),
        SymbolClass::Polynomial(coeffs) if coeffs.len() == 2 => Some((coeffs[1], coeffs[0])),
        _ => None,
    }
}

fn m_certificate(
    pair: &SymbolPair,
    side: SymbolSide,
    alpha: f64,
) -> Option<TailCertificate> {
    let g_eff = match side {
        SymbolSide::Plain => pair.g.clone(),
        SymbolSide::Composed => pair.g.compose(&pair.psi),
    };
    let env_g = GrowthEnvelope::of(&g_eff)?;
    let env_psi_plus = GrowthEnvelope::of(&pair.psi)?.add_constant(0.0);
    let (a, b) = affine_coeffs(&pair.psi)?;
    let env_exp = GrowthEnvelope {
        log_a: 0.5 * alpha * b.norm_sqr(),
        k: 0.0,
        b: alpha * a.norm() * b.norm(),
        rho: 0.5 * alpha * a.norm_sqr(),
    };
    env_g.product(&env_psi_plus).product(&env_exp).certificate(0.5 * alpha)
}

fn g_effective(pair: &SymbolPair, side: SymbolSide) -> EntireExpr {
    match side {
        SymbolSide::Plain => pair.g.clone(),
        SymbolSide::Composed => pair.g.compose(&pair.psi),
    }
}

/// Max of `M` over circles at the probe radii (64 angles each).
fn m_probe_table(pair: &SymbolPair, alpha: f64, side: SymbolSide) -> Vec<(f64, f64)> {
    DECAY_RADII
        .iter()
        .map(|&radius| {
            let max = (0..64)
                .map(|j| {
                    let z = Complex64::from_polar(
                        radius,
                        std::f64::consts::TAU * (j as f64) / 64.0,
                    );
                    eval_m(pair, alpha, z, side)
                })
                .fold(0.0f64, f64::max);
            (radius, max)
        })
        .collect()
}

/// Theorem-1 verdict (`p <= q`): the sup-norm criterion `M` at `q = inf`,
/// the Berezin criterion `B` at finite `q`. The domain exponent `p` plays
/// no role in the computation; diagnostics are identical across `p`.
pub fn verdict_theorem1(
    op: OperatorKind,
    pair: &SymbolPair,
    params: &FockParams,
    opts: &QuadOptions,
) -> Result<Verdict, QuadError> {
    assert!(
        params.small_into_large(),
        "theorem-1 route requires p <= q"
    );
    let side = SymbolSide::for_operator(op)
        .expect("theorem routes govern the companion operators");
    let g_eff = g_effective(pair, side);
    if g_eff.is_zero() {
        let mut v = Verdict::exact(Route::Theorem1, Outcome::ExactPositive, Outcome::ExactPositive);
        v.diagnostics.put("criterion_sup", 0.0);
        return Ok(v);
    }
    match params.q {
        Exponent::Infinity => verdict_t1_sup(pair, params.alpha, side, opts),
        Exponent::Finite(q) => verdict_t1_berezin(pair, q, params.alpha, side, opts),
    }
}

fn verdict_t1_sup(
    pair: &SymbolPair,
    alpha: f64,
    side: SymbolSide,
    opts: &QuadOptions,
) -> Result<Verdict, QuadError> {
    let g_eff = g_effective(pair, side);
    let analytic = analytic_m(&g_eff, &pair.psi, alpha);
    let cert = m_certificate(pair, side, alpha);
    let mut diagnostics = Diagnostics::default();
    let probe = m_probe_table(pair, alpha, side);
    let probe_finite = probe.iter().all(|(_, v)| v.is_finite());
    diagnostics.table("m_probe_max", probe.clone());
    let psi_constant = matches!(
        pair.psi.class(),
        SymbolClass::Zero | SymbolClass::Constant(_)
    );
    let decaying = psi_constant || decays_ten_fold(&probe);
    diagnostics.put("m_decay_ten_fold", f64::from(u8::from(decaying)));

    if let Some(cert) = cert {
        let field = {
            let pair = pair.clone();
            move |z: Complex64| eval_m(&pair, alpha, z, side)
        };
        let sup = sup_field(field, &cert, 0.25, opts)?;
        diagnostics.put("m_sup", sup.sup);
        diagnostics.put("m_sup_attained", f64::from(u8::from(sup.attained_inside)));
        let (bounded, compact) = match analytic {
            Some(MAnalytic::DecaysToZero { margin }) => {
                diagnostics.put("analytic_exponent_margin", margin);
                (Outcome::ExactPositive, Outcome::ExactPositive)
            }
            _ => {
                let bounded = if sup.sup.is_finite() && sup.attained_inside {
                    Outcome::PositiveEvidence
                } else if sup.sup == f64::INFINITY {
                    Outcome::NegativeEvidence
                } else {
                    Outcome::Inconclusive
                };
                let compact = match bounded {
                    Outcome::PositiveEvidence if decaying => Outcome::PositiveEvidence,
                    Outcome::PositiveEvidence => Outcome::NegativeEvidence,
                    Outcome::Inconclusive => Outcome::Inconclusive,
                    _ => Outcome::NegativeEvidence,
                };
                (bounded, compact)
            }
        };
        return Ok(Verdict { route: Route::Theorem1, bounded, compact, diagnostics });
    }

    // No certificate: decide analytically when possible, otherwise report
    // the divergence evidence.
    match analytic {
        Some(MAnalytic::Unbounded { margin }) => {
            diagnostics.put("analytic_exponent_margin", margin);
            Ok(Verdict {
                route: Route::Theorem1,
                bounded: Outcome::ExactNegative,
                compact: Outcome::ExactNegative,
                diagnostics,
            })
        }
        Some(MAnalytic::BoundedPositiveLimit) => {
            diagnostics.put("m_limit_positive", 1.0);
            Ok(Verdict {
                route: Route::Theorem1,
                bounded: Outcome::ExactPositive,
                compact: Outcome::ExactNegative,
                diagnostics,
            })
        }
        Some(MAnalytic::BoundedVacuous) => Ok(Verdict {
            route: Route::Theorem1,
            bounded: Outcome::ExactPositive,
            compact: Outcome::ExactPositive,
            diagnostics,
        }),
        Some(MAnalytic::DecaysToZero { .. }) | None => {
            // DecaysToZero implies a certificate, so only `None` lands here
            // in practice: growth unknown.
            diagnostics.put("certificate_absent", 1.0);
            let outcome = if probe_finite && !grows_ten_fold(&probe) {
                Outcome::Inconclusive
            } else {
                Outcome::NegativeEvidence
            };
            Ok(Verdict {
                route: Route::Theorem1,
                bounded: outcome,
                compact: outcome,
                diagnostics,
            })
        }
    }
}

/// The Berezin-route grid: 10 radii by 16 angles out to `|w| = 8`.
fn berezin_grid() -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(160);
    for i in 0..10 {
        let r = 8.0 * (i + 1) as f64 / 10.0;
        for j in 0..16 {
            grid.push(Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / 16.0));
        }
    }
    grid
}

/// `B` maxed over four probe directions at each radius.
fn berezin_probe_table(
    pair: &SymbolPair,
    q: f64,
    alpha: f64,
    side: SymbolSide,
    opts: &QuadOptions,
) -> Result<Vec<(f64, Option<f64>)>, QuadError> {
    PROBE_RADII
        .iter()
        .map(|&radius| {
            let four: Result<Vec<BValue>, QuadError> = [0.0, 0.25, 0.5, 0.75]
                .par_iter()
                .map(|&frac| {
                    let w = Complex64::from_polar(radius, std::f64::consts::TAU * frac);
                    berezin_b(pair, q, alpha, w, side, opts)
                })
                .collect();
            let mut worst = Some(0.0f64);
            for v in four? {
                match (v.value(), worst) {
                    (Some(v), Some(acc)) => worst = Some(acc.max(v)),
                    _ => worst = None,
                }
            }
            Ok((radius, worst))
        })
        .collect()
}

fn verdict_t1_berezin(
    pair: &SymbolPair,
    q: f64,
    alpha: f64,
    side: SymbolSide,
    opts: &QuadOptions,
) -> Result<Verdict, QuadError> {
    let mut diagnostics = Diagnostics::default();
    let probes = berezin_probe_table(pair, q, alpha, side, opts)?;
    if let Some((radius, _)) = probes.iter().find(|(_, v)| v.is_none()) {
        diagnostics.put("b_unknown_at_radius", *radius);
        return Ok(Verdict {
            route: Route::Theorem1,
            bounded: Outcome::NegativeEvidence,
            compact: Outcome::NegativeEvidence,
            diagnostics,
        });
    }
    let probe_rows: Vec<(f64, f64)> =
        probes.iter().map(|(r, v)| (*r, v.unwrap())).collect();
    diagnostics.table("b_probe_max", probe_rows.clone());

    let grid = berezin_grid();
    let grid_values: Result<Vec<BValue>, QuadError> = grid
        .par_iter()
        .map(|&w| berezin_b(pair, q, alpha, w, side, opts))
        .collect();
    let mut grid_sup = 0.0f64;
    for v in grid_values? {
        match v.value() {
            Some(v) => grid_sup = grid_sup.max(v),
            None => {
                diagnostics.put("b_unknown_on_grid", 1.0);
                return Ok(Verdict {
                    route: Route::Theorem1,
                    bounded: Outcome::NegativeEvidence,
                    compact: Outcome::NegativeEvidence,
                    diagnostics,
                });
            }
        }
    }
    diagnostics.put("b_grid_sup", grid_sup);

    let growing = grows_ten_fold(&probe_rows);
    let decaying = decays_ten_fold(&probe_rows);
    let bounded = if growing {
        Outcome::NegativeEvidence
    } else {
        Outcome::PositiveEvidence
    };
    let compact = if decaying && !growing {
        Outcome::PositiveEvidence
    } else {
        Outcome::NegativeEvidence
    };
    Ok(Verdict { route: Route::Theorem1, bounded, compact, diagnostics })
}

/// Theorem-2 verdict (`q < p`): boundedness and compactness coincide and
/// are governed by `L^s` integrability of `B`, `s = 1` at `p = inf` and
/// `p/(p-q)` otherwise. The integral is certified only through the decay
/// fit of the probes, so outcomes are evidence-grade.
pub fn verdict_theorem2(
    op: OperatorKind,
    pair: &SymbolPair,
    params: &FockParams,
    opts: &QuadOptions,
) -> Result<Verdict, QuadError> {
    assert!(
        !params.small_into_large(),
        "theorem-2 route requires q < p"
    );
    let side = SymbolSide::for_operator(op)
        .expect("theorem routes govern the companion operators");
    let q = params
        .q
        .value()
        .expect("q < p forces a finite target exponent");
    let s = match params.p {
        Exponent::Infinity => 1.0,
        Exponent::Finite(p) => p / (p - q),
    };
    let g_eff = g_effective(pair, side);
    let mut diagnostics = Diagnostics::default();
    diagnostics.put("integrability_exponent", s);
    if g_eff.is_zero() {
        diagnostics.put("b_integral", 0.0);
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::ExactPositive,
            compact: Outcome::ExactPositive,
            diagnostics,
        });
    }

    let probes = berezin_probe_table(pair, q, params.alpha, side, opts)?;
    if let Some((radius, _)) = probes.iter().find(|(_, v)| v.is_none()) {
        diagnostics.put("b_unknown_at_radius", *radius);
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::Inconclusive,
            compact: Outcome::Inconclusive,
            diagnostics,
        });
    }
    let rows: Vec<(f64, f64)> = probes.iter().map(|(r, v)| (*r, v.unwrap())).collect();
    diagnostics.table("b_probe_max", rows.clone());

    let all_zero = rows.iter().all(|(_, v)| *v < 1e-30);
    if all_zero {
        diagnostics.put("b_integral", 0.0);
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::PositiveEvidence,
            compact: Outcome::PositiveEvidence,
            diagnostics,
        });
    }

    let growing = grows_ten_fold(&rows);
    let decaying = decays_ten_fold(&rows);
    if growing {
        diagnostics.put("b_growth_detected", 1.0);
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::NegativeEvidence,
            compact: Outcome::NegativeEvidence,
            diagnostics,
        });
    }
    if !decaying {
        // Plateau: the s-th power cannot be integrable over the plane.
        let tail: Vec<f64> = rows.iter().rev().take(3).map(|(_, v)| *v).collect();
        let plateau = tail.iter().copied().fold(f64::INFINITY, f64::min);
        diagnostics.put("b_plateau_level", plateau);
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::NegativeEvidence,
            compact: Outcome::NegativeEvidence,
            diagnostics,
        });
    }

    // Decay: fit ln B ~ a0 - kappa R^2 on the last three probes to certify
    // the tail, then integrate the radial profile.
    let fit_rows: Vec<(f64, f64)> = rows
        .iter()
        .rev()
        .take(3)
        .filter(|(_, v)| *v > 0.0)
        .map(|(r, v)| (r * r, v.ln()))
        .collect();
    if fit_rows.len() < 2 {
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::Inconclusive,
            compact: Outcome::Inconclusive,
            diagnostics,
        });
    }
    let (kappa, a0) = linear_fit(&fit_rows);
    diagnostics.put("b_decay_rate", -kappa);
    if kappa >= 0.0 {
        return Ok(Verdict {
            route: Route::Theorem2,
            bounded: Outcome::Inconclusive,
            compact: Outcome::Inconclusive,
            diagnostics,
        });
    }
    // Integrate the radial profile only while the fitted decay says the
    // contribution matters; the rest is the fitted tail.
    let r_cut = (30.0 / (s * -kappa)).sqrt().max(4.0);
    let r_max = rows.last().unwrap().0.min(r_cut);
    let radial = |r: f64| -> Result<f64, QuadError> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let b = berezin_b(pair, q, params.alpha, Complex64::new(r, 0.0), side, opts)?;
        Ok(b.value().map_or(f64::NAN, |v| v.powf(s) * r))
    };
    // Composite Simpson on the radial profile; modest node count since the
    // result feeds an order-of-magnitude verdict.
    let n = 32usize;
    let h = r_max / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let a = k as f64 * h;
        acc += h / 6.0
            * (radial(a)? + 4.0 * radial(a + 0.5 * h)? + radial(a + h)?);
    }
    let bulk = std::f64::consts::TAU * acc;
    let tail = std::f64::consts::PI / (s * (-kappa))
        * (s * (a0 + kappa * r_max * r_max)).exp();
    let integral = bulk + tail;
    diagnostics.put("b_integral", integral);
    diagnostics.put("b_integral_tail", tail);
    let outcome = if integral.is_finite() {
        Outcome::PositiveEvidence
    } else {
        Outcome::Inconclusive
    };
    Ok(Verdict {
        route: Route::Theorem2,
        bounded: outcome,
        compact: outcome,
        diagnostics,
    })
}

/// Least squares `y = a0 + slope * x`; returns `(slope, a0)`.
fn linear_fit(rows: &[(f64, f64)]) -> (f64, f64) {
    let n = rows.len() as f64;
    let sx: f64 = rows.iter().map(|(x, _)| x).sum();
    let sy: f64 = rows.iter().map(|(_, y)| y).sum();
    let sxx: f64 = rows.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = rows.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

// ---------------------------------------------------------------------------
// exact fast paths
// ---------------------------------------------------------------------------

/// Exact verdicts for recognized configurations: the `psi = z` reductions
/// (Corollary-1 rule for `J_g`/`M_g`, degree rule for `V_g`), the `V_g`
/// degree rule itself, and the affinity requirement on `psi` for the
/// sup-norm criterion. `None` falls through to the numeric routes.
pub fn classify_special(
    op: OperatorKind,
    pair: &SymbolPair,
    params: &FockParams,
) -> Option<Verdict> {
    let identity_psi = pair.psi.is_identity();
    match op {
        OperatorKind::Jg | OperatorKind::Mg => corollary1_rule(&pair.g, params),
        OperatorKind::JgPair | OperatorKind::CgPair if identity_psi => {
            corollary1_rule(&pair.g, params)
        }
        OperatorKind::Vg => vg_degree_rule(&pair.g, params),
        OperatorKind::VgPsi | OperatorKind::CgPsi if identity_psi => {
            vg_degree_rule(&pair.g, params)
        }
        OperatorKind::JgPair if params.q.is_infinite() => {
            psi_admissibility_rule(pair)
        }
        _ => None,
    }
}

/// `J_g` (equivalently `M_g`): for `p <= q` bounded iff `g` constant,
/// compact iff `g = 0`; for `q < p` both iff `g = 0`.
fn corollary1_rule(g: &EntireExpr, params: &FockParams) -> Option<Verdict> {
    let mut verdict = match (g.class(), params.small_into_large()) {
        (SymbolClass::Zero, _) => {
            Verdict::exact(Route::Corollary1, Outcome::ExactPositive, Outcome::ExactPositive)
        }
        (SymbolClass::Constant(_), true) => {
            Verdict::exact(Route::Corollary1, Outcome::ExactPositive, Outcome::ExactNegative)
        }
        (SymbolClass::Constant(_), false)
        | (SymbolClass::Polynomial(_), _)
        | (SymbolClass::GaussPoly { .. }, _) => {
            Verdict::exact(Route::Corollary1, Outcome::ExactNegative, Outcome::ExactNegative)
        }
        (SymbolClass::General, _) => return None,
    };
    if let Some(c) = g.constant_value() {
        verdict.diagnostics.put("g_constant_modulus", c.norm());
    }
    Some(verdict)
}

/// `V_g`: for `p <= q` bounded iff `deg g <= 2`, compact iff `deg g <= 1`;
/// for `q < p` both iff `deg g <= 1`. Non-polynomial symbols are never
/// admissible.
fn vg_degree_rule(g: &EntireExpr, params: &FockParams) -> Option<Verdict> {
    let outcome = |ok: bool| {
        if ok {
            Outcome::ExactPositive
        } else {
            Outcome::ExactNegative
        }
    };
    let mut verdict = match (g.degree(), g.class()) {
        (Some(d), _) => {
            let (bounded, compact) = if params.small_into_large() {
                (outcome(d <= 2), outcome(d <= 1))
            } else {
                (outcome(d <= 1), outcome(d <= 1))
            };
            let mut v = Verdict::exact(Route::VgDegreeRule, bounded, compact);
            v.diagnostics.put("g_degree", d as f64);
            v
        }
        (None, SymbolClass::GaussPoly { .. }) => {
            Verdict::exact(Route::VgDegreeRule, Outcome::ExactNegative, Outcome::ExactNegative)
        }
        (None, _) => return None,
    };
    verdict.diagnostics.put(
        "small_into_large",
        f64::from(u8::from(params.small_into_large())),
    );
    Some(verdict)
}

/// At `q = inf` with `g psi` nonzero, boundedness of `J_{(g,psi)}` forces
/// `psi(z) = a z + b` with `|a| <= 1`, and `b = 0` when `|a| = 1`.
fn psi_admissibility_rule(pair: &SymbolPair) -> Option<Verdict> {
    // The rule needs certainty that g and psi are nonzero.
    let g_nonzero = !matches!(pair.g.class(), SymbolClass::Zero | SymbolClass::General);
    let psi_nonzero =
        !matches!(pair.psi.class(), SymbolClass::Zero | SymbolClass::General);
    if !g_nonzero || !psi_nonzero {
        return None;
    }
    let violation = match affine_coeffs(&pair.psi) {
        None => true,
        Some((a, b)) => a.norm() > 1.0 || (a.norm() == 1.0 && b.norm() > 0.0),
    };
    if violation {
        let mut v = Verdict::exact(
            Route::PsiInadmissible,
            Outcome::ExactNegative,
            Outcome::ExactNegative,
        );
        if let Some((a, _)) = affine_coeffs(&pair.psi) {
            v.diagnostics.put("psi_slope_modulus", a.norm());
        }
        if let Some(d) = pair.psi.degree() {
            v.diagnostics.put("psi_degree", d as f64);
        }
        Some(v)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// sampled criterion fields
// ---------------------------------------------------------------------------

/// Which transform a sampled field carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    #[serde(rename = "P_psi")]
    PPsi,
    #[serde(rename = "Q_g")]
    QG,
    #[serde(rename = "M_gpsi")]
    MGPsi,
    #[serde(rename = "M_gpsipsi")]
    MGPsiPsi,
    #[serde(rename = "B_g")]
    BG,
    #[serde(rename = "B_gpsi")]
    BGPsi,
    #[serde(rename = "D_rq")]
    DRq,
    #[serde(rename = "mu_tilde")]
    MuTilde,
}

impl TransformKind {
    pub fn parse_tag(s: &str) -> Option<Self> {
        match s {
            "P_psi" => Some(Self::PPsi),
            "Q_g" => Some(Self::QG),
            "M_gpsi" => Some(Self::MGPsi),
            "M_gpsipsi" => Some(Self::MGPsiPsi),
            "B_g" => Some(Self::BG),
            "B_gpsi" => Some(Self::BGPsi),
            "D_rq" => Some(Self::DRq),
            "mu_tilde" => Some(Self::MuTilde),
        _ => None,
        }
    }
}

/// A sampled nonnegative field on the plane: polar-grid samples plus the
/// tail certificate backing them (absent when no certificate exists).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarField {
    pub samples: Vec<(f64, f64, f64)>,
    pub tail: Option<TailCertificate>,
}

/// One sampled criterion transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionField {
    pub which: TransformKind,
    pub field: ScalarField,
}

/// Samples a criterion transform on a polar grid of `n_radii x n_angles`
/// points out to `|z| = w_radius`. `B`/`D`/`mu~` need finite `q`; the
/// measure behind `D_rq`/`mu_tilde` is the operator-induced pushforward
/// `dmu = |g|^q (1+|z|)^{-q} e^{(alpha q/2)(|psi|^2 - |z|^2)} dm o psi^{-1}`.
pub fn sample_criterion_field(
    which: TransformKind,
    pair: &SymbolPair,
    params: &FockParams,
    w_radius: f64,
    n_radii: usize,
    n_angles: usize,
    disc_radius: f64,
    opts: &QuadOptions,
) -> Result<CriterionField, QuadError> {
    let alpha = params.alpha;
    let mut points = Vec::with_capacity(n_radii * n_angles);
    for i in 0..n_radii {
        let r = w_radius * (i + 1) as f64 / n_radii as f64;
        for j in 0..n_angles {
            points.push(Complex64::from_polar(
                r,
                std::f64::consts::TAU * j as f64 / n_angles as f64,
            ));
        }
    }
    let q_finite = params.q.value();
    let require_q = || -> Result<f64, QuadError> {
        q_finite.ok_or(QuadError::NoConvergence { refinements: 0, last_delta: f64::NAN })
    };
    let (values, tail): (Vec<f64>, Option<TailCertificate>) = match which {
        TransformKind::PPsi => (
            points.iter().map(|&z| eval_p_psi(pair, alpha, z)).collect(),
            None,
        ),
        TransformKind::QG => (
            points.iter().map(|&z| eval_q_g(pair, alpha, z)).collect(),
            GrowthEnvelope::of(&pair.g).and_then(|e| e.certificate(0.5 * alpha)),
        ),
        TransformKind::MGPsi => (
            points
                .iter()
                .map(|&z| eval_m(pair, alpha, z, SymbolSide::Plain))
                .collect(),
            m_certificate(pair, SymbolSide::Plain, alpha),
        ),
        TransformKind::MGPsiPsi => (
            points
                .iter()
                .map(|&z| eval_m(pair, alpha, z, SymbolSide::Composed))
                .collect(),
            m_certificate(pair, SymbolSide::Composed, alpha),
        ),
        TransformKind::BG | TransformKind::BGPsi => {
            let q = require_q()?;
            let side = if which == TransformKind::BG {
                SymbolSide::Plain
            } else {
                SymbolSide::Composed
            };
            let values: Result<Vec<f64>, QuadError> = points
                .par_iter()
                .map(|&w| {
                    Ok(berezin_b(pair, q, alpha, w, side, opts)?
                        .value()
                        .unwrap_or(f64::NAN))
                })
                .collect();
            (values?, None)
        }
        TransformKind::DRq | TransformKind::MuTilde => {
            let q = require_q()?;
            let mu = operator_measure(pair, q, alpha).ok_or(QuadError::UnboundedTail {
                c: 0.0,
            })?;
            let values: Result<Vec<f64>, QuadError> = points
                .par_iter()
                .map(|&z| {
                    if which == TransformKind::DRq {
                        crate::lattice::d_rq(&mu, q, disc_radius, z, opts)
                    } else {
                        crate::lattice::mu_tilde(&mu, q, alpha, z, opts)
                    }
                })
                .collect();
            let tail = Some(mu.cert);
            (values?, tail)
        }
    };
    let samples = points
        .iter()
        .zip(values.iter())
        .map(|(z, v)| (z.re, z.im, *v))
        .collect();
    Ok(CriterionField { which, field: ScalarField { samples, tail } })
}

/// The measure induced by the pair in the sup-norm necessity argument:
/// density `|g|^q (1+|z|)^{-q} e^{(alpha q/2)(|psi|^2-|z|^2)}` pushed
/// forward by `psi`. `None` when no Gaussian certificate exists.
pub fn operator_measure(
    pair: &SymbolPair,
    q: f64,
    alpha: f64,
) -> Option<crate::lattice::PlaneMeasure> {
    let env_g = GrowthEnvelope::of(&pair.g)?;
    let (a, b) = affine_coeffs(&pair.psi)?;
    let env_exp = GrowthEnvelope {
        log_a: 0.5 * alpha * b.norm_sqr(),
        k: 0.0,
        b: alpha * a.norm() * b.norm(),
        rho: 0.5 * alpha * a.norm_sqr(),
    };
    let cert = env_g.product(&env_exp).power(q).certificate(0.5 * alpha * q)?;
    let g = pair.g.clone();
    let psi = pair.psi.clone();
    let h = move |z: Complex64| {
        let psi_z = psi.eval(z);
        (q * (g.log_abs(z) - z.norm().ln_1p())
            + 0.5 * alpha * q * (psi_z.norm_sqr() - z.norm_sqr()))
        .exp()
    };
    Some(crate::lattice::PlaneMeasure::pushforward(h, cert, pair.psi.clone()))
}

#[cfg(test)]
mod tests;
