//! Weighted Fock spaces: exponents, norms, reproducing kernels, and the
//! Littlewood–Paley derivative norms.

use crate::envelope::GrowthEnvelope;
use crate::quad::{plane_integrate, sup_field, QuadError, QuadOptions};
use crate::symbol::EntireExpr;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// An exponent in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(value: f64) -> Self {
        assert!(value > 0.0, "exponent must be positive, got {value}");
        Exponent::Finite(value)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(*v),
            Exponent::Infinity => None,
        }
    }

    pub fn le(&self, other: &Exponent) -> bool {
        match (self, other) {
            (_, Exponent::Infinity) => true,
            (Exponent::Infinity, Exponent::Finite(_)) => false,
            (Exponent::Finite(a), Exponent::Finite(b)) => a <= b,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// The triple `(alpha, p, q)` parameterizing every norm, transform, and
/// verdict: `alpha` is the Gaussian weight, `p` the domain exponent, `q`
/// the target exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockParams {
    pub alpha: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl FockParams {
    pub fn new(alpha: f64, p: Exponent, q: Exponent) -> Self {
        assert!(alpha > 0.0, "alpha must be positive, got {alpha}");
        FockParams { alpha, p, q }
    }

    /// `p <= q` routes to the first theorem, `q < p` to the second.
    pub fn small_into_large(&self) -> bool {
        self.p.le(&self.q)
    }
}

/// An entire function together with the weight it is normed against.
#[derive(Debug, Clone)]
pub struct FockFunction {
    pub expr: EntireExpr,
    pub alpha: f64,
}

impl FockFunction {
    pub fn new(expr: EntireExpr, alpha: f64) -> Self {
        assert!(alpha > 0.0);
        FockFunction { expr, alpha }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.expr.eval(z)
    }

    /// `|f(z)| e^{-alpha |z|^2 / 2}`, assembled in log space.
    pub fn weighted_abs(&self, z: Complex64) -> f64 {
        (self.expr.log_abs(z) - 0.5 * self.alpha * z.norm_sqr()).exp()
    }
}

/// Outcome of a norm computation. Divergence is a value, not an error, so
/// verdict logic can consume it; `attained` is the supremum-scan flag for
/// `p = inf` (always true for finite `p`). A sup-norm with `attained ==
/// false` is only a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    Finite { value: f64, attained: bool },
    Diverges,
}

impl Norm {
    pub fn value(&self) -> Option<f64> {
        match self {
            Norm::Finite { value, .. } => Some(*value),
            Norm::Diverges => None,
        }
    }

    pub fn diverges(&self) -> bool {
        matches!(self, Norm::Diverges)
    }
}

/// The Fock norm: for finite `p`,
/// `((alpha p / 2 pi) \int |f|^p e^{-alpha p |z|^2/2} dm)^{1/p}`;
/// for `p = inf`, `sup |f(z)| e^{-alpha |z|^2/2}`.
///
/// Symbols whose class admits no Gaussian certificate against this weight
/// (growth at least `e^{alpha |z|^2 / 2}`, or unclassified) report
/// `Diverges`.
pub fn fock_norm(f: &FockFunction, p: Exponent, opts: &QuadOptions) -> Result<Norm, QuadError> {
    if f.expr.is_zero() {
        return Ok(Norm::Finite { value: 0.0, attained: true });
    }
    let Some(env) = GrowthEnvelope::of(&f.expr) else {
        return Ok(Norm::Diverges);
    };
    match p {
        Exponent::Infinity => {
            let Some(cert) = env.certificate(0.5 * f.alpha) else {
                return Ok(Norm::Diverges);
            };
            let res = sup_field(|z| f.weighted_abs(z), &cert, 0.25, opts)?;
            if res.sup == f64::INFINITY {
                return Ok(Norm::Diverges);
            }
            Ok(Norm::Finite { value: res.sup, attained: res.attained_inside })
        }
        Exponent::Finite(p) => {
            let Some(cert) = env.power(p).certificate(0.5 * f.alpha * p) else {
                return Ok(Norm::Diverges);
            };
            let log_weight = 0.5 * f.alpha * p;
            let expr = f.expr.clone();
            let est = plane_integrate(
                move |z: Complex64| (p * expr.log_abs(z) - log_weight * z.norm_sqr()).exp(),
                &cert,
                opts,
            )?;
            let prefactor = f.alpha * p / (2.0 * std::f64::consts::PI);
            Ok(Norm::Finite {
                value: (prefactor * est.value).powf(1.0 / p),
                attained: true,
            })
        }
    }
}

/// Reproducing kernel `K_w(z) = e^{alpha z conj(w)}`. The pairing is the
/// Hermitian one, `<z, w> = z * conj(w)`, here and everywhere else.
pub fn kernel(w: Complex64, alpha: f64) -> FockFunction {
    let zero = Complex64::new(0.0, 0.0);
    FockFunction::new(
        EntireExpr::exp_quadratic(zero, alpha * w.conj(), zero),
        alpha,
    )
}

/// Normalized kernel `k_w(z) = e^{alpha z conj(w) - alpha |w|^2 / 2}`, of
/// unit norm in every `F_alpha^p`.
pub fn normalized_kernel(w: Complex64, alpha: f64) -> FockFunction {
    let zero = Complex64::new(0.0, 0.0);
    FockFunction::new(
        EntireExpr::exp_quadratic(
            zero,
            alpha * w.conj(),
            Complex64::new(-0.5 * alpha * w.norm_sqr(), 0.0),
        ),
        alpha,
    )
}

/// The derivative side of the Littlewood–Paley equivalence: for finite `p`,
/// `(|f(0)|^p + \int |f'(z)|^p (1+|z|)^{-p} e^{-p alpha |z|^2/2} dm)^{1/p}`;
/// for `p = inf`, `|f(0)| + sup |f'(z)| (1+|z|)^{-1} e^{-alpha |z|^2/2}`.
pub fn littlewood_paley_rhs(
    f: &FockFunction,
    p: Exponent,
    opts: &QuadOptions,
) -> Result<Norm, QuadError> {
    let deriv = FockFunction::new(f.expr.differentiate(), f.alpha);
    let at_zero = f.eval(Complex64::new(0.0, 0.0)).norm();
    if deriv.expr.is_zero() {
        return Ok(Norm::Finite { value: at_zero, attained: true });
    }
    let Some(env) = GrowthEnvelope::of(&deriv.expr) else {
        return Ok(Norm::Diverges);
    };
    match p {
        Exponent::Infinity => {
            let Some(cert) = env.certificate(0.5 * f.alpha) else {
                return Ok(Norm::Diverges);
            };
            let res = sup_field(
                |z| deriv.weighted_abs(z) / (1.0 + z.norm()),
                &cert,
                0.25,
                opts,
            )?;
            if res.sup == f64::INFINITY {
                return Ok(Norm::Diverges);
            }
            Ok(Norm::Finite {
                value: at_zero + res.sup,
                attained: res.attained_inside,
            })
        }
        Exponent::Finite(p) => {
            let Some(cert) = env.power(p).certificate(0.5 * f.alpha * p) else {
                return Ok(Norm::Diverges);
            };
            let alpha = f.alpha;
            let expr = deriv.expr.clone();
            let est = plane_integrate(
                move |z: Complex64| {
                    (p * (expr.log_abs(z) - (1.0 + z.norm()).ln())
                        - 0.5 * alpha * p * z.norm_sqr())
                    .exp()
                },
                &cert,
                opts,
            )?;
            Ok(Norm::Finite {
                value: (at_zero.powf(p) + est.value).powf(1.0 / p),
                attained: true,
            })
        }
    }
}

/// Maximum over the sample set of
/// `|f'(z)| / ((1+|z|) e^{alpha |z|^2/2} ||f||_p)`. `None` when the norm
/// diverges (the ratio degenerates).
pub fn pointwise_derivative_bound_ratio(
    f: &FockFunction,
    p: Exponent,
    samples: &[Complex64],
    opts: &QuadOptions,
) -> Result<Option<f64>, QuadError> {
    let norm = fock_norm(f, p, opts)?;
    let Some(norm_value) = norm.value() else {
        return Ok(None);
    };
    let deriv = FockFunction::new(f.expr.differentiate(), f.alpha);
    let mut best = 0.0f64;
    for &z in samples {
        let ratio = deriv.weighted_abs(z) / ((1.0 + z.norm()) * norm_value);
        if ratio > best {
            best = ratio;
        }
    }
    Ok(Some(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    /// Closed-form oracle: `||z^n||_p = ((2/(alpha p))^{np/2} Gamma(np/2 + 1))^{1/p}`.
    fn monomial_norm_oracle(n: u32, p: f64, alpha: f64) -> f64 {
        let half = n as f64 * p / 2.0;
        ((2.0 / (alpha * p)).powf(half) * gamma(half + 1.0)).powf(1.0 / p)
    }

    #[test]
    fn constant_has_unit_norm() {
        for p in [1.0, 2.0, 4.0] {
            for alpha in [0.5, 1.0, 2.0] {
                let f = FockFunction::new(EntireExpr::parse("1").unwrap(), alpha);
                let norm = fock_norm(&f, Exponent::finite(p), &opts()).unwrap();
                let v = norm.value().unwrap();
                assert!((v - 1.0).abs() < 1e-8, "p={p} alpha={alpha}: {v}");
            }
        }
    }

    #[test]
    fn monomial_norms_match_gamma_oracle() {
        for n in [1u32, 3, 6] {
            for p in [1.0, 2.0, 4.0] {
                for alpha in [0.5, 2.0] {
                    let f = FockFunction::new(EntireExpr::monomial(n), alpha);
                    let got = fock_norm(&f, Exponent::finite(p), &opts())
                        .unwrap()
                        .value()
                        .unwrap();
                    let want = monomial_norm_oracle(n, p, alpha);
                    let rel = (got - want).abs() / want;
                    assert!(rel < 1e-6, "n={n} p={p} alpha={alpha}: rel {rel}");
                }
            }
        }
    }

    #[test]
    fn kernel_values() {
        let alpha = 1.3;
        let w = Complex64::new(0.8, -0.4);
        let k = kernel(w, alpha);
        assert_eq!(k.eval(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let at_w = k.eval(w);
        let expect = (alpha * w.norm_sqr()).exp();
        assert!((at_w.norm() - expect).abs() < 1e-12 * expect);
        let k0 = kernel(Complex64::new(0.0, 0.0), alpha);
        assert_eq!(k0.eval(Complex64::new(2.0, 1.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn normalized_kernels_have_unit_norm() {
        for w in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(3.0, -3.0)] {
            for alpha in [0.5, 1.0, 2.0] {
                let k = normalized_kernel(w, alpha);
                for p in [Exponent::finite(1.0), Exponent::finite(2.0), Exponent::Infinity] {
                    let norm = fock_norm(&k, p, &opts()).unwrap();
                    let v = norm.value().unwrap();
                    assert!(
                        (v - 1.0).abs() < 1e-6,
                        "w={w} alpha={alpha} p={p}: norm {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn too_fast_growth_diverges() {
        // exp(z^2) against alpha = 1: |c2| = 1 > alpha/2.
        let f = FockFunction::new(EntireExpr::parse("exp(z^2)").unwrap(), 1.0);
        assert!(fock_norm(&f, Exponent::finite(2.0), &opts()).unwrap().diverges());
        // Unclassified growth is reported the same way.
        let g = FockFunction::new(EntireExpr::parse("exp(exp(z))").unwrap(), 1.0);
        assert!(fock_norm(&g, Exponent::finite(2.0), &opts()).unwrap().diverges());
    }

    #[test]
    fn paley_constant_is_its_value_at_zero() {
        let f = FockFunction::new(EntireExpr::parse("1").unwrap(), 1.0);
        let got = littlewood_paley_rhs(&f, Exponent::finite(2.0), &opts()).unwrap();
        assert_eq!(got.value().unwrap(), 1.0);
    }

    #[test]
    fn paley_identity_matches_radial_oracle() {
        // f = z, p = 2, alpha = 1: RHS^2 = int (1+|z|)^{-2} e^{-|z|^2} dm.
        let f = FockFunction::new(EntireExpr::variable(), 1.0);
        let got = littlewood_paley_rhs(&f, Exponent::finite(2.0), &opts())
            .unwrap()
            .value()
            .unwrap();
        let oracle = {
            // adaptive Simpson on the radial profile
            let g = |r: f64| r * (-r * r).exp() / (1.0 + r).powi(2);
            let mut sum = 0.0;
            let n = 4_000_000;
            let hi = 14.0;
            let h = hi / n as f64;
            for k in 0..n {
                let a = k as f64 * h;
                sum += h / 6.0 * (g(a) + 4.0 * g(a + 0.5 * h) + g(a + h));
            }
            (std::f64::consts::TAU * sum).sqrt()
        };
        assert!(
            (got - oracle).abs() < 1e-6 * oracle,
            "paley {got} vs oracle {oracle}"
        );
    }

    #[test]
    fn paley_ratio_window_over_kernels() {
        let alpha = 1.0;
        let p = Exponent::finite(2.0);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..6 {
            let w = Complex64::from_polar(k as f64, 0.7 * k as f64);
            let f = normalized_kernel(w, alpha);
            let rhs = littlewood_paley_rhs(&f, p, &opts()).unwrap().value().unwrap();
            let lhs = fock_norm(&f, p, &opts()).unwrap().value().unwrap();
            let ratio = rhs / lhs;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(hi / lo < 100.0, "window [{lo}, {hi}] too wide");
    }

    #[test]
    fn pointwise_ratio_for_linear_function() {
        // f = z, p = 2, alpha = 1: |f'| = 1 and ||f||_2 = 1, so the max of
        // 1/((1+|z|) e^{|z|^2/2}) over samples including 0 is 1.
        let f = FockFunction::new(EntireExpr::variable(), 1.0);
        let samples: Vec<Complex64> = (0..25)
            .map(|k| Complex64::from_polar(4.0 * k as f64 / 24.0, 1.3 * k as f64))
            .collect();
        let got = pointwise_derivative_bound_ratio(&f, Exponent::finite(2.0), &samples, &opts())
            .unwrap()
            .unwrap();
        assert!((got - 1.0).abs() < 1e-7, "ratio {got}");
    }

    #[test]
    fn monotone_nesting_up_to_constant() {
        // ||f||_q <= C ||f||_p for p <= q with one C across the family.
        let alpha = 1.0;
        let family = ["1", "z", "z^2", "exp(0.2*z^2)"];
        let mut worst: f64 = 0.0;
        for text in family {
            let f = FockFunction::new(EntireExpr::parse(text).unwrap(), alpha);
            let np = fock_norm(&f, Exponent::finite(1.0), &opts()).unwrap().value().unwrap();
            let nq = fock_norm(&f, Exponent::finite(2.0), &opts()).unwrap().value().unwrap();
            worst = worst.max(nq / np);
        }
        assert!(worst < 10.0, "nesting constant blew up: {worst}");
    }

    #[test]
    fn subharmonic_local_bound_holds_with_one_constant() {
        // |f'(z)|^p e^{-alpha p |z|^2/2} <= C \int_{D(z,1)} |f'|^p e^{-alpha p |w|^2/2} dm
        let alpha = 1.0;
        let p = 2.0;
        let f = FockFunction::new(EntireExpr::parse("exp(0.2*z^2) + z^3").unwrap(), alpha);
        let deriv = FockFunction::new(f.expr.differentiate(), alpha);
        let mut worst: f64 = 0.0;
        for k in 0..12 {
            let z = Complex64::from_polar(4.0 * k as f64 / 11.0, 0.9 * k as f64);
            let lhs = (p * (deriv.expr.log_abs(z) - 0.5 * alpha * z.norm_sqr())).exp();
            // disc integral by midpoint grid, 60x60 cells
            let mut total = 0.0;
            let n = 60;
            let h = 2.0 / n as f64;
            for a in 0..n {
                for b in 0..n {
                    let w = z + Complex64::new(-1.0 + (a as f64 + 0.5) * h, -1.0 + (b as f64 + 0.5) * h);
                    if (w - z).norm() <= 1.0 {
                        total += h * h
                            * (p * (deriv.expr.log_abs(w) - 0.5 * alpha * w.norm_sqr())).exp();
                    }
                }
            }
            worst = worst.max(lhs / total);
        }
        assert!(worst < 10.0, "subharmonic constant too large: {worst}");
    }
}
