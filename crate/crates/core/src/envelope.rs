//! Growth envelopes for classified symbols.
//!
//! An envelope certifies `|h(z)| <= exp(log_a) * (1 + |z|)^k * exp(b|z| + rho|z|^2)`
//! for all `z`. Envelopes are assembled analytically from [`SymbolClass`]
//! data — never inferred from samples — and combine under products, powers,
//! affine substitution, and radial integration. Subtracting a Gaussian
//! weight turns an envelope into a [`TailCertificate`] when the quadratic
//! margin is strictly positive.

use crate::quad::TailCertificate;
use crate::symbol::{EntireExpr, SymbolClass};

/// `|h(z)| <= exp(log_a) (1+|z|)^k exp(b |z| + rho |z|^2)` on all of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEnvelope {
    pub log_a: f64,
    pub k: f64,
    pub b: f64,
    pub rho: f64,
}

impl GrowthEnvelope {
    pub fn constant(log_a: f64) -> Self {
        GrowthEnvelope { log_a, k: 0.0, b: 0.0, rho: 0.0 }
    }

    /// Envelope of a symbol. Classified symbols get the closed form;
    /// anything else is bounded structurally over the AST, so sums mixing
    /// different exponential types still certify. `None` only when some
    /// `exp` argument grows faster than quadratically (or is itself
    /// unclassifiable).
    pub fn of(expr: &EntireExpr) -> Option<Self> {
        match expr.class() {
            SymbolClass::Zero => Some(GrowthEnvelope::constant(f64::NEG_INFINITY)),
            SymbolClass::Constant(c) => Some(GrowthEnvelope::constant(c.norm().ln())),
            SymbolClass::Polynomial(coeffs) => Some(poly_envelope(coeffs)),
            SymbolClass::GaussPoly { poly, c2, c1, c0 } => {
                let p = poly_envelope(poly);
                Some(GrowthEnvelope {
                    log_a: p.log_a + c0.re,
                    k: p.k,
                    b: c1.norm(),
                    rho: c2.norm(),
                })
            }
            SymbolClass::General => of_node(expr.root()),
        }
    }

    /// Pointwise bound at radius `r`.
    pub fn bound_log(&self, r: f64) -> f64 {
        self.log_a + self.k * r.ln_1p() + self.b * r + self.rho * r * r
    }

    /// Envelope of a product.
    pub fn product(&self, other: &Self) -> Self {
        GrowthEnvelope {
            log_a: self.log_a + other.log_a,
            k: self.k + other.k,
            b: self.b + other.b,
            rho: self.rho + other.rho,
        }
    }

    /// Envelope of the `p`-th power (`p > 0`, not necessarily an integer).
    pub fn power(&self, p: f64) -> Self {
        GrowthEnvelope {
            log_a: self.log_a * p,
            k: self.k * p,
            b: self.b * p,
            rho: self.rho * p,
        }
    }

    /// Envelope of `h(a z + c)` given the envelope of `h`. Uses
    /// `|az+c| <= |a| r + |c|`, `1 + |a|r + |c| <= (1+|c|) max(1,|a|) (1+r)`,
    /// and the exact expansion `(|a| r + |c|)^2 = |a|^2 r^2 + 2|a||c| r + |c|^2`.
    pub fn compose_affine(&self, a_abs: f64, c_abs: f64) -> Self {
        GrowthEnvelope {
            log_a: self.log_a
                + self.k * ((1.0 + c_abs).ln() + a_abs.max(1.0).ln())
                + self.b * c_abs
                + self.rho * c_abs * c_abs,
            k: self.k,
            b: self.b * a_abs + 2.0 * self.rho * a_abs * c_abs,
            rho: self.rho * a_abs * a_abs,
        }
    }

    /// Envelope of `z -> sup over the segment [0, z] of h`, which is just the
    /// envelope itself when `b, rho >= 0` (the bound is radially increasing),
    /// and of `z -> integral of h along [0, z]`, which gains one power of
    /// `(1 + |z|)`.
    pub fn integral_along_segment(&self) -> Self {
        GrowthEnvelope { k: self.k + 1.0, ..*self }
    }

    /// Adds a constant term: `|h| + m <= (A + m)(1+r)^k e^{...}` for
    /// nonnegative exponent parts.
    pub fn add_constant(&self, log_m: f64) -> Self {
        GrowthEnvelope { log_a: log_add(self.log_a, log_m), ..*self }
    }

    /// Tail certificate for `h(z) * exp(-weight |z|^2)`; requires a strictly
    /// positive quadratic margin.
    pub fn certificate(&self, weight: f64) -> Option<TailCertificate> {
        let c = weight - self.rho;
        if !(c > 0.0) || self.log_a == f64::INFINITY {
            return None;
        }
        Some(TailCertificate {
            log_a: self.log_a,
            k: self.k.max(0.0),
            b: self.b,
            c,
            r0: 0.0,
        })
    }
}

/// Structural bound over the AST. Sums take the pointwise maximum shape
/// with added constants; products and powers combine exponents; `exp`
/// arguments must classify as polynomials of degree at most two.
fn of_node(node: &crate::symbol::Node) -> Option<GrowthEnvelope> {
    use crate::symbol::Node;
    match node {
        Node::Const(c) => Some(GrowthEnvelope::constant(c.norm().ln())),
        Node::Var => Some(GrowthEnvelope { log_a: 0.0, k: 1.0, b: 0.0, rho: 0.0 }),
        Node::Sum(terms) => {
            let mut acc = GrowthEnvelope::constant(f64::NEG_INFINITY);
            for t in terms {
                let e = of_node(t)?;
                acc = GrowthEnvelope {
                    log_a: log_add(acc.log_a, e.log_a),
                    k: acc.k.max(e.k),
                    b: acc.b.max(e.b),
                    rho: acc.rho.max(e.rho),
                };
            }
            Some(acc)
        }
        Node::Product(factors) => {
            let mut acc = GrowthEnvelope::constant(0.0);
            for f in factors {
                acc = acc.product(&of_node(f)?);
            }
            Some(acc)
        }
        Node::Pow(base, n) => Some(of_node(base)?.power(f64::from(*n))),
        Node::Exp(arg) => {
            let sub = EntireExpr::from_node(arg.as_ref().clone());
            match sub.class() {
                SymbolClass::Zero => Some(GrowthEnvelope::constant(0.0)),
                SymbolClass::Constant(c) => Some(GrowthEnvelope::constant(c.re)),
                SymbolClass::Polynomial(coeffs) if coeffs.len() <= 3 => {
                    let c1 = coeffs.get(1).map_or(0.0, |c| c.norm());
                    let c2 = coeffs.get(2).map_or(0.0, |c| c.norm());
                    Some(GrowthEnvelope { log_a: coeffs[0].re, k: 0.0, b: c1, rho: c2 })
                }
                _ => None,
            }
        }
    }
}

/// `|sum a_j z^j| <= (sum |a_j|) (1+r)^deg`.
fn poly_envelope(coeffs: &[num_complex::Complex64]) -> GrowthEnvelope {
    let sum: f64 = coeffs.iter().map(|c| c.norm()).sum();
    GrowthEnvelope {
        log_a: sum.ln(),
        k: (coeffs.len() - 1) as f64,
        b: 0.0,
        rho: 0.0,
    }
}

/// `ln(e^x + e^y)` without overflow.
pub fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::EntireExpr;
    use num_complex::Complex64;

    #[test]
    fn envelope_dominates_samples() {
        let texts = [
            "z^3 - (2+1i)*z + 4",
            "exp(0.2*z^2 - z)",
            "(z^2+1)*exp((0.1+0.05i)*z^2 + 2i*z - 1)",
        ];
        for text in texts {
            let f = EntireExpr::parse(text).unwrap();
            let env = GrowthEnvelope::of(&f).unwrap();
            for k in 0..200 {
                let z = Complex64::from_polar(6.0 * (k as f64) / 199.0, 2.39 * k as f64);
                let actual = f.log_abs(z);
                let bound = env.bound_log(z.norm());
                assert!(
                    actual <= bound + 1e-9,
                    "envelope violated for {text} at {z}: {actual} > {bound}"
                );
            }
        }
    }

    #[test]
    fn affine_composition_dominates() {
        let f = EntireExpr::parse("z^2*exp(0.3*z^2 + z)").unwrap();
        let env = GrowthEnvelope::of(&f).unwrap();
        let (a, c) = (Complex64::new(0.4, 0.3), Complex64::new(-1.0, 2.0));
        let composed_env = env.compose_affine(a.norm(), c.norm());
        let psi = EntireExpr::affine(a, c);
        let composed = f.compose(&psi);
        for k in 0..200 {
            let z = Complex64::from_polar(5.0 * (k as f64) / 199.0, 1.7 * k as f64);
            let actual = composed.log_abs(z);
            let bound = composed_env.bound_log(z.norm());
            assert!(actual <= bound + 1e-9, "affine envelope violated at {z}");
        }
    }

    #[test]
    fn log_add_is_symmetric_and_exact_on_equal_inputs() {
        assert!((log_add(1.0, 1.0) - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
