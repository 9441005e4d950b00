//! Structural classification of symbols.
//!
//! Normalization expands sums/products/powers of polynomials and merges a
//! single level of `exp` of a polynomial of degree <= 2. Anything deeper
//! (nested exponentials, `exp` of higher-degree arguments) is `General`.

use super::node::Node;
use num_complex::Complex64;

/// Upper bound on expanded polynomial degree; beyond this the normalizer
/// gives up and reports `General`.
const MAX_DEGREE: usize = 512;

/// The most specific structural class reachable by normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolClass {
    /// Identically zero.
    Zero,
    /// Nonzero constant.
    Constant(Complex64),
    /// Polynomial of degree >= 1; coefficients in ascending order, leading
    /// coefficient nonzero.
    Polynomial(Vec<Complex64>),
    /// `P(z) * exp(c2*z^2 + c1*z + c0)` with `(c2, c1) != (0, 0)` and `P`
    /// a nonzero polynomial (ascending coefficients).
    GaussPoly {
        poly: Vec<Complex64>,
        c2: Complex64,
        c1: Complex64,
        c0: Complex64,
    },
    /// Not recognized by the normalizer.
    General,
}

impl SymbolClass {
    /// Coefficients of the polynomial factor, when classified.
    pub fn poly_coeffs(&self) -> Option<&[Complex64]> {
        match self {
            SymbolClass::Polynomial(c) => Some(c),
            SymbolClass::GaussPoly { poly, .. } => Some(poly),
            _ => None,
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `poly * exp(quad[2] z^2 + quad[1] z + quad[0])` as a normal form.
#[derive(Debug, Clone, PartialEq)]
struct Normal {
    poly: Vec<Complex64>,
    quad: [Complex64; 3],
}

impl Normal {
    fn is_zero(&self) -> bool {
        self.poly.iter().all(|c| *c == ZERO)
    }
}

pub fn classify(node: &Node) -> SymbolClass {
    match decompose(node) {
        None => SymbolClass::General,
        Some(n) => {
            if n.is_zero() {
                return SymbolClass::Zero;
            }
            let mut poly = n.poly;
            trim(&mut poly);
            let [q0, q1, q2] = n.quad;
            if q1 == ZERO && q2 == ZERO {
                // exp of a constant folds into the coefficients.
                if q0 != ZERO {
                    let scale = q0.exp();
                    for c in poly.iter_mut() {
                        *c *= scale;
                    }
                    trim(&mut poly);
                    if poly.iter().all(|c| *c == ZERO) {
                        return SymbolClass::Zero;
                    }
                }
                if poly.len() == 1 {
                    SymbolClass::Constant(poly[0])
                } else {
                    SymbolClass::Polynomial(poly)
                }
            } else {
                SymbolClass::GaussPoly {
                    poly,
                    c2: q2,
                    c1: q1,
                    c0: q0,
                }
            }
        }
    }
}

fn trim(poly: &mut Vec<Complex64>) {
    while poly.len() > 1 && *poly.last().unwrap() == ZERO {
        poly.pop();
    }
    if poly.is_empty() {
        poly.push(ZERO);
    }
}

fn decompose(node: &Node) -> Option<Normal> {
    match node {
        Node::Const(c) => Some(Normal { poly: vec![*c], quad: [ZERO; 3] }),
        Node::Var => Some(Normal { poly: vec![ZERO, Complex64::new(1.0, 0.0)], quad: [ZERO; 3] }),
        Node::Sum(terms) => {
            let parts: Option<Vec<Normal>> = terms.iter().map(decompose).collect();
            let parts = parts?;
            let nonzero: Vec<&Normal> = parts.iter().filter(|p| !p.is_zero()).collect();
            if nonzero.is_empty() {
                return Some(Normal { poly: vec![ZERO], quad: [ZERO; 3] });
            }
            let quad = nonzero[0].quad;
            if nonzero.iter().any(|p| p.quad != quad) {
                return None;
            }
            let deg = nonzero.iter().map(|p| p.poly.len()).max().unwrap();
            let mut poly = vec![ZERO; deg];
            for p in nonzero {
                for (k, c) in p.poly.iter().enumerate() {
                    poly[k] += *c;
                }
            }
            Some(Normal { poly, quad })
        }
        Node::Product(factors) => {
            let mut acc = Normal { poly: vec![Complex64::new(1.0, 0.0)], quad: [ZERO; 3] };
            for f in factors {
                let part = decompose(f)?;
                if part.is_zero() || acc.is_zero() {
                    return Some(Normal { poly: vec![ZERO], quad: [ZERO; 3] });
                }
                acc.poly = convolve(&acc.poly, &part.poly)?;
                for k in 0..3 {
                    acc.quad[k] += part.quad[k];
                }
            }
            Some(acc)
        }
        Node::Pow(base, n) => {
            let b = decompose(base)?;
            if b.is_zero() {
                return Some(if *n == 0 {
                    Normal { poly: vec![Complex64::new(1.0, 0.0)], quad: [ZERO; 3] }
                } else {
                    Normal { poly: vec![ZERO], quad: [ZERO; 3] }
                });
            }
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..*n {
                poly = convolve(&poly, &b.poly)?;
            }
            let nf = f64::from(*n);
            Some(Normal {
                poly,
                quad: [b.quad[0] * nf, b.quad[1] * nf, b.quad[2] * nf],
            })
        }
        Node::Exp(arg) => {
            let a = decompose(arg)?;
            if a.is_zero() {
                return Some(Normal { poly: vec![Complex64::new(1.0, 0.0)], quad: [ZERO; 3] });
            }
            // Only exp of a pure polynomial of degree <= 2 merges.
            if a.quad != [ZERO; 3] {
                return None;
            }
            let mut coeffs = a.poly.clone();
            trim(&mut coeffs);
            if coeffs.len() > 3 {
                return None;
            }
            coeffs.resize(3, ZERO);
            Some(Normal {
                poly: vec![Complex64::new(1.0, 0.0)],
                quad: [coeffs[0], coeffs[1], coeffs[2]],
            })
        }
    }
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Option<Vec<Complex64>> {
    if a.len() + b.len() - 1 > MAX_DEGREE + 1 {
        return None;
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (j, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[j + k] += x * y;
        }
    }
    Some(out)
}
