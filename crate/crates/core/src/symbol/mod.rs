//! Entire-function symbols: parsing, evaluation, exact symbolic calculus,
//! and structural classification.
//!
//! The grammar admits complex literals (`3`, `2i`, `(1+2i)`), the variable
//! `z`, the binary operators `+ - *`, integer powers `^n` with `n >= 0`,
//! `exp(...)`, and parentheses. Everything expressible is entire, so
//! evaluation is total on the complex plane.

mod classify;
mod lexer;
mod node;
mod parser;

pub use classify::SymbolClass;
pub use node::Node;
pub use parser::ParseError;

use num_complex::Complex64;

/// A parsed entire-function symbol together with its cached classification.
///
/// Immutable after construction; all operations are re-entrant and the type
/// is freely shareable between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireExpr {
    root: Node,
    class: SymbolClass,
}

impl EntireExpr {
    /// Wraps a raw AST node, recomputing the classification.
    pub fn from_node(root: Node) -> Self {
        let class = classify::classify(&root);
        EntireExpr { root, class }
    }

    /// Parses an expression string.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parser::parse(text).map(Self::from_node)
    }

    /// The constant function with value `c`.
    pub fn constant(c: Complex64) -> Self {
        Self::from_node(Node::Const(c))
    }

    /// The identity symbol `z`.
    pub fn variable() -> Self {
        Self::from_node(Node::Var)
    }

    /// The monomial `z^n`.
    pub fn monomial(n: u32) -> Self {
        match n {
            0 => Self::constant(Complex64::new(1.0, 0.0)),
            1 => Self::variable(),
            _ => Self::from_node(Node::Pow(Box::new(Node::Var), n)),
        }
    }

    /// The affine symbol `a*z + b`.
    pub fn affine(a: Complex64, b: Complex64) -> Self {
        let az = Node::Product(vec![Node::Const(a), Node::Var]);
        let root = if b == Complex64::new(0.0, 0.0) {
            az
        } else {
            Node::Sum(vec![az, Node::Const(b)])
        };
        Self::from_node(root)
    }

    /// `exp(c2*z^2 + c1*z + c0)` with zero coefficients omitted.
    pub fn exp_quadratic(c2: Complex64, c1: Complex64, c0: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut terms = Vec::new();
        if c2 != zero {
            terms.push(Node::Product(vec![
                Node::Const(c2),
                Node::Pow(Box::new(Node::Var), 2),
            ]));
        }
        if c1 != zero {
            terms.push(Node::Product(vec![Node::Const(c1), Node::Var]));
        }
        if c0 != zero {
            terms.push(Node::Const(c0));
        }
        let arg = match terms.len() {
            0 => Node::Const(zero),
            1 => terms.pop().unwrap(),
            _ => Node::Sum(terms),
        };
        Self::from_node(Node::Exp(Box::new(arg)))
    }

    /// Product `self * other` as a new symbol.
    pub fn product(&self, other: &EntireExpr) -> Self {
        Self::from_node(Node::Product(vec![self.root.clone(), other.root.clone()]))
    }

    /// Sum `self + other` as a new symbol.
    pub fn sum(&self, other: &EntireExpr) -> Self {
        Self::from_node(Node::Sum(vec![self.root.clone(), other.root.clone()]))
    }

    /// `c * self`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_node(Node::Product(vec![Node::Const(c), self.root.clone()]))
    }

    /// Evaluates the symbol at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.root.eval(z)
    }

    /// Exact symbolic derivative (classification recomputed).
    pub fn differentiate(&self) -> Self {
        Self::from_node(node::differentiate(&self.root))
    }

    /// Composition `self(inner(z))` by raw substitution, so evaluating the
    /// result follows the same arithmetic path as `self.eval(inner.eval(z))`.
    pub fn compose(&self, inner: &EntireExpr) -> Self {
        Self::from_node(node::substitute(&self.root, &inner.root))
    }

    /// The cached structural classification.
    pub fn class(&self) -> &SymbolClass {
        &self.class
    }

    /// Polynomial degree, when the symbol is recognized as a polynomial
    /// (constants and the zero symbol report degree 0).
    pub fn degree(&self) -> Option<u32> {
        match &self.class {
            SymbolClass::Zero | SymbolClass::Constant(_) => Some(0),
            SymbolClass::Polynomial(coeffs) => Some((coeffs.len() - 1) as u32),
            _ => None,
        }
    }

    /// True when the symbol is exactly the identity `z`.
    pub fn is_identity(&self) -> bool {
        match &self.class {
            SymbolClass::Polynomial(c) => {
                c.len() == 2
                    && c[0] == Complex64::new(0.0, 0.0)
                    && c[1] == Complex64::new(1.0, 0.0)
            }
            _ => false,
        }
    }

    /// True when the symbol is identically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.class, SymbolClass::Zero)
    }

    /// Constant value when the symbol is constant (the zero symbol included).
    pub fn constant_value(&self) -> Option<Complex64> {
        match &self.class {
            SymbolClass::Zero => Some(Complex64::new(0.0, 0.0)),
            SymbolClass::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// `ln |f(z)|`, computed through the classified closed form when one is
    /// available so that huge exponentials never overflow. `-inf` where the
    /// symbol vanishes.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        match &self.class {
            SymbolClass::Zero => f64::NEG_INFINITY,
            SymbolClass::GaussPoly { poly, c2, c1, c0 } => {
                let p = eval_poly(poly, z);
                let quad = (*c2 * z + *c1) * z + *c0;
                p.norm().ln() + quad.re
            }
            _ => self.eval(z).norm().ln(),
        }
    }

    /// Evaluation split as `mantissa * e^{log_scale}`. For gauss-poly
    /// symbols the exponential's real part moves into `log_scale`, keeping
    /// the mantissa moderate where a direct evaluation would overflow.
    pub fn eval_scaled(&self, z: Complex64) -> (Complex64, f64) {
        match &self.class {
            SymbolClass::GaussPoly { poly, c2, c1, c0 } => {
                let p = eval_poly(poly, z);
                let quad = (*c2 * z + *c1) * z + *c0;
                (p * Complex64::from_polar(1.0, quad.im), quad.re)
            }
            _ => (self.eval(z), 0.0),
        }
    }

    /// Canonical printer; the output reparses to a symbol with identical
    /// evaluation.
    pub fn to_text(&self) -> String {
        self.root.print()
    }

    /// Raw AST access for the calculus helpers.
    pub fn root(&self) -> &Node {
        &self.root
    }
}

impl std::fmt::Display for EntireExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}
