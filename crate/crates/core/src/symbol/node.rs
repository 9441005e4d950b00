//! AST nodes, evaluation, the canonical printer, and exact calculus.

use num_complex::Complex64;

/// Expression node. The grammar admits no poles, conjugation, or absolute
/// values, so every tree evaluates to an entire function of `z`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Complex constant.
    Const(Complex64),
    /// The variable `z`.
    Var,
    /// n-ary sum.
    Sum(Vec<Node>),
    /// n-ary product.
    Product(Vec<Node>),
    /// Nonnegative integer power of a subexpression.
    Pow(Box<Node>, u32),
    /// `exp` of a subexpression.
    Exp(Box<Node>),
}

impl Node {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var => z,
            Node::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.eval(z);
                }
                acc
            }
            Node::Product(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= f.eval(z);
                }
                acc
            }
            Node::Pow(base, n) => base.eval(z).powu(*n),
            Node::Exp(arg) => arg.eval(z).exp(),
        }
    }

    /// Canonical printing. Parenthesization is chosen so that reparsing the
    /// output rebuilds a structurally identical tree (negative constants are
    /// refolded by the parser, nested sums/products keep their grouping).
    pub fn print(&self) -> String {
        let mut out = String::new();
        self.print_into(&mut out, Prec::Sum);
        out
    }

    fn print_into(&self, out: &mut String, ctx: Prec) {
        match self {
            Node::Const(c) => print_const(*c, out, ctx),
            Node::Var => out.push('z'),
            Node::Sum(terms) => {
                let parens = ctx > Prec::Sum;
                if parens {
                    out.push('(');
                }
                for (k, t) in terms.iter().enumerate() {
                    if k == 0 {
                        t.print_into(out, Prec::Term);
                    } else if let Some(pos) = negated_form(t) {
                        out.push_str(" - ");
                        pos.print_into(out, Prec::Term);
                    } else {
                        out.push_str(" + ");
                        t.print_into(out, Prec::Term);
                    }
                }
                if parens {
                    out.push(')');
                }
            }
            Node::Product(factors) => {
                let parens = ctx > Prec::Term;
                if parens {
                    out.push('(');
                }
                // A leading factor of exactly -1 prints as a unary minus.
                let (neg, rest) = match factors.split_first() {
                    Some((Node::Const(c), rest))
                        if *c == Complex64::new(-1.0, 0.0) && !rest.is_empty() =>
                    {
                        (true, rest)
                    }
                    _ => (false, &factors[..]),
                };
                if neg {
                    out.push('-');
                }
                for (k, f) in rest.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    f.print_into(out, Prec::Factor);
                }
                if parens {
                    out.push(')');
                }
            }
            Node::Pow(base, n) => {
                base.print_into(out, Prec::Power);
                out.push('^');
                out.push_str(&n.to_string());
            }
            Node::Exp(arg) => {
                out.push_str("exp(");
                arg.print_into(out, Prec::Sum);
                out.push(')');
            }
        }
    }
}

/// Printing context, ordered by binding strength.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    /// Top level or inside parentheses: sums allowed bare.
    Sum,
    /// Summand position: products allowed bare.
    Term,
    /// Product-factor position: powers and atoms allowed bare.
    Factor,
    /// Power-base position: atoms only.
    Power,
}

/// If `t` is `(-1) * rest` or a constant with a structurally negatable
/// value, return the positive counterpart for `a - b` printing.
fn negated_form(t: &Node) -> Option<Node> {
    match t {
        Node::Product(fs) => match fs.split_first() {
            Some((Node::Const(c), rest)) if !rest.is_empty() && is_neg_real(*c) => {
                if *c == Complex64::new(-1.0, 0.0) && rest.len() == 1 {
                    Some(rest[0].clone())
                } else if *c == Complex64::new(-1.0, 0.0) {
                    Some(Node::Product(rest.to_vec()))
                } else {
                    let mut out = vec![Node::Const(-*c)];
                    out.extend(rest.iter().cloned());
                    Some(Node::Product(out))
                }
            }
            _ => None,
        },
        Node::Const(c) if is_neg_real(*c) => Some(Node::Const(-*c)),
        _ => None,
    }
}

fn is_neg_real(c: Complex64) -> bool {
    c.re < 0.0 && c.im == 0.0
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Emits a complex constant in whichever literal form reparses to the same
/// bit pattern: `a`, `bi`, or `(a+bi)`. Signed zeros are preserved because
/// the parser folds a leading minus directly into the literal.
fn print_const(c: Complex64, out: &mut String, ctx: Prec) {
    let re_neg = c.re.is_sign_negative();
    let im_neg = c.im.is_sign_negative();
    let pure_real = c.im == 0.0 && (im_neg == re_neg);
    let pure_imag = c.re == 0.0 && (re_neg == im_neg);
    let body = if pure_real {
        if re_neg {
            format!("-{}", fmt_f64(-c.re))
        } else {
            fmt_f64(c.re)
        }
    } else if pure_imag {
        if im_neg {
            format!("-{}i", fmt_f64(-c.im))
        } else {
            format!("{}i", fmt_f64(c.im))
        }
    } else {
        let re = if re_neg {
            format!("-{}", fmt_f64(-c.re))
        } else {
            fmt_f64(c.re)
        };
        let sign = if im_neg { '-' } else { '+' };
        return out.push_str(&format!("({re}{sign}{}i)", fmt_f64(c.im.abs())));
    };
    // A leading minus binds weaker than `^`, so a negative literal must be
    // parenthesized in power-base position.
    let needs_parens = body.starts_with('-') && ctx == Prec::Power;
    if needs_parens {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
}

// ---------------------------------------------------------------------------
// calculus
// ---------------------------------------------------------------------------

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sum constructor that drops exact zeros and unwraps singletons.
fn sum_of(terms: Vec<Node>) -> Node {
    let mut kept: Vec<Node> = terms
        .into_iter()
        .filter(|t| !matches!(t, Node::Const(c) if *c == ZERO))
        .collect();
    match kept.len() {
        0 => Node::Const(ZERO),
        1 => kept.pop().unwrap(),
        _ => Node::Sum(kept),
    }
}

/// Product constructor that collapses on zero, drops exact units, and
/// unwraps singletons.
fn product_of(factors: Vec<Node>) -> Node {
    if factors
        .iter()
        .any(|f| matches!(f, Node::Const(c) if *c == ZERO))
    {
        return Node::Const(ZERO);
    }
    let mut kept: Vec<Node> = factors
        .into_iter()
        .filter(|f| !matches!(f, Node::Const(c) if *c == ONE))
        .collect();
    match kept.len() {
        0 => Node::Const(ONE),
        1 => kept.pop().unwrap(),
        _ => Node::Product(kept),
    }
}

fn pow_of(base: Node, n: u32) -> Node {
    match n {
        0 => Node::Const(ONE),
        1 => base,
        _ => Node::Pow(Box::new(base), n),
    }
}

/// Exact symbolic derivative.
pub fn differentiate(node: &Node) -> Node {
    match node {
        Node::Const(_) => Node::Const(ZERO),
        Node::Var => Node::Const(ONE),
        Node::Sum(terms) => sum_of(terms.iter().map(differentiate).collect()),
        Node::Product(factors) => {
            // General Leibniz rule over the n-ary product.
            let mut terms = Vec::with_capacity(factors.len());
            for k in 0..factors.len() {
                let mut fs = Vec::with_capacity(factors.len());
                for (j, f) in factors.iter().enumerate() {
                    if j == k {
                        fs.push(differentiate(f));
                    } else {
                        fs.push(f.clone());
                    }
                }
                terms.push(product_of(fs));
            }
            sum_of(terms)
        }
        Node::Pow(base, n) => {
            if *n == 0 {
                Node::Const(ZERO)
            } else {
                product_of(vec![
                    Node::Const(Complex64::new(f64::from(*n), 0.0)),
                    pow_of((**base).clone(), n - 1),
                    differentiate(base),
                ])
            }
        }
        Node::Exp(arg) => product_of(vec![differentiate(arg), node.clone()]),
    }
}

/// Raw substitution of `inner` for the variable; no simplification, so the
/// arithmetic path of the composition matches evaluating the outer function
/// at `inner(z)`.
pub fn substitute(node: &Node, inner: &Node) -> Node {
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Var => inner.clone(),
        Node::Sum(ts) => Node::Sum(ts.iter().map(|t| substitute(t, inner)).collect()),
        Node::Product(fs) => Node::Product(fs.iter().map(|f| substitute(f, inner)).collect()),
        Node::Pow(b, n) => Node::Pow(Box::new(substitute(b, inner)), *n),
        Node::Exp(a) => Node::Exp(Box::new(substitute(a, inner))),
    }
}
