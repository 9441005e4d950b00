//! Recursive-descent parser for the symbol grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | power
//! power   := atom ('^' uint)?
//! atom    := number | number'i' | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than `*`; exponents are nonnegative integer literals.
//! The parenthesized forms `(a+bi)` / `(a-bi)` fold to a single complex
//! constant, matching the literal grammar.

use super::lexer::{tokenize, Spanned, Token};
use super::node::Node;
use num_complex::Complex64;

/// Syntax error with the byte position it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: usize, message: String) -> Self {
        ParseError { pos, message }
    }
}

pub fn parse(text: &str) -> Result<Node, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens: &tokens, k: 0, end: text.len() };
    let node = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::new(t.pos, "unexpected trailing input".into()));
    }
    Ok(node)
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    k: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.tokens.get(self.k)
    }

    fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.tokens.get(self.k);
        if t.is_some() {
            self.k += 1;
        }
        t
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if &t.token == want => Ok(()),
            Some(t) => Err(ParseError::new(t.pos, format!("expected {what}"))),
            None => Err(ParseError::new(
                self.end,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().map(|t| &t.token) {
                Some(Token::Plus) => {
                    self.k += 1;
                    terms.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.k += 1;
                    let t = self.term()?;
                    terms.push(negate(t));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Node::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut factors = vec![self.factor()?];
        while matches!(self.peek().map(|t| &t.token), Some(Token::Star)) {
            self.k += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Node::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek().map(|t| &t.token), Some(Token::Minus)) {
            self.k += 1;
            let operand = self.factor()?;
            return Ok(negate(operand));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if !matches!(self.peek().map(|t| &t.token), Some(Token::Caret)) {
            return Ok(base);
        }
        self.k += 1;
        let pos = self.pos();
        match self.next().map(|t| &t.token) {
            Some(Token::Num(x)) => {
                if x.fract() != 0.0 {
                    Err(ParseError::new(pos, "exponent must be a nonnegative integer".into()))
                } else if *x < 0.0 || *x > u32::MAX as f64 {
                    Err(ParseError::new(pos, "exponent out of range".into()))
                } else {
                    Ok(Node::Pow(Box::new(base), *x as u32))
                }
            }
            Some(Token::Minus) => Err(ParseError::new(pos, "negative exponent rejected".into())),
            Some(_) => Err(ParseError::new(pos, "exponent must be a nonnegative integer".into())),
            None => Err(ParseError::new(
                self.end,
                "unexpected end of input, expected exponent".into(),
            )),
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let pos = self.pos();
        match self.next().map(|t| &t.token) {
            Some(Token::Num(x)) => Ok(Node::Const(Complex64::new(*x, 0.0))),
            Some(Token::ImagNum(x)) => Ok(Node::Const(Complex64::new(0.0, *x))),
            Some(Token::ImagUnit) => Ok(Node::Const(Complex64::new(0.0, 1.0))),
            Some(Token::Var) => Ok(Node::Var),
            Some(Token::Exp) => {
                self.expect(&Token::LParen, "`(` after `exp`")?;
                let arg = self.expr()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(Node::Exp(Box::new(arg)))
            }
            Some(Token::LParen) => {
                if let Some(c) = self.try_complex_literal() {
                    return Ok(Node::Const(c));
                }
                let inner = self.expr()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(_) => Err(ParseError::new(pos, "expected a value".into())),
            None => Err(ParseError::new(
                self.end,
                "unexpected end of input, expected a value".into(),
            )),
        }
    }

    /// Attempts the complex-literal form right after `(`:
    /// `[-]a (+|-) [b]i )`. On failure, the cursor is restored so the
    /// content reparses as an ordinary parenthesized expression.
    fn try_complex_literal(&mut self) -> Option<Complex64> {
        let save = self.k;
        let result = self.complex_literal_body();
        if result.is_none() {
            self.k = save;
        }
        result
    }

    fn complex_literal_body(&mut self) -> Option<Complex64> {
        let re_neg = if matches!(self.peek().map(|t| &t.token), Some(Token::Minus)) {
            self.k += 1;
            true
        } else {
            false
        };
        let re_mag = match self.next().map(|t| &t.token) {
            Some(Token::Num(x)) => *x,
            _ => return None,
        };
        let im_neg = match self.next().map(|t| &t.token) {
            Some(Token::Plus) => false,
            Some(Token::Minus) => true,
            _ => return None,
        };
        let im_mag = match self.next().map(|t| &t.token) {
            Some(Token::ImagNum(x)) => *x,
            Some(Token::ImagUnit) => 1.0,
            _ => return None,
        };
        if !matches!(self.next().map(|t| &t.token), Some(Token::RParen)) {
            return None;
        }
        let re = if re_neg { -re_mag } else { re_mag };
        let im = if im_neg { -im_mag } else { im_mag };
        Some(Complex64::new(re, im))
    }
}

/// Structural negation: folded into literals and leading product constants,
/// wrapped as `(-1) * x` otherwise.
fn negate(node: Node) -> Node {
    match node {
        Node::Const(c) => Node::Const(-c),
        Node::Product(mut fs) => {
            if let Some(Node::Const(c)) = fs.first_mut() {
                *c = -*c;
                Node::Product(fs)
            } else {
                let mut out = vec![Node::Const(Complex64::new(-1.0, 0.0))];
                out.extend(fs);
                Node::Product(out)
            }
        }
        other => Node::Product(vec![Node::Const(Complex64::new(-1.0, 0.0)), other]),
    }
}
