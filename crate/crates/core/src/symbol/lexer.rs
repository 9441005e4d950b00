//! Tokenizer for the symbol grammar. Whitespace-insensitive, except that an
//! imaginary literal like `2i` requires the `i` to sit flush against the
//! digits.

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    /// Real number literal.
    Num(f64),
    /// Imaginary literal `bi` (value is `b`).
    ImagNum(f64),
    /// The imaginary unit `i` on its own.
    ImagUnit,
    /// The variable `z`.
    Var,
    /// The `exp` keyword.
    Exp,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub token: Token,
    pub pos: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0usize;
    while k < bytes.len() {
        let c = bytes[k];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => k += 1,
            b'+' => {
                out.push(Spanned { token: Token::Plus, pos: k });
                k += 1;
            }
            b'-' => {
                out.push(Spanned { token: Token::Minus, pos: k });
                k += 1;
            }
            b'*' => {
                out.push(Spanned { token: Token::Star, pos: k });
                k += 1;
            }
            b'^' => {
                out.push(Spanned { token: Token::Caret, pos: k });
                k += 1;
            }
            b'(' => {
                out.push(Spanned { token: Token::LParen, pos: k });
                k += 1;
            }
            b')' => {
                out.push(Spanned { token: Token::RParen, pos: k });
                k += 1;
            }
            b'0'..=b'9' => {
                let (value, end) = lex_number(text, k)?;
                if end < bytes.len() && bytes[end] == b'i' {
                    out.push(Spanned { token: Token::ImagNum(value), pos: k });
                    k = end + 1;
                } else {
                    out.push(Spanned { token: Token::Num(value), pos: k });
                    k = end;
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = k;
                while k < bytes.len() && bytes[k].is_ascii_alphanumeric() {
                    k += 1;
                }
                let word = &text[start..k];
                let token = match word {
                    "z" => Token::Var,
                    "i" => Token::ImagUnit,
                    "exp" => Token::Exp,
                    _ => {
                        return Err(ParseError::new(
                            start,
                            format!("unknown identifier `{word}`"),
                        ))
                    }
                };
                out.push(Spanned { token, pos: start });
            }
            b'.' => {
                return Err(ParseError::new(
                    k,
                    "numbers must start with a digit".to_string(),
                ))
            }
            _ => {
                return Err(ParseError::new(
                    k,
                    format!("unexpected character `{}`", &text[k..k + 1]),
                ))
            }
        }
    }
    Ok(out)
}

/// Lexes a decimal literal with optional fraction and exponent. The exponent
/// marker is consumed only when followed by a well-formed exponent, so `2exp`
/// splits into the number `2` and the keyword `exp`.
fn lex_number(text: &str, start: usize) -> Result<(f64, usize), ParseError> {
    let bytes = text.as_bytes();
    let mut k = start;
    while k < bytes.len() && bytes[k].is_ascii_digit() {
        k += 1;
    }
    if k < bytes.len() && bytes[k] == b'.' {
        let frac_start = k + 1;
        let mut j = frac_start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == frac_start {
            return Err(ParseError::new(k, "expected digits after decimal point".into()));
        }
        k = j;
    }
    if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
        let mut j = k + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > digits_start {
            k = j;
        }
    }
    let value: f64 = text[start..k]
        .parse()
        .map_err(|_| ParseError::new(start, "malformed number".into()))?;
    Ok((value, k))
}
