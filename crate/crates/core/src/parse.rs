//! Textual polynomial syntax shared by every file format.
//!
//! Identifiers, integer literals, `+ - * / ^` and parentheses. Decimal
//! literals are rejected so that every coefficient stays exact; `1/10` is
//! the rational one tenth.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::error::AlgebraError;
use crate::field::Field;
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::Polynomial;
use crate::rational::Rational;
use crate::ratfunc::RationalFunction;

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn err(pos: usize, msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Parse { pos, msg: msg.into() }
}

fn tokenize(s: &str) -> Result<Vec<(usize, Token)>, AlgebraError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'.' || bytes[i] == b'e' || bytes[i] == b'E') {
                return Err(err(start, "decimal literals are not allowed; write rationals such as 1/10"));
            }
            let n: BigInt = s[start..i].parse().map_err(|_| err(start, "bad integer"))?;
            out.push((start, Token::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(s[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c == '.' {
            return Err(err(i, "decimal literals are not allowed; write rationals such as 1/10"));
        } else {
            return Err(err(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    names: &'a [String],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<RationalFunction, AlgebraError> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, AlgebraError> {
        let mut acc = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            let at = self.here();
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' {
                acc.mul(&rhs)
            } else {
                acc.div(&rhs).map_err(|_| err(at, "division by zero"))?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction, AlgebraError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction, AlgebraError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            match self.peek().cloned() {
                Some(Token::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n.try_into().map_err(|_| err(at, "exponent too large"))?;
                    return base.pow(e);
                }
                _ => return Err(err(at, "exponent must be a non-negative integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalFunction, AlgebraError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.pos += 1;
                let r = Rational::from_bigints(n, BigInt::from(1));
                Ok(RationalFunction::constant(self.nvars(), r))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let i = self
                    .names
                    .iter()
                    .position(|n| *n == name)
                    .ok_or_else(|| err(at, format!("unknown variable `{name}`")))?;
                Ok(RationalFunction::from_polynomial(Polynomial::var(self.nvars(), i)))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Op(')')) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(err(self.here(), "expected `)`")),
                }
            }
            Some(t) => Err(err(at, format!("unexpected token {t:?}"))),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

/// Parses a rational-function expression over the given variable names.
pub fn parse_rational_function(s: &str, names: &[String]) -> Result<RationalFunction, AlgebraError> {
    let tokens = tokenize(s)?;
    let mut parser = Parser { tokens, pos: 0, names, end: s.len() };
    let value = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(err(parser.here(), "trailing input"));
    }
    Ok(value.lift(names.len()))
}

/// Parses a polynomial; division is allowed only by nonzero constants.
pub fn parse_polynomial(s: &str, names: &[String]) -> Result<Polynomial<Rational>, AlgebraError> {
    let rf = parse_rational_function(s, names)?;
    rf.as_polynomial()
        .cloned()
        .ok_or_else(|| err(0, "expression is not a polynomial"))
}

fn is_plain_rational(s: &str) -> bool {
    let s = s.strip_prefix('-').unwrap_or(s);
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '/')
}

fn format_monomial(m: &Monomial, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}

/// Formats a polynomial with terms in descending grevlex order. The output
/// parses back to the same polynomial.
pub fn format_polynomial<F: Field>(p: &Polynomial<F>, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let order = MonomialOrder::grevlex();
    let mut out = String::new();
    for (k, (m, c)) in p.sorted_terms(&order).into_iter().enumerate() {
        let cs = c.to_string();
        let (negative, body) = if is_plain_rational(&cs) {
            match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            }
        } else {
            (false, format!("({cs})"))
        };
        let mono = format_monomial(m, names);
        let term = if mono.is_empty() {
            body
        } else if body == "1" {
            mono
        } else {
            format!("{body}*{mono}")
        };
        match (k, negative) {
            (0, false) => out.push_str(&term),
            (0, true) => {
                out.push('-');
                out.push_str(&term);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&term);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&term);
            }
        }
    }
    out
}

/// `num` when the denominator is one, else `(num)/(den)`.
pub fn format_rational_function(r: &RationalFunction, names: &[String]) -> String {
    let r = r.lift(names.len());
    let num = format_polynomial(r.numerator(), names);
    if r.denominator().is_constant() {
        num
    } else {
        format!("({})/({})", num, format_polynomial(r.denominator(), names))
    }
}
