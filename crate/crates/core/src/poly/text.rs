//! Plain-text polynomial syntax.
//!
//! `xJ` is component `J` at shift 0, each trailing apostrophe adds one forward
//! shift (`x1''` is `x_1^(2)`), each leading underscore one backward shift
//! (`_x1` is `x_1^(-1)`), and any other identifier is a parameter. Products use
//! `*`, powers `^`, and `/` is allowed only by a nonzero constant:
//! `3/2*x1'^2*x2 - a*(x1 + 1)`. `x0` is the constant 1.

use thiserror::Error;

use super::monomial::Var;
use super::polynomial::{parse_rational, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("at column {column}: {reason}")]
pub struct ParsePolyError {
    pub column: usize,
    pub reason: String,
}

pub fn parse_polynomial(text: &str) -> Result<Polynomial, ParsePolyError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: &str) -> ParsePolyError {
        ParsePolyError {
            column: self.pos + 1,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, ParsePolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParsePolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.factor()?;
                    match d.as_constant() {
                        Some(c) if !num_traits::Zero::is_zero(&c) => {
                            acc = acc.scale(&(super::polynomial::qi(1) / c))
                        }
                        _ => {
                            self.pos = at;
                            return Err(self.err("division only by a nonzero constant"));
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial, ParsePolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.err("expected a nonnegative integer exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParsePolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c == b'_' || c.is_ascii_alphabetic() => self.variable(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Polynomial, ParsePolyError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        parse_rational(s)
            .map(Polynomial::constant)
            .ok_or_else(|| ParsePolyError {
                column: start + 1,
                reason: format!("malformed number '{s}'"),
            })
    }

    fn variable(&mut self) -> Result<Polynomial, ParsePolyError> {
        let start = self.pos;
        let mut back = 0i32;
        while self.pos < self.src.len() && self.src[self.pos] == b'_' {
            back += 1;
            self.pos += 1;
        }
        let id_start = self.pos;
        if !self.src.get(self.pos).is_some_and(u8::is_ascii_alphabetic) {
            return Err(self.err("expected an identifier"));
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let ident = std::str::from_utf8(&self.src[id_start..self.pos]).expect("ascii");
        let mut fwd = 0i32;
        while self.pos < self.src.len() && self.src[self.pos] == b'\'' {
            fwd += 1;
            self.pos += 1;
        }
        let component = ident
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<u32>().ok());
        match component {
            Some(j) => Ok(Polynomial::var(Var::state(j, fwd - back))),
            None if back == 0 && fwd == 0 => Ok(Polynomial::param(ident)),
            None => Err(ParsePolyError {
                column: start + 1,
                reason: format!("parameter '{ident}' cannot carry a time shift"),
            }),
        }
    }
}
