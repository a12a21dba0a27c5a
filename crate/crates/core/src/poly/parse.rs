//! Recursive-descent parser for polynomial text.
//!
//! ```text
//! poly   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := int ['/' uint] | var ['^' uint] | '(' poly ')' ['^' uint]
//! ```
//!
//! Offsets in errors are byte offsets into the input.

use dashu_int::{IBig, UBig};

use super::MultiPoly;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Parse `text` as a polynomial over `vars`.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<MultiPoly> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let poly = p.poly()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn poly(&mut self) -> Result<MultiPoly> {
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let value = if self.eat(b'/') {
                    let at = self.pos;
                    let den = self.uint()?;
                    if den == UBig::ZERO {
                        return Err(Error::Syntax {
                            offset: at,
                            message: "zero denominator".into(),
                        });
                    }
                    Rational::from_parts(IBig::from(num), den)
                } else {
                    Rational::from(num)
                };
                Ok(MultiPoly::constant(self.vars, value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let index = self.vars.iter().position(|v| v == name).ok_or_else(|| Error::Syntax {
                    offset: start,
                    message: format!("unknown variable `{name}`"),
                })?;
                let base = MultiPoly::var(self.vars, index);
                self.exponent(base)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.exponent(inner)
            }
            Some(_) => Err(self.error("expected a number, variable or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn exponent(&mut self, base: MultiPoly) -> Result<MultiPoly> {
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let e = self.uint()?;
        let e: u32 = u32::try_from(&e)
            .ok()
            .filter(|&e| e > 0 && e <= 4096)
            .ok_or(Error::Syntax {
                offset: at,
                message: "exponent must be a positive integer".into(),
            })?;
        Ok(base.pow(e))
    }

    fn uint(&mut self) -> Result<UBig> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an unsigned integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(digits.parse::<UBig>().expect("digits"))
    }
}
