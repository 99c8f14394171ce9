//! Recursive-descent reader for the polynomial grammar:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := atom ('^' uint)?
//! atom     := rational | var | '(' expr ')'
//! rational := ['-'] uint ('/' uint)?
//! var      := 'x' uint
//! ```
//!
//! Whitespace is ignored everywhere.

use num_bigint::BigInt;

use super::{Poly, Rational, ScalarError, MAX_DEGREE};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ScalarError {
        ScalarError::Syntax { offset: self.pos, message: msg.into() }
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

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<BigInt, ScalarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected unsigned integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digits parse"))
    }

    fn small_uint(&mut self, what: &str) -> Result<u32, ScalarError> {
        let start = self.pos;
        let v = self.uint()?;
        u32::try_from(v).map_err(|_| ScalarError::Syntax { offset: start, message: format!("{what} too large") })
    }

    fn expr(&mut self) -> Result<Poly, ScalarError> {
        let mut acc = self.term()?;
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

    fn term(&mut self) -> Result<Poly, ScalarError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let rhs = self.factor()?;
            acc = acc.checked_mul(&rhs).map_err(|_| self.err("degree overflow"))?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ScalarError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let start = self.pos;
            let e = self.small_uint("exponent")?;
            let too_big = match base.degree() {
                Some(d) => d.saturating_mul(e) > MAX_DEGREE,
                None => false,
            };
            if too_big {
                return Err(ScalarError::Syntax { offset: start, message: "degree overflow".into() });
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                // `x` and its index form one token.
                if !matches!(self.src.get(self.pos), Some(b) if b.is_ascii_digit()) {
                    return Err(self.err("expected variable index after `x`"));
                }
                let idx = self.small_uint("variable index")? as usize;
                if idx == 0 || idx > self.nvars {
                    return Err(ScalarError::VariableOutOfRange { offset: start, index: idx, nvars: self.nvars });
                }
                Poly::var(self.nvars, idx)
            }
            Some(b'-') | Some(b'0'..=b'9') => {
                let negative = self.eat(b'-');
                if !matches!(self.peek(), Some(b'0'..=b'9')) {
                    return Err(self.err("expected digits"));
                }
                let mut num = self.uint()?;
                if negative {
                    num = -num;
                }
                let den = if self.eat(b'/') {
                    let start = self.pos;
                    let d = self.uint()?;
                    if d == BigInt::from(0) {
                        return Err(ScalarError::Syntax { offset: start, message: "zero denominator".into() });
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(Poly::constant(self.nvars, Rational::from_bigints(num, den)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses a polynomial in `x1..x{nvars}`.
pub fn parse_poly(src: &str, nvars: usize) -> Result<Poly, ScalarError> {
    if nvars > super::MAX_VARS {
        return Err(ScalarError::TooManyVariables(nvars));
    }
    let mut p = Parser { src: src.as_bytes(), pos: 0, nvars };
    let out = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}


#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::parse_poly;
    use crate::scalar::strategies::poly;

    proptest! {
        #[test]
        fn parse_print_round_trip(f in poly(4, 4)) {
            let text = f.to_string();
            prop_assert_eq!(parse_poly(&text, 4).unwrap(), f);
        }
    }
}
