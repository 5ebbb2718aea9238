//! Expression grammar:
//!
//! ```text
//! expr    := factor ( '*'? factor )*
//! factor  := '-'? primary
//! primary := 'q' ( '^' int )? | 'X' index ( '^' int )? | '1'
//!          | '(' '1' '+' ( 'q' ( '^' int )? '*'? )? expr? ')' ( '^' int )?
//! ```

use std::sync::Arc;

use super::{Monomial, NcError, RationalExpression};
use crate::surface::SigmaMatrix;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    sigma: Arc<SigmaMatrix>,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, NcError> {
        Err(NcError::Parse { pos: self.pos, msg: msg.into() })
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

    fn expect(&mut self, c: u8) -> Result<(), NcError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn int(&mut self) -> Result<i64, NcError> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err("expected an integer")
            }
        }
    }

    fn exponent(&mut self) -> Result<i64, NcError> {
        if self.eat(b'^') {
            self.int()
        } else {
            Ok(1)
        }
    }

    fn starts_factor(&mut self) -> bool {
        matches!(self.peek(), Some(b'q' | b'X' | b'1' | b'(' | b'-'))
    }

    fn expr(&mut self) -> Result<RationalExpression, NcError> {
        let mut out = self.factor()?;
        loop {
            // `*` is optional between factors.
            if self.eat(b'*') || self.starts_factor() {
                out = out.multiply(&self.factor()?);
            } else {
                return Ok(out);
            }
        }
    }

    fn factor(&mut self) -> Result<RationalExpression, NcError> {
        let negative = self.eat(b'-');
        let p = self.primary()?;
        if negative {
            let n = self.sigma.dim();
            let minus = Monomial { negative: true, qexp: 0, exps: vec![0; n] };
            Ok(RationalExpression::monomial(self.sigma.clone(), minus).multiply(&p))
        } else {
            Ok(p)
        }
    }

    fn primary(&mut self) -> Result<RationalExpression, NcError> {
        let s = self.sigma.clone();
        match self.peek() {
            Some(b'q') => {
                self.pos += 1;
                let e = self.exponent()?;
                Ok(RationalExpression::q_power(s, e))
            }
            Some(b'X') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let index: usize = match std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("").parse() {
                    Ok(i) => i,
                    Err(_) => return self.err("expected generator index after 'X'"),
                };
                if index == 0 || index > s.dim() {
                    return Err(NcError::GeneratorOutOfRange { index, n: s.dim() });
                }
                let e = self.exponent()?;
                Ok(RationalExpression::generator_pow(s, index, e))
            }
            Some(b'1') => {
                let v = self.int()?;
                if v != 1 {
                    return self.err("only unit coefficients are supported");
                }
                Ok(RationalExpression::one(s))
            }
            Some(b'(') => {
                self.pos += 1;
                if self.int()? != 1 {
                    return self.err("binomials start with '1 +'");
                }
                self.expect(b'+')?;
                let mut offset = 0;
                if self.peek() == Some(b'q') {
                    self.pos += 1;
                    offset = self.exponent()?;
                    self.eat(b'*');
                }
                let base = if self.peek() == Some(b')') { RationalExpression::one(s) } else { self.expr()? };
                self.expect(b')')?;
                let power = self.exponent()?;
                Ok(RationalExpression::binom(offset, base, power))
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression over the algebra with skew form `sigma`.
pub fn parse_expression(text: &str, sigma: Arc<SigmaMatrix>) -> Result<RationalExpression, NcError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, sigma };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<SigmaMatrix> {
        Arc::new(SigmaMatrix::from_rows(vec![vec![0, -2, 1], vec![2, 0, -1], vec![-1, 1, 0]]))
    }

    #[test]
    fn round_trip() {
        let s = sig();
        for text in [
            "1",
            "X1",
            "q^-2*X1^2*X3^-1",
            "-X2",
            "(1 + q^1*X1)^1*X2",
            "X2^-1*(1 + q^1*X1)^-1",
            "(1 + q^1*X1*(1 + q^3*X2^-1)^-2)^-1*q^4*X3",
            "(1 + q^0*-X1)^2",
        ] {
            let e = parse_expression(text, s.clone()).unwrap();
            assert_eq!(e.to_string(), text);
        }
    }

    #[test]
    fn juxtaposition_and_defaults() {
        let s = sig();
        let e = parse_expression("X1 X3 (1 + X2)", s.clone()).unwrap();
        assert_eq!(e.to_string(), "X1*X3*(1 + q^0*X2)^1");
        let e = parse_expression("(1+q^2 X1)^-1", s).unwrap();
        assert_eq!(e.to_string(), "(1 + q^2*X1)^-1");
    }

    #[test]
    fn errors() {
        let s = sig();
        for text in ["X4", "X0", "2*X1", "(1 + q^1*X1", "X1 +", "(2 + X1)", "q^", ""] {
            assert!(parse_expression(text, s.clone()).is_err(), "{text}");
        }
    }
}
