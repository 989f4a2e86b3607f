//! Text syntax: `(X^2+1)*Y0^2*Y1 - 3/2*Y2 + X`.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' int]
//! atom   := int ['/' int] | 'X' | 'Y' int | '(' expr ')'
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::ratpoly::write_unsigned_monomial;
use super::{DifferentialPolynomial, ExponentVector, RationalPolynomial};
use crate::error::{Error, Result};

/// Parses with the order set to the largest `Y` index present.
pub fn parse(text: &str) -> Result<DifferentialPolynomial> {
    Parser::new(text, None).run()
}

/// Parses with a fixed order `max_order`; larger `Y` indices are rejected.
pub fn parse_with_max_order(text: &str, max_order: usize) -> Result<DifferentialPolynomial> {
    Parser::new(text, Some(max_order)).run()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    max_order: Option<usize>,
    highest: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, max_order: Option<usize>) -> Self {
        Parser { src: text.as_bytes(), pos: 0, max_order, highest: 0 }
    }

    fn run(mut self) -> Result<DifferentialPolynomial> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error("unexpected character"));
        }
        Ok(p.with_order(self.max_order.unwrap_or(self.highest)))
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
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

    fn expr(&mut self) -> Result<DifferentialPolynomial> {
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DifferentialPolynomial> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<DifferentialPolynomial> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.integer()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DifferentialPolynomial> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.big_integer()?;
                let value = if self.eat(b'/') {
                    let at = self.pos;
                    let den = self.big_integer()?;
                    if den.is_zero() {
                        return Err(Error::Syntax { offset: at, message: "zero denominator".into() });
                    }
                    BigRational::new(num, den)
                } else {
                    BigRational::from_integer(num)
                };
                Ok(DifferentialPolynomial::constant(value, 0))
            }
            Some(b'X') => {
                self.pos += 1;
                Ok(DifferentialPolynomial::from_x_polynomial(RationalPolynomial::x(), 0))
            }
            Some(b'Y') => {
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.error("expected an index after Y"));
                }
                let index = self.integer()?;
                if let Some(max) = self.max_order {
                    if index > max {
                        return Err(Error::OrderExceeded { index, max });
                    }
                }
                self.highest = self.highest.max(index);
                Ok(DifferentialPolynomial::y(index, index))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(_) => Err(self.error("expected a term")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn big_integer(&mut self) -> Result<BigInt> {
        Ok(self.digits()?.parse().expect("ascii digits"))
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        self.digits()?
            .parse()
            .map_err(|_| Error::Syntax { offset: start, message: "number too large".into() })
    }
}

fn write_y_part(f: &mut fmt::Formatter<'_>, alpha: &ExponentVector) -> fmt::Result {
    let mut first = true;
    for (k, &e) in alpha.as_slice().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "Y{k}")?;
        } else {
            write!(f, "Y{k}^{e}")?;
        }
    }
    Ok(())
}

fn write_sign(f: &mut fmt::Formatter<'_>, negative: bool, first: bool) -> fmt::Result {
    match (first, negative) {
        (true, true) => f.write_str("-"),
        (true, false) => Ok(()),
        (false, true) => f.write_str(" - "),
        (false, false) => f.write_str(" + "),
    }
}

/// Canonical form: terms in decreasing antilex order, multi-monomial
/// coefficients in parentheses, the pure-`X` part spelled out.
pub(super) fn format_into(p: &DifferentialPolynomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    let mut first = true;
    for (alpha, q) in p.terms() {
        let monomials: Vec<(usize, &BigRational)> =
            q.coeffs().iter().enumerate().rev().filter(|(_, c)| !c.is_zero()).collect();
        if alpha.is_constant() {
            for (j, c) in monomials {
                write_sign(f, c.is_negative(), first)?;
                first = false;
                write_unsigned_monomial(f, c, j)?;
            }
        } else if let [(j, c)] = monomials[..] {
            write_sign(f, c.is_negative(), first)?;
            first = false;
            let unit = c.abs() == BigRational::from_integer(1.into());
            if !(unit && j == 0) {
                write_unsigned_monomial(f, c, j)?;
                f.write_str("*")?;
            }
            write_y_part(f, alpha)?;
        } else {
            write_sign(f, false, first)?;
            first = false;
            write!(f, "({q})*")?;
            write_y_part(f, alpha)?;
        }
    }
    Ok(())
}
