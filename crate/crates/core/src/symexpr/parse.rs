//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | func '(' expr ')' | '(' expr ')'
//! number := digits ('.' digits)?
//! name   := [A-Za-z_][A-Za-z0-9_]*
//! func   := 'exp' | 'ln'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! reads as `-(x^2)`. Numbers become exact rationals (finite decimals
//! included). The names `u`, `u_x`, `u_t`, ... up to third order denote jet
//! variables; every other name is a parameter symbol.

use super::{Expr, Rat};
use num_bigint::BigInt;
use num_traits::Pow;
use std::fmt;

/// Parse failure with the byte offset where it occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Parse a textual expression into canonical form.
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    self.skip_ws();
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.bump();
                    self.skip_ws();
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    self.skip_ws();
                    factors.push(self.unary()?);
                }
                Some(b'/') => {
                    self.bump();
                    self.skip_ws();
                    factors.push(self.unary()?.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            self.skip_ws();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        let mut frac_digits = 0usize;
        if self.peek() == Some(b'.') {
            self.bump();
            let frac_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            frac_digits = self.pos - frac_start;
            if frac_digits == 0 {
                return Err(self.err("expected digits after decimal point"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let digits: String = text.chars().filter(|c| *c != '.').collect();
        let numer: BigInt = digits.parse().map_err(|_| ParseError {
            pos: start,
            msg: "invalid number".to_string(),
        })?;
        let denom = BigInt::from(10u32).pow(frac_digits as u64);
        Ok(Expr::rational(Rat::new(numer, denom)))
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "exp" || name == "ln" {
            self.skip_ws();
            if self.peek() != Some(b'(') {
                return Err(self.err(&format!("expected '(' after '{name}'")));
            }
            self.bump();
            let arg = self.expr()?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(if name == "exp" {
                Expr::exp(arg)
            } else {
                Expr::ln(arg)
            });
        }
        Ok(Expr::symbol(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(parse("2+3*4").unwrap(), Expr::int(14));
        assert_eq!(parse("2*3^2").unwrap(), Expr::int(18));
        assert_eq!(parse("-3^2").unwrap(), Expr::int(-9));
        assert_eq!(parse("(2+3)*4").unwrap(), Expr::int(20));
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("8/4/2").unwrap(), Expr::int(1));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.1").unwrap(), Expr::ratio(1, 10));
        assert_eq!(parse("2.50").unwrap(), Expr::ratio(5, 2));
        assert_eq!(parse("1.125").unwrap(), Expr::ratio(9, 8));
    }

    #[test]
    fn jets_and_symbols() {
        let e = parse("u_xx + omega*u_x").unwrap();
        let vars = e.free_vars();
        assert_eq!(vars.len(), 3);
        assert_eq!(parse("u_tx").unwrap(), Expr::symbol("u_tx"));
    }

    #[test]
    fn functions() {
        assert_eq!(parse("exp(0)").unwrap(), Expr::one());
        assert!(parse("exp").is_err());
        assert!(parse("ln + 2").is_err());
    }

    #[test]
    fn error_positions() {
        let e = parse("x + ").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse("x + $").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse("(x + t").unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse("x t").unwrap_err();
        assert_eq!(e.pos, 2);
    }

    #[test]
    fn whitespace_tolerant() {
        assert_eq!(parse(" x\t+\n t ").unwrap(), parse("x+t").unwrap());
    }
}
