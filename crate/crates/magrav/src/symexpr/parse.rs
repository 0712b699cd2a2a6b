//! Recursive-descent parser for scalar expressions.
//!
//! Grammar (whitespace insignificant, `#` is not a comment character here —
//! comments belong to the scenario layer):
//!
//! ```text
//! expr    := ['-'] term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := base ['^' ['-'] digits]
//! base    := number | ident '(' expr ')' | ident | '(' expr ')'
//! number  := digits ['/' digits]
//! ident   := letter (letter | digit | '_')*
//! ```
//!
//! `ident '(' ... ')'` must name one of the unary functions `sin`, `cos`,
//! `exp`, `ln`, `sqrt`; any other identifier is resolved against the
//! [`VarTable`], and unknown or ghost/antifield identifiers are errors.

use super::{Expr, Func, VarTable};
use crate::error::{Error, Result};
use num::{BigInt, BigRational};

/// Parse `input` against `table`, producing a canonical expression.
pub fn parse(input: &str, table: &VarTable) -> Result<Expr> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
        table,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    table: &'a VarTable,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        self.skip_ws();
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.div(&f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let neg = self.eat(b'-');
            let digits = self.digits()?;
            let mag: i64 = digits
                .parse()
                .map_err(|_| self.err("exponent out of range"))?;
            let exp = if neg { -mag } else { mag };
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let ident = self.ident();
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    let f = Func::from_name(&ident)
                        .ok_or_else(|| self.err(&format!("unknown function `{ident}`")))?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.skip_ws();
                    if !self.eat(b')') {
                        return Err(self.err("expected `)` after function argument"));
                    }
                    Ok(Expr::func(f, &arg))
                } else {
                    let sym = self.table.resolve_scalar(&ident)?;
                    Ok(Expr::var(&sym))
                }
            }
            _ => Err(self.err("expected a number, identifier, or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let n = self.digits()?;
        let numer: BigInt = n.parse().expect("digits parse as integer");
        // A `/` directly between two digit runs is a rational literal; this
        // coincides with term-level division in value, so no ambiguity.
        if self.peek() == Some(b'/') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let d = self.digits()?;
                let denom: BigInt = d.parse().expect("digits parse as integer");
                if denom == BigInt::from(0) {
                    return Err(self.err("rational literal with zero denominator"));
                }
                return Ok(Expr::num(BigRational::new(numer, denom)));
            }
            self.pos = save;
        }
        Ok(Expr::num(BigRational::from_integer(numer)))
    }

    fn digits(&mut self) -> Result<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .to_string())
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii identifier")
            .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Symbol;

    fn t() -> VarTable {
        VarTable::with_vars(&["a", "b", "x0", "x1"])
    }

    fn v(s: &str) -> Expr {
        Expr::var(&Symbol::new(s))
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("a + b*x0^2", &t()).unwrap();
        let expect = v("a").add(&v("b").mul(&v("x0").pow(2)));
        assert_eq!(e, expect);
        // Division binds like multiplication, left associative.
        let e = parse("a/b*x0", &t()).unwrap();
        assert_eq!(e, v("a").div(&v("b")).mul(&v("x0")));
    }

    #[test]
    fn canonicalization_merges_on_parse() {
        let e = parse("1/2*(a + a)", &t()).unwrap();
        assert_eq!(e, v("a"));
        let e = parse("a - a", &t()).unwrap();
        assert!(e.is_zero_literal());
    }

    #[test]
    fn rational_literals_and_negative_exponents() {
        let e = parse("3/4", &t()).unwrap();
        assert_eq!(e, Expr::rational(3, 4));
        let e = parse("x0^-2", &t()).unwrap();
        assert_eq!(e, v("x0").pow(-2));
        let e = parse("-a", &t()).unwrap();
        assert_eq!(e, v("a").neg());
    }

    #[test]
    fn functions_parse_and_unknown_functions_fail() {
        let e = parse("sin(x0)^2 + cos(x0)^2", &t()).unwrap();
        let expect = Expr::func(Func::Sin, &v("x0"))
            .pow(2)
            .add(&Expr::func(Func::Cos, &v("x0")).pow(2));
        assert_eq!(e, expect);
        assert!(matches!(parse("tan(x0)", &t()), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_identifiers_are_rejected() {
        assert!(matches!(parse("q + 1", &t()), Err(Error::UnknownIdentifier(_))));
    }

    #[test]
    fn malformed_input_reports_position() {
        match parse("a + ", &t()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse("(a", &t()).is_err());
        assert!(parse("a b", &t()).is_err());
    }
}
