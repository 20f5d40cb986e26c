//! Text form of [`Poly`]: `c * v1^e1 * ... * vn^en` terms joined by `+`/`-`.
//!
//! Exponents print as `x^3`, `t^(-1)`, `t^(3/2)`. The parser additionally
//! accepts parentheses and integer powers of parenthesized sums, so catalog
//! entries like `(1 + x*y)^2` are valid.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{is_negative, Monomial, Poly};
use super::var::{Exponent, Var};
use super::PolyError;
use crate::scalar::Coefficient;

fn write_exponent(f: &mut fmt::Formatter<'_>, e: &Exponent) -> fmt::Result {
    if e.is_integer() && *e.numer() > 0 {
        write!(f, "^{}", e.numer())
    } else {
        write!(f, "^({e})")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.factors().iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{v}")?;
            if !e.is_one() {
                write_exponent(f, e)?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = is_negative(c);
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag} * {m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, PolyError> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Num(text.parse().expect("digits")));
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(PolyError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, what: &str) -> Result<T, PolyError> {
        Err(PolyError::Parse(format!("{what} at token {}", self.pos)))
    }

    // sum := ['-'] product (('+'|'-') product)*
    fn sum<C: Coefficient>(&mut self) -> Result<Poly<C>, PolyError> {
        let mut acc = if self.eat(&Tok::Minus) {
            -self.product::<C>()?
        } else {
            self.eat(&Tok::Plus);
            self.product::<C>()?
        };
        loop {
            if self.eat(&Tok::Plus) {
                acc = &acc + &self.product::<C>()?;
            } else if self.eat(&Tok::Minus) {
                acc = &acc - &self.product::<C>()?;
            } else {
                return Ok(acc);
            }
        }
    }

    // product := power ('*' power)*
    fn product<C: Coefficient>(&mut self) -> Result<Poly<C>, PolyError> {
        let mut acc = self.power::<C>()?;
        while self.eat(&Tok::Star) {
            acc = &acc * &self.power::<C>()?;
        }
        Ok(acc)
    }

    // rational := int ['/' int]
    fn rational(&mut self) -> Result<BigRational, PolyError> {
        let Some(Tok::Num(n)) = self.next() else {
            return self.err("expected a number");
        };
        if self.eat(&Tok::Slash) {
            let Some(Tok::Num(d)) = self.next() else {
                return self.err("expected a denominator");
            };
            if d.is_zero() {
                return self.err("zero denominator");
            }
            Ok(BigRational::new(n, d))
        } else {
            Ok(BigRational::from_integer(n))
        }
    }

    // exponent := ['-'] rational | '(' ['-'] rational ')'
    fn exponent(&mut self) -> Result<Exponent, PolyError> {
        let paren = self.eat(&Tok::LParen);
        let neg = self.eat(&Tok::Minus);
        let r = self.rational()?;
        if paren && !self.eat(&Tok::RParen) {
            return self.err("expected `)`");
        }
        let r = if neg { -r } else { r };
        crate::scalar::rational_to_ratio_i64(&r)
            .ok_or_else(|| PolyError::Parse(format!("exponent {r} out of range")))
    }

    // power := atom ['^' exponent]
    fn power<C: Coefficient>(&mut self) -> Result<Poly<C>, PolyError> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let r = self.rational()?;
                Ok(Poly::constant(C::from_rational(&r)))
            }
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(name)) = self.next() else {
                    unreachable!()
                };
                let v: Var = name.parse().map_err(PolyError::Parse)?;
                let e = if self.eat(&Tok::Caret) {
                    self.exponent()?
                } else {
                    Exponent::one()
                };
                Poly::power_of(C::one(), v, e)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.sum::<C>()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                if self.eat(&Tok::Caret) {
                    let e = self.exponent()?;
                    if !e.is_integer() || e.is_negative() {
                        return self.err("a parenthesized sum needs a nonnegative integer power");
                    }
                    Ok(inner.pow(*e.numer() as u32))
                } else {
                    Ok(inner)
                }
            }
            _ => self.err("expected a term"),
        }
    }
}

/// Parses the text form into a polynomial over any coefficient type.
pub fn parse_poly<C: Coefficient>(s: &str) -> Result<Poly<C>, PolyError> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(PolyError::Parse("empty polynomial".into()));
    }
    let mut p = Parser { toks: &toks, pos: 0 };
    let out = p.sum::<C>()?;
    if p.pos != toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

impl FromStr for Poly<BigRational> {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_poly(s)
    }
}
