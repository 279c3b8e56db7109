//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' rational)?
//! base   := number | symbol | func '(' expr (',' expr)* ')' | '(' expr ')' | '-' base
//! ```
//!
//! Numbers are decimals or `p/q` rationals (single token when written without
//! spaces). Identifiers are ASCII `[A-Za-z_][A-Za-z0-9_]*`, optionally
//! followed by primes so that printed formal derivatives like `H'(r)`
//! round-trip.

use super::{Expr, UnFn};
use crate::error::{CurvError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String, u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(offset: usize, msg: impl Into<String>) -> CurvError {
    CurvError::Parse {
        offset,
        msg: msg.into(),
    }
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some((off, tok)) = lx.next_token()? {
            out.push((off, tok));
        }
        Ok(out)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let c = match self.peek() {
            None => return Ok(None),
            Some(c) => c,
        };
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => self.lex_number(start)?,
            c if c == b'_' || c.is_ascii_alphabetic() => self.lex_ident(),
            other => return Err(err(start, format!("unexpected character `{}`", other as char))),
        };
        Ok(Some((start, tok)))
    }

    fn digits(&mut self) -> &'a [u8] {
        let s = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[s..self.pos]
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok> {
        let int_part = self.digits();
        let mut value: BigRational;
        let mut is_plain_integer = !int_part.is_empty();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let frac = self.digits();
            if int_part.is_empty() && frac.is_empty() {
                return Err(err(start, "expected digits around decimal point"));
            }
            let int_str = std::str::from_utf8(int_part).unwrap();
            let frac_str = std::str::from_utf8(frac).unwrap();
            let numer: BigInt = format!("{}{}", int_str, frac_str).parse().unwrap();
            let denom = BigInt::from(10u32).pow(frac.len() as u32);
            value = BigRational::new(numer, denom);
            is_plain_integer = false;
        } else {
            if int_part.is_empty() {
                return Err(err(start, "expected number"));
            }
            let n: BigInt = std::str::from_utf8(int_part).unwrap().parse().unwrap();
            value = BigRational::from_integer(n);
        }
        // p/q rational written without spaces is one token
        if is_plain_integer
            && self.peek() == Some(b'/')
            && matches!(self.src.get(self.pos + 1), Some(c) if c.is_ascii_digit())
        {
            self.pos += 1;
            let denom_off = self.pos;
            let d = self.digits();
            let d: BigInt = std::str::from_utf8(d).unwrap().parse().unwrap();
            if d.is_zero() {
                return Err(err(denom_off, "rational with zero denominator"));
            }
            value /= BigRational::from_integer(d);
        }
        Ok(Tok::Num(value))
    }

    fn lex_ident(&mut self) -> Tok {
        let s = self.pos;
        while matches!(self.peek(), Some(c) if c == b'_' || c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[s..self.pos]).unwrap().to_string();
        let mut primes = 0u32;
        while self.peek() == Some(b'\'') {
            primes += 1;
            self.pos += 1;
        }
        Tok::Ident(name, primes)
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(err(self.offset(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    acc = Expr::add(acc, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    acc = Expr::mul(acc, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    acc = Expr::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let e = self.rational_exponent()?;
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    /// Exponents are rational literals, optionally negated or parenthesized.
    fn rational_exponent(&mut self) -> Result<BigRational> {
        match self.bump() {
            Some(Tok::Num(r)) => Ok(r),
            Some(Tok::Minus) => Ok(-self.rational_exponent()?),
            Some(Tok::LParen) => {
                let r = self.rational_exponent()?;
                self.expect(&Tok::RParen, "`)` after exponent")?;
                Ok(r)
            }
            _ => {
                self.idx = self.idx.saturating_sub(1);
                Err(err(self.offset(), "expected rational exponent after `^`"))
            }
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(Expr::constant(r)),
            Some(Tok::Minus) => Ok(Expr::neg(self.base()?)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name, primes)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.idx += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.idx += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(&Tok::RParen, "`)` after arguments")?;
                    if let Some(f) = UnFn::from_name(&name) {
                        if primes > 0 {
                            return Err(err(off, format!("cannot prime builtin `{name}`")));
                        }
                        if args.len() != 1 {
                            return Err(err(off, format!("`{name}` takes one argument")));
                        }
                        return Ok(Expr::un(f, args.pop().unwrap()));
                    }
                    Ok(Expr::func_primed(name, primes, args))
                } else {
                    if primes > 0 {
                        return Err(err(off, "primed symbol must be applied to arguments"));
                    }
                    Ok(Expr::sym(name))
                }
            }
            _ => Err(err(off, "expected number, symbol, `(` or `-`")),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.idx < p.toks.len() {
        return Err(err(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Like [`parse_expr`] but rejects free symbols outside `allowed`.
/// Function applications are not checked; they are resolved at evaluation.
pub fn parse_expr_strict(text: &str, allowed: &[&str]) -> Result<Expr> {
    let e = parse_expr(text)?;
    for s in e.symbols() {
        if !allowed.contains(&s.as_str()) {
            return Err(CurvError::UnboundSymbol { name: s });
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn precedence_and_shape() {
        let e = parse_expr("-(1) * t^2 + x").unwrap();
        assert!(matches!(e.node(), Node::Add(_, _)));
        let e = parse_expr("a + b * c").unwrap();
        if let Node::Add(_, rhs) = e.node() {
            assert!(matches!(rhs.node(), Node::Mul(_, _)));
        } else {
            panic!("expected Add at root");
        }
    }

    #[test]
    fn rational_tokens_vs_division() {
        // adjacent p/q is one constant; spaced form is folded by the
        // constructor, so both collapse to the same value
        assert_eq!(parse_expr("1/3").unwrap(), Expr::rational(1, 3));
        assert_eq!(parse_expr("1 / 3").unwrap(), Expr::rational(1, 3));
        assert_eq!(
            parse_expr("x/2").unwrap(),
            Expr::div(Expr::sym("x"), Expr::int(2))
        );
        assert_eq!(parse_expr("1.5").unwrap(), Expr::rational(3, 2));
    }

    #[test]
    fn exponents() {
        assert_eq!(parse_expr("x^2").unwrap(), Expr::pow_i(Expr::sym("x"), 2));
        assert_eq!(
            parse_expr("x^-1/2").unwrap(),
            Expr::pow(Expr::sym("x"), num_rational::BigRational::new((-1).into(), 2.into()))
        );
        assert_eq!(parse_expr("x^(1/2)").unwrap(), parse_expr("x^1/2").unwrap());
        assert!(parse_expr("x^y").is_err());
    }

    #[test]
    fn functions_and_primes() {
        let e = parse_expr("H'(r) * D(r)").unwrap();
        if let Node::Mul(a, _) = e.node() {
            assert!(matches!(a.node(), Node::Func { primes: 1, .. }));
        } else {
            panic!("expected Mul");
        }
        assert!(parse_expr("sin(x, y)").is_err());
        assert!(parse_expr("sin'(x)").is_err());
        assert!(parse_expr("H'").is_err());
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_expr("1 + ") {
            Err(CurvError::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_expr("2/0") {
            Err(CurvError::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_expr("x + $").is_err());
    }

    #[test]
    fn strict_symbol_table() {
        assert!(parse_expr_strict("t + x", &["t", "x"]).is_ok());
        assert!(matches!(
            parse_expr_strict("t + y", &["t", "x"]),
            Err(CurvError::UnboundSymbol { .. })
        ));
    }
}
