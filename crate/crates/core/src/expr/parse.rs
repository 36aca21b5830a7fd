//! Infix DSL for expressions and equations over the jet space.
//!
//! Operators `+ - * / ^`, integer, decimal and `p/q` literals, parentheses.
//! Reserved names are `x`, `t`, `u`, derivative tokens (`u_x`, `u_xx`,
//! `u_x3`, `u_xt`, `u_x2t`, `u_{x^3}`), and the reduced coordinates `chi`,
//! `zeta`, `zeta_chi`, `zeta_chi3`. Every other identifier is a parameter.
//! An equation `lhs = rhs` is normalised to `lhs - rhs`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use super::tree::Expr;
use super::var::{JetVar, Var};
use super::{Rational, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub max_order: u32,
    /// When set, identifiers outside this set are rejected.
    pub params: Option<BTreeSet<String>>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_order: DEFAULT_MAX_ORDER,
            params: None,
        }
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, &ParseOptions::default())
}

pub fn parse_with(text: &str, opts: &ParseOptions) -> Result<Expr> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        opts,
        len: text.len(),
    };
    let lhs = p.expr()?;
    let out = if p.eat(&Tok::Eq) {
        let rhs = p.expr()?;
        Expr::Sum(vec![lhs, rhs.neg()])
    } else {
        lhs
    };
    if let Some((tok, at)) = p.tokens.get(p.pos) {
        return Err(Error::Syntax {
            pos: *at,
            msg: format!("unexpected {tok:?}"),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (at, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '·' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, at));
            k += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_ascii_digit() || chars[k].1 == '.') {
                k += 1;
            }
            let s: String = chars[start..k].iter().map(|(_, c)| c).collect();
            out.push((Tok::Num(decimal(&s, at)?), at));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = k;
            let mut s = String::new();
            while k < chars.len() {
                let ch = chars[k].1;
                if ch.is_alphanumeric() || ch == '_' {
                    s.push(ch);
                    k += 1;
                } else if ch == '{' && s.ends_with('_') {
                    // u_{x^3t} style subscript: copy through the closing brace.
                    k += 1;
                    while k < chars.len() && chars[k].1 != '}' {
                        if chars[k].1 != '^' && !chars[k].1.is_whitespace() {
                            s.push(chars[k].1);
                        }
                        k += 1;
                    }
                    if k == chars.len() {
                        return Err(Error::Syntax {
                            pos: chars[start].0,
                            msg: "unterminated `{` in subscript".into(),
                        });
                    }
                    k += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), at));
            continue;
        }
        return Err(Error::Syntax {
            pos: at,
            msg: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

fn decimal(s: &str, at: usize) -> Result<Rational> {
    let bad = || Error::Syntax {
        pos: at,
        msg: format!("malformed number `{s}`"),
    };
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = BigInt::from(10u32).pow(frac.len() as u32);
    Ok(Rational::new(n, d))
}

/// Parses the letters after `u_`: runs of `x`/`t`, each optionally followed
/// by a count.
fn jet_subscript(sub: &str) -> Option<JetVar> {
    let b = sub.as_bytes();
    if b.is_empty() {
        return None;
    }
    let (mut i, mut j) = (0u32, 0u32);
    let mut k = 0;
    while k < b.len() {
        let letter = b[k];
        k += 1;
        let start = k;
        while k < b.len() && b[k].is_ascii_digit() {
            k += 1;
        }
        let n: u32 = if start == k { 1 } else { sub[start..k].parse().ok()? };
        match letter {
            b'x' => i += n,
            b't' => j += n,
            _ => return None,
        }
    }
    Some(JetVar::new(i, j))
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    opts: &'a ParseOptions,
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn at(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, a)| *a).unwrap_or(self.len)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.at(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat(&Tok::Star) {
                factors.push(self.unary()?);
            } else if self.eat(&Tok::Slash) {
                let at = self.at();
                let den = self.unary()?;
                factors.push(self.reciprocal(den, at)?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            fold_constants(factors)
        })
    }

    fn reciprocal(&self, den: Expr, at: usize) -> Result<Expr> {
        if den.any_var(&|v| matches!(v, Var::Jet(_) | Var::Zeta(_))) {
            return Err(Error::Syntax {
                pos: at,
                msg: "division by an expression containing the dependent variable".into(),
            });
        }
        if let Expr::Const(c) = &den {
            if c.is_zero() {
                return Err(Error::Syntax {
                    pos: at,
                    msg: "division by zero".into(),
                });
            }
            return Ok(Expr::Const(c.recip()));
        }
        if matches!(den.expand(), Ok(p) if p.is_zero()) {
            return Err(Error::Syntax {
                pos: at,
                msg: "division by zero".into(),
            });
        }
        Ok(den.powi(-1))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(self.unary()?.neg());
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base_at = self.at();
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let n = self.exponent()?;
        if n < 0 {
            return self.reciprocal(base, base_at).map(|r| match r {
                Expr::Const(c) => Expr::Const(c.pow(-n)),
                Expr::Pow(b, _) => Expr::Pow(b, n),
                other => other,
            });
        }
        Ok(match base {
            Expr::Const(c) => Expr::Const(c.pow(n)),
            b => b.powi(n),
        })
    }

    fn exponent(&mut self) -> Result<i32> {
        let neg = self.eat(&Tok::Minus);
        let paren = !neg && self.eat(&Tok::LParen);
        let inner_neg = paren && self.eat(&Tok::Minus);
        let n = match self.peek().cloned() {
            Some(Tok::Num(r)) if r.is_integer() => {
                self.pos += 1;
                i32::try_from(r.to_integer()).or_else(|_| self.err("exponent too large"))?
            }
            _ => return self.err("expected an integer exponent"),
        };
        if paren && !self.eat(&Tok::RParen) {
            return self.err("expected `)`");
        }
        Ok(if neg || inner_neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.at();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Expr::Const(r))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.identifier(&name, at).map(Expr::Var)
            }
            Some(t) => self.err(format!("unexpected {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn identifier(&self, name: &str, at: usize) -> Result<Var> {
        match name {
            "x" => return Ok(Var::X),
            "t" => return Ok(Var::T),
            "u" => return Ok(Var::U),
            "chi" => return Ok(Var::Chi),
            "zeta" => return Ok(Var::Zeta(0)),
            _ => {}
        }
        if let Some(sub) = name.strip_prefix("u_") {
            let jet = jet_subscript(sub).ok_or_else(|| Error::UnknownSymbol(name.into()))?;
            if jet.order() > self.opts.max_order {
                return Err(Error::OrderOverflow {
                    order: jet.order(),
                    max: self.opts.max_order,
                });
            }
            return Ok(Var::Jet(jet));
        }
        if let Some(sub) = name.strip_prefix("zeta_chi") {
            let k = if sub.is_empty() {
                1
            } else {
                sub.parse::<u32>().map_err(|_| Error::UnknownSymbol(name.into()))?
            };
            return Ok(Var::Zeta(k));
        }
        if name.starts_with('_') {
            return Err(Error::Syntax {
                pos: at,
                msg: format!("identifier `{name}` may not start with `_`"),
            });
        }
        if let Some(allowed) = &self.opts.params {
            if !allowed.contains(name) {
                return Err(Error::UnknownSymbol(name.into()));
            }
        }
        Ok(Var::param(name))
    }
}

// Keeps `1/2*x` from turning into a three-factor product.
fn fold_constants(factors: Vec<Expr>) -> Expr {
    let mut c: Option<Rational> = None;
    let mut rest = Vec::new();
    for f in factors {
        match f {
            Expr::Const(k) => c = Some(c.map_or(k.clone(), |acc| acc * k)),
            other => rest.push(other),
        }
    }
    if let Some(k) = c {
        if rest.is_empty() {
            return Expr::Const(k);
        }
        rest.insert(0, Expr::Const(k));
    }
    if rest.len() == 1 {
        rest.pop().expect("one factor")
    } else {
        Expr::Product(rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Monomial, Poly};

    fn p(s: &str) -> Poly {
        parse(s).unwrap().expand().unwrap()
    }

    #[test]
    fn flagship_equation_moves_to_one_side() {
        let a = p("u_t + a*u*u_x + b*u_x3 + c*u_x4 + d*u_x5 = e*u_x2");
        let b = p("u_t + a*u*u_x + b*u_x3 + c*u_x4 + d*u_x5 - e*u_x2");
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(
            a.coeff(&Monomial::from_factors([(Var::jet(2, 0), 1), (Var::param("e"), 1)])),
            Rational::from_integer((-1).into())
        );
    }

    #[test]
    fn zero_and_cancellation() {
        assert!(p("0").is_zero());
        assert!(p("u_x2 - u_x2").is_zero());
        assert!(p("a*(u_t - u_t)").is_zero());
    }

    #[test]
    fn derivative_spellings_agree() {
        for s in ["u_xxx", "u_x3", "u_{x^3}", "u_{xxx}"] {
            assert_eq!(p(s), Poly::var(Var::jet(3, 0)), "{s}");
        }
        assert_eq!(p("u_x2t"), Poly::var(Var::jet(2, 1)));
        assert_eq!(p("u_{x^2t}"), Poly::var(Var::jet(2, 1)));
        assert_eq!(p("u_tx"), Poly::var(Var::jet(1, 1)));
        assert_eq!(p("zeta_chi3"), Poly::var(Var::Zeta(3)));
    }

    #[test]
    fn rationals_and_negative_powers() {
        assert_eq!(p("1/2"), Poly::constant(Rational::new(1.into(), 2.into())));
        assert_eq!(p("0.25*x"), p("x/4"));
        assert_eq!(p("t^-1"), p("1/t"));
        assert_eq!(p("t^(-2)"), p("1/(t*t)"));
        assert_eq!(p("(x + a*c1)/(a*t)"), p("x/(a*t) + c1/t"));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("u_t + * u") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("u_y"), Err(Error::UnknownSymbol(_))));
        assert!(matches!(parse("u_x7"), Err(Error::OrderOverflow { order: 7, max: 6 })));
        assert!(matches!(parse("1/u"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x/(a - a)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
        let strict = ParseOptions {
            params: Some(["a".to_string()].into_iter().collect()),
            ..ParseOptions::default()
        };
        assert!(matches!(parse_with("a*q", &strict), Err(Error::UnknownSymbol(s)) if s == "q"));
    }

    #[test]
    fn non_monomial_division_parses_but_does_not_expand() {
        let e = parse("x/(t - s)").unwrap();
        assert!(matches!(e.expand(), Err(Error::NonPolynomial(_))));
    }
}
