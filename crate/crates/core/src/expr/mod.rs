//! Exact symbolic expressions over the jet space of one dependent variable
//! `u(x, t)`: parsing, canonical expansion, partial and total derivatives,
//! substitution.

mod parse;
mod poly;
mod tree;
mod var;

pub use parse::{parse, parse_with, ParseOptions};
pub use poly::{Monomial, Poly};
pub use tree::Expr;
pub use var::{Dir, JetVar, Symbol, Var};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub const DEFAULT_MAX_ORDER: u32 = 6;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses and expands in one step.
pub fn poly(text: &str) -> Result<Poly> {
    parse(text)?.expand()
}

/// Jet space with a bounded derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetSpace {
    pub max_order: u32,
}

impl Default for JetSpace {
    fn default() -> Self {
        JetSpace {
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

impl JetSpace {
    pub fn new(max_order: u32) -> Self {
        JetSpace { max_order }
    }

    pub fn check(&self, jet: JetVar) -> Result<JetVar> {
        if jet.order() > self.max_order {
            Err(Error::OrderOverflow {
                order: jet.order(),
                max: self.max_order,
            })
        } else {
            Ok(jet)
        }
    }

    /// `D_dir p = dp/d(dir) + sum over jets v of (dp/dv) * v_dir`.
    pub fn total_derivative(&self, p: &Poly, dir: Dir) -> Result<Poly> {
        p.derivation(|v| match v {
            Var::X if dir == Dir::X => Ok(Some(Poly::one())),
            Var::T if dir == Dir::T => Ok(Some(Poly::one())),
            Var::Jet(j) => Ok(Some(Poly::var(Var::Jet(self.check(j.bump(dir))?)))),
            _ => Ok(None),
        })
    }

    /// Applies `D_x^i D_t^j`.
    pub fn total_derivative_n(&self, p: &Poly, i: u32, j: u32) -> Result<Poly> {
        let mut out = p.clone();
        for _ in 0..i {
            out = self.total_derivative(&out, Dir::X)?;
        }
        for _ in 0..j {
            out = self.total_derivative(&out, Dir::T)?;
        }
        Ok(out)
    }
}

/// Formal partial derivative of an expression, returned in expanded form.
pub fn diff_partial(e: &Expr, v: &Var) -> Result<Expr> {
    Ok(e.expand()?.diff(v).into())
}

pub fn total_derivative(e: &Expr, dir: Dir) -> Result<Expr> {
    Ok(JetSpace::default().total_derivative(&e.expand()?, dir)?.into())
}
