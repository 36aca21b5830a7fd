use std::fmt;

use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::var::Var;
use super::Rational;
use crate::error::Result;

/// Unexpanded expression tree.
///
/// Division is represented as `Pow(_, -1)`. Trees built by the parser never
/// carry a jet variable under a negative power; a negative power of any other
/// non-monomial expression is representable (rational functions of `x`, `t`)
/// but has no canonical [`Poly`] form, so [`Expr::expand`] rejects it.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rational),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Rational::from_integer(n.into()))
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            e => Expr::Product(vec![Expr::int(-1), e]),
        }
    }

    pub fn powi(self, n: i32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn expand(&self) -> Result<Poly> {
        Ok(match self {
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Var(v) => Poly::var(v.clone()),
            Expr::Sum(items) => {
                let mut acc = Poly::zero();
                for e in items {
                    acc += &e.expand()?;
                }
                acc
            }
            Expr::Product(items) => {
                let mut acc = Poly::one();
                for e in items {
                    acc = &acc * &e.expand()?;
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Expr::Pow(b, n) => b.expand()?.pow(*n)?,
        })
    }

    /// Structural substitution; the result is not expanded.
    pub fn substitute(&self, target: &Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == target => with.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(items) => Expr::Sum(items.iter().map(|e| e.substitute(target, with)).collect()),
            Expr::Product(items) => Expr::Product(items.iter().map(|e| e.substitute(target, with)).collect()),
            Expr::Pow(b, n) => Expr::Pow(Box::new(b.substitute(target, with)), *n),
        }
    }

    pub fn any_var(&self, pred: &dyn Fn(&Var) -> bool) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => pred(v),
            Expr::Sum(items) | Expr::Product(items) => items.iter().any(|e| e.any_var(pred)),
            Expr::Pow(b, _) => b.any_var(pred),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(items) if items.len() > 1 => 0,
            Expr::Product(items) if items.len() > 1 => 1,
            Expr::Const(c) if !c.is_integer() || c.is_negative() => 2,
            Expr::Pow(..) => 2,
            _ => 3,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl From<Poly> for Expr {
    fn from(p: Poly) -> Self {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let mut factors = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(Expr::Const(c.clone()));
            }
            for (v, e) in m.factors() {
                factors.push(match e {
                    1 => Expr::Var(v.clone()),
                    _ => Expr::Var(v.clone()).powi(*e),
                });
            }
            terms.push(match factors.len() {
                1 => factors.pop().expect("one factor"),
                _ => Expr::Product(factors),
            });
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().expect("one term"),
            _ => Expr::Sum(terms),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Sum(items) if items.is_empty() => f.write_str("0"),
            Expr::Product(items) if items.is_empty() => f.write_str("1"),
            Expr::Sum(items) => {
                for (k, e) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    e.write_child(f, 1)?;
                }
                Ok(())
            }
            Expr::Product(items) => {
                for (k, e) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    e.write_child(f, 2)?;
                }
                Ok(())
            }
            Expr::Pow(b, n) => {
                b.write_child(f, 3)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_substitution_is_not_expanded() {
        let e = Expr::Sum(vec![Expr::var(Var::jet(0, 1)), Expr::var(Var::jet(1, 0))]);
        let with = Expr::Product(vec![Expr::int(-1), Expr::var(Var::U), Expr::var(Var::jet(1, 0))]);
        let s = e.substitute(&Var::jet(0, 1), &with);
        assert_eq!(s.to_string(), "-1*u*u_x + u_x");
        let untouched = Expr::Sum(vec![Expr::var(Var::X), Expr::var(Var::T)]);
        assert_eq!(untouched.substitute(&Var::param("s"), &Expr::int(1)), untouched);
    }

    #[test]
    fn poly_roundtrip_through_tree() {
        let p = &Poly::var(Var::X) * &Poly::param("a").pow(-1).unwrap();
        assert_eq!(Expr::from(p.clone()).expand().unwrap(), p);
    }
}
