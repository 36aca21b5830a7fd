use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{Expr, Poly, Var};

/// `num / den` with polynomial numerator and denominator in `x`, `t`.
///
/// Negative powers of `x` and `t` are cleared into the denominator on
/// construction; parameters may keep negative powers.
#[derive(Debug, Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

fn coordinate(v: &Var) -> bool {
    matches!(v, Var::X | Var::T)
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        let mut clear = num
            .denominator_monomial(coordinate)
            .mul(&den.denominator_monomial(coordinate));
        let one = crate::expr::Rational::one();
        let mut num = num.mul_monomial(&one, &clear);
        let mut den = den.mul_monomial(&one, &clear);
        // Fold a single-term denominator back into the numerator.
        if let Some((c, m)) = den.as_monomial() {
            clear = m.pow(-1);
            num = num.mul_monomial(&c.recip(), &clear);
            den = Poly::one();
            let back = num.denominator_monomial(coordinate);
            if !back.is_one() {
                num = num.mul_monomial(&one, &back);
                den = Poly::term(one, back);
            }
        }
        Ok(RatFunc { num, den })
    }

    pub fn poly(p: Poly) -> RatFunc {
        RatFunc::new(p, Poly::one()).expect("nonzero denominator")
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn from_expr(e: &Expr) -> Result<RatFunc> {
        Ok(match e {
            Expr::Const(c) => RatFunc::poly(Poly::constant(c.clone())),
            Expr::Var(v) => RatFunc::poly(Poly::var(v.clone())),
            Expr::Sum(items) => {
                let mut acc = RatFunc::poly(Poly::zero());
                for x in items {
                    acc = acc.add(&RatFunc::from_expr(x)?)?;
                }
                acc
            }
            Expr::Product(items) => {
                let mut acc = RatFunc::poly(Poly::one());
                for x in items {
                    acc = acc.mul(&RatFunc::from_expr(x)?)?;
                }
                acc
            }
            Expr::Pow(b, n) => RatFunc::from_expr(b)?.pow(*n)?,
        })
    }

    pub fn parse(text: &str) -> Result<RatFunc> {
        let f = RatFunc::from_expr(&crate::expr::parse(text)?)?;
        if f.num.contains(|v| matches!(v, Var::Jet(_) | Var::Chi | Var::Zeta(_))) {
            return Err(Error::Invalid(format!("`{text}` must be a function of x and t only")));
        }
        Ok(f)
    }

    pub fn add(&self, o: &RatFunc) -> Result<RatFunc> {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone());
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    pub fn sub(&self, o: &RatFunc) -> Result<RatFunc> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> Result<RatFunc> {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn recip(&self) -> Result<RatFunc> {
        if self.num.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, n: i32) -> Result<RatFunc> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        RatFunc::new(base.num.pow(n.abs())?, base.den.pow(n.abs())?)
    }

    pub fn diff(&self, v: &Var) -> Result<RatFunc> {
        let dd = self.den.diff(v);
        if dd.is_zero() {
            return RatFunc::new(self.num.diff(v), self.den.clone());
        }
        RatFunc::new(
            &(&self.num.diff(v) * &self.den) - &(&self.num * &dd),
            &self.den * &self.den,
        )
    }

    pub fn substitute(&self, v: &Var, with: &Poly) -> Result<RatFunc> {
        let den = self.den.substitute(v, with)?;
        if den.is_zero() {
            return Err(Error::Domain(format!("denominator vanishes after {v} -> {with}")));
        }
        RatFunc::new(self.num.substitute(v, with)?, den)
    }

    pub fn substitute_all(&self, map: &std::collections::BTreeMap<Var, Poly>) -> Result<RatFunc> {
        let den = self.den.substitute_all(map)?;
        if den.is_zero() {
            return Err(Error::Domain(
                "denominator vanishes identically after substitution".into(),
            ));
        }
        RatFunc::new(self.num.substitute_all(map)?, den)
    }

    /// Exact equality of the represented functions.
    pub fn same_as(&self, o: &RatFunc) -> bool {
        (&(&self.num * &o.den) - &(&o.num * &self.den)).is_zero()
    }

    pub fn eval_f64(&self, value: &impl Fn(&Var) -> Option<f64>) -> Result<f64> {
        let d = self.den.eval_f64(value)?;
        if d == 0.0 {
            return Err(Error::Domain("evaluation on the zero set of the denominator".into()));
        }
        Ok(self.num.eval_f64(value)? / d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            let den = self.den.to_string();
            let den = if self.den.len() > 1 || den.contains(['*', '/', '^']) {
                format!("({den})")
            } else {
                den
            };
            if self.num.len() > 1 {
                write!(f, "({})/{den}", self.num)
            } else {
                write!(f, "{}/{den}", self.num)
            }
        }
    }
}
