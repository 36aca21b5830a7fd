use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::var::Var;
use super::Rational;
use crate::error::{Error, Result};

/// Product of variable powers, sorted by the canonical variable ordering.
/// Exponents are never zero; negative exponents are allowed (Laurent).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Var, i32)>) -> Self {
        factors
            .into_iter()
            .filter(|(_, e)| *e != 0)
            .fold(Monomial::one(), |m, (v, e)| m.mul(&Monomial(vec![(v, e)])))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| *e as i64).sum()
    }

    pub fn exponent(&self, v: &Var) -> i32 {
        self.0.iter().find(|(w, _)| w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * n)).collect())
    }

    /// Removes `v` entirely, returning the exponent it carried.
    pub fn take(&self, v: &Var) -> (i32, Monomial) {
        let e = self.exponent(v);
        let rest = self.0.iter().filter(|(w, _)| w != v).cloned().collect();
        (e, Monomial(rest))
    }

    /// Splits into the factors satisfying `pred` and the remainder.
    pub fn split(&self, pred: impl Fn(&Var) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(v, _)| pred(v));
        (Monomial(a), Monomial(b))
    }

    pub fn contains(&self, pred: impl Fn(&Var) -> bool) -> bool {
        self.0.iter().any(|(v, _)| pred(v))
    }
}

// Graded lexicographic: total degree first, then the factor lists.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_factors(f: &mut fmt::Formatter<'_>, parts: &[String]) -> fmt::Result {
    f.write_str(&parts.join("*"))
}

fn factor_strings(factors: &[(Var, i32)], negate: bool) -> Vec<String> {
    factors
        .iter()
        .filter(|(_, e)| (*e < 0) == negate)
        .map(|(v, e)| match e.abs() {
            1 => v.to_string(),
            n => format!("{v}^{n}"),
        })
        .collect()
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, &Rational::one(), self)
    }
}

/// Writes `|c| * m` in division form, e.g. `3*x/(2*a)`.
fn write_term(f: &mut fmt::Formatter<'_>, c: &Rational, m: &Monomial) -> fmt::Result {
    let c = c.abs();
    let mut num = factor_strings(&m.0, false);
    let mut den = factor_strings(&m.0, true);
    if !c.numer().is_one() || num.is_empty() {
        num.insert(0, c.numer().to_string());
    }
    if !c.denom().is_one() {
        den.insert(0, c.denom().to_string());
    }
    write_factors(f, &num)?;
    match den.len() {
        0 => Ok(()),
        1 => write!(f, "/{}", den[0]),
        _ => {
            f.write_str("/(")?;
            write_factors(f, &den)?;
            f.write_str(")")
        }
    }
}

/// Canonical expanded form: a finite Laurent polynomial with exact rational
/// coefficients. Zero coefficients are never stored, so structural equality
/// is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Rational::one(), Monomial::var(v))
    }

    pub fn param(name: &str) -> Self {
        Poly::var(Var::param(name))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The single term of a monomial polynomial.
    pub fn as_monomial(&self) -> Option<(Rational, Monomial)> {
        if self.terms.len() != 1 {
            return None;
        }
        self.terms.iter().next().map(|(m, c)| (c.clone(), m.clone()))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Rational, mono: &Monomial) -> Poly {
        let mut out = Poly::zero();
        if c.is_zero() {
            return out;
        }
        for (m, k) in &self.terms {
            out.add_term(m.mul(mono), k * c);
        }
        out
    }

    /// Integer power. Negative powers are only defined for single terms.
    pub fn pow(&self, n: i32) -> Result<Poly> {
        if n < 0 {
            let (c, m) = self
                .as_monomial()
                .ok_or_else(|| Error::NonPolynomial(format!("({self})^{n}")))?;
            let inv = c.recip().pow(-n);
            return Ok(Poly::term(inv, m.pow(n)));
        }
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn contains(&self, pred: impl Fn(&Var) -> bool) -> bool {
        self.terms.keys().any(|m| m.contains(&pred))
    }

    pub fn has_var(&self, v: &Var) -> bool {
        self.contains(|w| w == v)
    }

    /// Highest order of any jet variable present (`None` if there are none).
    pub fn jet_order(&self) -> Option<u32> {
        self.vars().iter().filter_map(|v| v.as_jet()).map(|j| j.order()).max()
    }

    /// Formal partial derivative, every other variable held fixed.
    pub fn diff(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let dm = m.mul(&Monomial(vec![(v.clone(), -1)]));
            out.add_term(dm, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Applies a derivation determined by its values on variables:
    /// `D(p) = sum_v (dp/dv) * image(v)`. Variables mapped to `None` are
    /// treated as constants.
    pub fn derivation<F>(&self, mut image: F) -> Result<Poly>
    where
        F: FnMut(&Var) -> Result<Option<Poly>>,
    {
        let mut cache: BTreeMap<Var, Option<Poly>> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (v, e) in m.factors() {
                if !cache.contains_key(v) {
                    let img = image(v)?;
                    cache.insert(v.clone(), img);
                }
                let Some(img) = &cache[v] else { continue };
                let rest = m.mul(&Monomial(vec![(v.clone(), -1)]));
                let k = c * Rational::from_integer(BigInt::from(*e));
                for (im, ic) in img.terms() {
                    out.add_term(rest.mul(im), &k * ic);
                }
            }
        }
        Ok(out)
    }

    /// Replaces every occurrence of `v` by `with`, expanding the result.
    pub fn substitute(&self, v: &Var, with: &Poly) -> Result<Poly> {
        let mut powers: BTreeMap<i32, Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.take(v);
            if e == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            if !powers.contains_key(&e) {
                powers.insert(e, with.pow(e)?);
            }
            for (pm, pc) in powers[&e].terms() {
                out.add_term(rest.mul(pm), c * pc);
            }
        }
        Ok(out)
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_all(&self, map: &BTreeMap<Var, Poly>) -> Result<Poly> {
        let mut cache: BTreeMap<(Var, i32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::one();
            let mut kept = Vec::new();
            for (v, e) in m.factors() {
                match map.get(v) {
                    Some(with) => {
                        let key = (v.clone(), *e);
                        if !cache.contains_key(&key) {
                            cache.insert(key.clone(), with.pow(*e)?);
                        }
                        acc = &acc * &cache[&key];
                    }
                    None => kept.push((v.clone(), *e)),
                }
            }
            out += &acc.mul_monomial(c, &Monomial(kept));
        }
        Ok(out)
    }

    /// Renames variables; the mapping must not merge distinct monomials in a
    /// way that changes ordering assumptions (it is re-sorted regardless).
    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mono = Monomial::from_factors(m.factors().iter().map(|(v, e)| (f(v), *e)));
            out.add_term(mono, c.clone());
        }
        out
    }

    /// Groups terms by their factors over the variables selected by `pred`;
    /// each group's coefficient is a polynomial in the remaining variables.
    pub fn collect_by(&self, pred: impl Fn(&Var) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (sel, rest) = m.split(&pred);
            out.entry(sel).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Replaces parameters with exact values.
    pub fn instantiate(&self, values: &BTreeMap<Var, Rational>) -> Result<Poly> {
        let map = values
            .iter()
            .map(|(v, r)| (v.clone(), Poly::constant(r.clone())))
            .collect();
        self.substitute_all(&map)
    }

    /// Evaluates in floating point. Every variable must be bound.
    pub fn eval_f64(&self, value: impl Fn(&Var) -> Option<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().ok_or_else(|| Error::Numeric(format!("coefficient {c}")))?;
            for (v, e) in m.factors() {
                let x = value(v).ok_or_else(|| Error::UnknownSymbol(v.to_string()))?;
                t *= x.powi(*e);
            }
            total += t;
        }
        Ok(total)
    }

    /// `Some(k)` when `self = k * other` for a nonzero rational `k`.
    pub fn ratio_to(&self, other: &Poly) -> Option<Rational> {
        if self.len() != other.len() || self.is_zero() {
            return None;
        }
        let (m0, c0) = other.terms.iter().next()?;
        let k = self.terms.get(m0)? / c0;
        other
            .terms
            .iter()
            .all(|(m, c)| self.terms.get(m) == Some(&(c * &k)))
            .then_some(k)
    }

    /// Monomial that clears every negative exponent when multiplied in,
    /// restricted to the variables selected by `pred`.
    pub fn denominator_monomial(&self, pred: impl Fn(&Var) -> bool) -> Monomial {
        let mut worst: BTreeMap<Var, i32> = BTreeMap::new();
        for m in self.terms.keys() {
            for (v, e) in m.factors() {
                if *e < 0 && pred(v) {
                    let w = worst.entry(v.clone()).or_insert(0);
                    *w = (*w).max(-e);
                }
            }
        }
        Monomial(worst.into_iter().collect())
    }

    /// Leading term under the canonical ordering (largest monomial).
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Keeps only the terms whose monomial satisfies `pred`.
    pub fn retain(&self, pred: impl Fn(&Monomial) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| pred(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Self {
        Poly::var(v)
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            match (k, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write_term(f, c, m)?;
        }
        Ok(())
    }
}

impl std::ops::AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl std::ops::SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn binomial_square() {
        let u = Poly::var(Var::U);
        let ux = Poly::var(Var::jet(1, 0));
        let sq = (&u + &ux).pow(2).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coeff(&Monomial::from_factors([(Var::U, 2)])), r(1, 1));
        assert_eq!(
            sq.coeff(&Monomial::from_factors([(Var::U, 1), (Var::jet(1, 0), 1)])),
            r(2, 1)
        );
    }

    #[test]
    fn laurent_cancellation() {
        let t = Poly::var(Var::T);
        let inv = t.pow(-1).unwrap();
        assert_eq!(&t * &inv, Poly::one());
        assert!((&t + &Poly::one()).pow(-1).is_err());
    }

    #[test]
    fn display_uses_division_form() {
        let p = Poly::term(
            r(-1, 1),
            Monomial::from_factors([(Var::X, 1), (Var::param("a"), -1), (Var::T, -1)]),
        );
        assert_eq!(p.to_string(), "-x/(t*a)");
        let q = Poly::term(r(3, 2), Monomial::from_factors([(Var::param("a"), -1)]));
        assert_eq!(q.to_string(), "3/(2*a)");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn ratio_detects_scalar_multiples() {
        let x = Poly::var(Var::X);
        let p = &x + &Poly::one();
        assert_eq!(p.scale(&r(-3, 2)).ratio_to(&p), Some(r(-3, 2)));
        assert_eq!((&x + &Poly::int(2)).ratio_to(&p), None);
    }
}
