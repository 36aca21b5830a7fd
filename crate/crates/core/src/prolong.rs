//! Vector fields on `(x, t, u)` and their prolongations to jet space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{Dir, JetSpace, JetVar, Poly, Rational, Var};

/// `xi * d/dx + eta * d/dt + phi * d/du`, coefficients in `x, t, u` and
/// parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VectorField {
    pub xi: Poly,
    pub eta: Poly,
    pub phi: Poly,
}

impl VectorField {
    pub fn new(xi: Poly, eta: Poly, phi: Poly) -> Result<Self> {
        let v = VectorField { xi, eta, phi };
        for c in v.components() {
            if c.contains(|w| matches!(w, Var::Jet(j) if j.order() > 0) || matches!(w, Var::Chi | Var::Zeta(_))) {
                return Err(Error::Invalid(format!(
                    "vector field coefficient `{c}` depends on derivatives of u"
                )));
            }
        }
        Ok(v)
    }

    pub fn zero() -> Self {
        VectorField {
            xi: Poly::zero(),
            eta: Poly::zero(),
            phi: Poly::zero(),
        }
    }

    pub fn components(&self) -> [&Poly; 3] {
        [&self.xi, &self.eta, &self.phi]
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        self.map(|p| p.scale(c))
    }

    pub fn mul_poly(&self, k: &Poly) -> VectorField {
        self.map(|p| p * k)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> VectorField {
        VectorField {
            xi: f(&self.xi),
            eta: f(&self.eta),
            phi: f(&self.phi),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            xi: &self.xi + &other.xi,
            eta: &self.eta + &other.eta,
            phi: &self.phi + &other.phi,
        }
    }

    /// The vector field as a derivation on functions of `(x, t, u)`.
    pub fn act(&self, f: &Poly) -> Poly {
        let mut out = &self.xi * &f.diff(&Var::X);
        out += &(&self.eta * &f.diff(&Var::T));
        out += &(&self.phi * &f.diff(&Var::U));
        out
    }

    pub fn instantiate(&self, values: &BTreeMap<Var, Rational>) -> Result<VectorField> {
        Ok(VectorField {
            xi: self.xi.instantiate(values)?,
            eta: self.eta.instantiate(values)?,
            phi: self.phi.instantiate(values)?,
        })
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, d) in [(&self.xi, "d_x"), (&self.eta, "d_t"), (&self.phi, "d_u")] {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.as_constant().is_some_and(|k| k.is_one()) {
                f.write_str(d)?;
            } else if c.len() == 1 {
                write!(f, "{c}*{d}")?;
            } else {
                write!(f, "({c})*{d}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Prolonged coefficients `phi^J` keyed by multi-index `J = (i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedField {
    pub base: VectorField,
    pub order: u32,
    pub coeffs: BTreeMap<JetVar, Poly>,
}

impl ProlongedField {
    pub fn coeff(&self, j: JetVar) -> Option<&Poly> {
        self.coeffs.get(&j)
    }
}

/// Coefficients `phi^J` for the requested multi-indices (and whatever the
/// recursion passes through), computed by
/// `phi^{J,x} = D_x phi^J - (D_x xi) u_{J,x} - (D_x eta) u_{J,t}` and its
/// `t` counterpart, starting from `phi^() = phi`.
pub fn prolong_coeffs(v: &VectorField, wanted: &BTreeSet<JetVar>, space: &JetSpace) -> Result<BTreeMap<JetVar, Poly>> {
    let dxi = [
        space.total_derivative(&v.xi, Dir::X)?,
        space.total_derivative(&v.xi, Dir::T)?,
    ];
    let deta = [
        space.total_derivative(&v.eta, Dir::X)?,
        space.total_derivative(&v.eta, Dir::T)?,
    ];
    let mut out: BTreeMap<JetVar, Poly> = BTreeMap::new();
    out.insert(JetVar::U, v.phi.clone());
    // Graded order guarantees parents are computed before children.
    let mut needed: BTreeSet<JetVar> = BTreeSet::new();
    for w in wanted {
        let mut cur = *w;
        while cur.order() > 0 && needed.insert(cur) {
            cur = parent(cur).0;
        }
    }
    for j in needed {
        let (p, dir) = parent(j);
        let k = dir as usize;
        let mut c = space.total_derivative(&out[&p], dir)?;
        let ux = Poly::var(Var::Jet(space.check(p.bump(Dir::X))?));
        let ut = Poly::var(Var::Jet(space.check(p.bump(Dir::T))?));
        c -= &(&dxi[k] * &ux);
        c -= &(&deta[k] * &ut);
        out.insert(j, c);
    }
    out.remove(&JetVar::U);
    Ok(out)
}

// x-derivatives are peeled first so that mixed indices reuse the pure-t chain.
fn parent(j: JetVar) -> (JetVar, Dir) {
    if j.i > 0 {
        (JetVar::new(j.i - 1, j.j), Dir::X)
    } else {
        (JetVar::new(0, j.j - 1), Dir::T)
    }
}

/// `n`-th prolongation: every coefficient `phi^J` with `1 <= |J| <= n`.
pub fn prolong(v: &VectorField, n: u32, space: &JetSpace) -> Result<ProlongedField> {
    if n == 0 || n >= space.max_order {
        return Err(Error::OrderOverflow {
            order: n + 1,
            max: space.max_order,
        });
    }
    let wanted: BTreeSet<JetVar> = (1..=n)
        .flat_map(|k| (0..=k).map(move |i| JetVar::new(i, k - i)))
        .collect();
    let coeffs = prolong_coeffs(v, &wanted, space)?;
    for (j, c) in &coeffs {
        if let Some(ord) = c.jet_order() {
            if ord > j.order() {
                return Err(Error::Verification(format!(
                    "phi^{j} contains a jet variable of order {ord}"
                )));
            }
        }
    }
    Ok(ProlongedField {
        base: v.clone(),
        order: n,
        coeffs,
    })
}

/// `Pr^(n) v [f]`, expanded. `f` may involve jets of order at most `n`.
pub fn apply_prolonged(v: &VectorField, n: u32, f: &Poly, space: &JetSpace) -> Result<Poly> {
    let jets: BTreeSet<JetVar> = f
        .vars()
        .iter()
        .filter_map(Var::as_jet)
        .filter(|j| j.order() > 0)
        .collect();
    if let Some(j) = jets.iter().find(|j| j.order() > n) {
        return Err(Error::OrderOverflow {
            order: j.order(),
            max: n,
        });
    }
    let coeffs = prolong_coeffs(v, &jets, space)?;
    let mut out = v.act(f);
    for j in &jets {
        out += &(&coeffs[j] * &f.diff(&Var::Jet(*j)));
    }
    Ok(out)
}

/// Direct evaluation of `phi^J = D_J(phi - xi u_x - eta u_t) + xi u_{J,x} + eta u_{J,t}`.
/// Slower than the recursion; kept as an independent check.
pub fn prolong_closed_form(v: &VectorField, j: JetVar, space: &JetSpace) -> Result<Poly> {
    let q = &(&v.phi - &(&v.xi * &Poly::var(Var::jet(1, 0)))) - &(&v.eta * &Poly::var(Var::jet(0, 1)));
    let mut out = space.total_derivative_n(&q, j.i, j.j)?;
    out += &(&v.xi * &Poly::var(Var::Jet(space.check(j.bump(Dir::X))?)));
    out += &(&v.eta * &Poly::var(Var::Jet(space.check(j.bump(Dir::T))?)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly;

    fn vf(xi: &str, eta: &str, phi: &str) -> VectorField {
        VectorField::new(poly(xi).unwrap(), poly(eta).unwrap(), poly(phi).unwrap()).unwrap()
    }

    const PDE: &str = "u_t + a*u*u_x + b*u_x3 + c*u_x4 + d*u_x5 - e*u_x2";

    #[test]
    fn translation_has_trivial_prolongation() {
        let p = prolong(&vf("1", "0", "0"), 5, &JetSpace::default()).unwrap();
        assert_eq!(p.coeffs.len(), 20);
        assert!(p.coeffs.values().all(Poly::is_zero));
    }

    #[test]
    fn galilean_boost_first_order_coefficients() {
        let p = prolong(&vf("t", "0", "1/a"), 2, &JetSpace::default()).unwrap();
        assert!(p.coeff(JetVar::new(1, 0)).unwrap().is_zero());
        assert_eq!(p.coeff(JetVar::new(0, 1)).unwrap(), &poly("-u_x").unwrap());
    }

    #[test]
    fn apply_examples() {
        let js = JetSpace::default();
        let pde = poly(PDE).unwrap();
        assert!(apply_prolonged(&vf("1", "0", "0"), 5, &pde, &js).unwrap().is_zero());
        assert!(apply_prolonged(&vf("x*u", "t", "u^2"), 3, &poly("7").unwrap(), &js)
            .unwrap()
            .is_zero());
        assert_eq!(
            apply_prolonged(&vf("t", "0", "1/a"), 1, &Poly::var(Var::U), &js).unwrap(),
            poly("1/a").unwrap()
        );
        // Boost leaves the flagship equation invariant identically, not just on solutions.
        assert!(apply_prolonged(&vf("t", "0", "1/a"), 5, &pde, &js).unwrap().is_zero());
    }

    #[test]
    fn order_bound_is_enforced() {
        let js = JetSpace::default();
        assert!(prolong(&vf("x", "t", "u"), 6, &js).is_err());
        assert!(apply_prolonged(&vf("x", "t", "u"), 2, &poly("u_x3").unwrap(), &js).is_err());
        assert!(VectorField::new(poly("u_x").unwrap(), Poly::zero(), Poly::zero()).is_err());
    }

    #[test]
    fn scaling_field_order_two() {
        // v = x d_x + 2t d_t: phi^x = -u_x, phi^t = -2u_t, phi^xx = -2u_xx
        let p = prolong(&vf("x", "2*t", "0"), 2, &JetSpace::default()).unwrap();
        assert_eq!(p.coeff(JetVar::new(1, 0)).unwrap(), &poly("-u_x").unwrap());
        assert_eq!(p.coeff(JetVar::new(0, 1)).unwrap(), &poly("-2*u_t").unwrap());
        assert_eq!(p.coeff(JetVar::new(2, 0)).unwrap(), &poly("-2*u_x2").unwrap());
        assert_eq!(p.coeff(JetVar::new(1, 1)).unwrap(), &poly("-3*u_xt").unwrap());
    }
}
