//! Invariants of affine generators and reduction of the PDE to an ODE in
//! the invariant `chi`, with `zeta(chi)` and its derivatives as unknowns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::parse_element;
use crate::determine::EvolutionPde;
use crate::error::{Error, Result};
use crate::expr::{JetVar, Poly, Rational, Var};
use crate::linalg::Matrix;
use crate::prolong::VectorField;

/// How `chi` depends on the base coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum ChiShape {
    /// `chi = t`
    Time,
    /// `chi = x - shift(t)`
    Moving { shift: Poly },
}

/// `chi(x, t)` and `zeta = u - offset(x, t)`, both annihilated by the
/// generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    pub generator: VectorField,
    pub chi: Poly,
    pub zeta: Poly,
    pub offset: Poly,
    pub shape: ChiShape,
}

impl fmt::Display for Invariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi = {}, zeta = {}", self.chi, self.zeta)
    }
}

fn is_coordinate(v: &Var) -> bool {
    matches!(v, Var::X | Var::T | Var::Jet(_))
}

fn constant_in_coordinates(p: &Poly) -> bool {
    !p.contains(is_coordinate)
}

fn invert(p: &Poly, what: &str) -> Result<Poly> {
    if p.len() != 1 {
        return Err(Error::Unsupported(format!("{what} `{p}` is not a single term")));
    }
    p.pow(-1)
}

/// `(p, q)` with `xi = p + q t`, for generators whose `xi` is affine in `t`
/// and whose `eta`, `phi` are constant (constants may involve parameters).
pub fn affine_parts(v: &VectorField) -> Result<(Poly, Poly)> {
    let unsupported = || {
        Error::Unsupported(format!(
            "generator {v} is outside the supported class (xi affine in t, eta and phi constant)"
        ))
    };
    let mut p = Poly::zero();
    let mut q = Poly::zero();
    for (m, c) in v.xi.collect_by(|w| *w == Var::T) {
        match m.exponent(&Var::T) {
            0 => p = c,
            1 => q = c,
            _ => return Err(unsupported()),
        }
    }
    if ![&p, &q, &v.eta, &v.phi].iter().all(|c| constant_in_coordinates(c)) {
        return Err(unsupported());
    }
    Ok((p, q))
}

/// Invariants of a generator in the class accepted by [`affine_parts`].
pub fn invariants(v: &VectorField) -> Result<Invariants> {
    let (p, q) = affine_parts(v)?;
    let (x, t, u) = (Poly::var(Var::X), Poly::var(Var::T), Poly::var(Var::U));
    let inv = if !v.eta.is_zero() {
        let ieta = invert(&v.eta, "eta")?;
        let shift = &(&(&p * &ieta) * &t) + &(&(&(&q * &ieta) * &t) * &t).scale(&Rational::new(1.into(), 2.into()));
        let offset = &(&v.phi * &ieta) * &t;
        Invariants {
            generator: v.clone(),
            chi: &x - &shift,
            zeta: &u - &offset,
            offset,
            shape: ChiShape::Moving { shift },
        }
    } else if !v.xi.is_zero() {
        let offset = &(&v.phi * &invert(&v.xi, "xi")?) * &x;
        Invariants {
            generator: v.clone(),
            chi: t,
            zeta: &u - &offset,
            offset,
            shape: ChiShape::Time,
        }
    } else if !v.phi.is_zero() {
        return Err(Error::Unsupported(format!(
            "{v} moves only u; it has no invariant depending on u"
        )));
    } else {
        return Err(Error::Invalid(
            "the zero vector field has no characteristic system".into(),
        ));
    };
    check_invariants(&inv)?;
    Ok(inv)
}

fn check_invariants(inv: &Invariants) -> Result<()> {
    for (name, f) in [("chi", &inv.chi), ("zeta", &inv.zeta)] {
        let r = inv.generator.act(f);
        if !r.is_zero() {
            return Err(Error::Verification(format!("generator applied to {name} gives {r}")));
        }
    }
    if inv.zeta.diff(&Var::U).is_zero() {
        return Err(Error::Verification("zeta does not depend on u".into()));
    }
    // Rank of d(chi, zeta)/d(x, t, u) at a random point.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut point: BTreeMap<Var, Rational> = BTreeMap::new();
    for f in [&inv.chi, &inv.zeta] {
        for w in f.vars() {
            point
                .entry(w)
                .or_insert_with(|| Rational::new(rng.gen_range(1i64..=97).into(), rng.gen_range(1i64..=13).into()));
        }
    }
    let rows = [&inv.chi, &inv.zeta]
        .iter()
        .map(|f| {
            [Var::X, Var::T, Var::U]
                .iter()
                .map(|w| {
                    f.diff(w)
                        .instantiate(&point)?
                        .as_constant()
                        .ok_or_else(|| Error::Verification("Jacobian entry is not numeric".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if Matrix::from_rows(3, rows).rank() != 2 {
        return Err(Error::Verification("chi and zeta are functionally dependent".into()));
    }
    Ok(())
}

/// `sum_k c_k v_k` from text such as `v3 + beta*v2`.
pub fn combine(basis: &[VectorField], text: &str) -> Result<VectorField> {
    let p = crate::expr::poly(text)?;
    let coeffs = parse_element(&p, basis.len())?;
    if coeffs.iter().all(Poly::is_zero) {
        return Err(Error::Invalid(format!("`{text}` is the zero combination")));
    }
    Ok(basis
        .iter()
        .zip(&coeffs)
        .fold(VectorField::zero(), |acc, (v, c)| acc.add(&v.mul_poly(c))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOde {
    /// Polynomial in `chi`, `zeta`, `zeta_chi`, ... and parameters.
    pub ode: Poly,
    pub order: u32,
    /// Loci such as `t = 0` excluded from the domain.
    pub singular: Vec<String>,
    /// Explicit `x`, `t` parts of the individual substituted PDE terms; they
    /// cancel in the sum.
    pub cancelled: Vec<Poly>,
}

impl fmt::Display for ReducedOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.ode)
    }
}

impl Serialize for ReducedOde {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ReducedOde", 4)?;
        st.serialize_field("ode", &self.ode.to_string())?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("singular", &self.singular)?;
        st.serialize_field(
            "cancelled",
            &self.cancelled.iter().map(Poly::to_string).collect::<Vec<_>>(),
        )?;
        st.end()
    }
}

fn zeta_order(p: &Poly) -> u32 {
    p.vars()
        .iter()
        .filter_map(|v| match v {
            Var::Zeta(k) => Some(*k),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn chain_derivative(p: &Poly, var: &Var, chi_d: &Poly) -> Result<Poly> {
    p.derivation(|w| {
        Ok(match w {
            w if w == var => Some(Poly::one()),
            Var::Zeta(k) => Some(&Poly::var(Var::Zeta(k + 1)) * chi_d),
            _ => None,
        })
    })
}

/// Rewrites `pde` under `u = zeta(chi) + offset(x, t)`.
pub fn reduce_pde(pde: &EvolutionPde, inv: &Invariants) -> Result<ReducedOde> {
    let chi_x = inv.chi.diff(&Var::X);
    let chi_t = inv.chi.diff(&Var::T);
    let jets: BTreeSet<JetVar> = pde.lhs.vars().iter().filter_map(Var::as_jet).collect();
    let max_i = jets.iter().map(|j| j.i).max().unwrap_or(0);
    let max_j = jets.iter().map(|j| j.j).max().unwrap_or(0);
    let mut images: BTreeMap<Var, Poly> = BTreeMap::new();
    let mut col = &Poly::var(Var::Zeta(0)) + &inv.offset;
    for j in 0..=max_j {
        let mut cur = col.clone();
        for i in 0..=max_i {
            let jv = JetVar::new(i, j);
            if jets.contains(&jv) {
                images.insert(Var::Jet(jv), cur.clone());
            }
            cur = chain_derivative(&cur, &Var::X, &chi_x)?;
        }
        col = chain_derivative(&col, &Var::T, &chi_t)?;
    }

    let eliminate = |p: &Poly| -> Result<Poly> {
        match &inv.shape {
            ChiShape::Time => Ok(p.rename(|w| if *w == Var::T { Var::Chi } else { w.clone() })),
            ChiShape::Moving { shift } => p.substitute(&Var::X, &(&Poly::var(Var::Chi) + shift)),
        }
    };
    let explicit = |m: &crate::expr::Monomial| m.contains(|w| matches!(w, Var::X | Var::T));

    let mut total = Poly::zero();
    let mut cancelled = Vec::new();
    for (m, c) in pde.lhs.terms() {
        let img = eliminate(&Poly::term(c.clone(), m.clone()).substitute_all(&images)?)?;
        let ex = img.retain(explicit);
        if !ex.is_zero() {
            cancelled.push(ex);
        }
        total += &img;
    }
    let leftover = total.retain(|m| m.contains(|w| matches!(w, Var::X | Var::T | Var::Jet(_))));
    if !leftover.is_zero() {
        return Err(Error::ResidualDependence(format!(
            "reduced equation still contains {leftover}"
        )));
    }
    if total.is_zero() {
        return Err(Error::Invalid(format!(
            "every solution invariant under {} satisfies the equation identically",
            inv.generator
        )));
    }

    let order = zeta_order(&total);
    let lead = total
        .terms()
        .filter(|(m, _)| m.exponent(&Var::Zeta(order)) != 0)
        .map(|(_, c)| c.clone())
        .last()
        .unwrap_or_else(Rational::one);
    let ode = total.scale(&lead.recip());
    let cancelled = cancelled.iter().map(|p| p.scale(&lead.recip())).collect();

    let pde_params: BTreeSet<&Var> = pde.params.iter().collect();
    let mut singular = BTreeSet::new();
    for p in [&inv.chi, &inv.offset, &ode] {
        for (m, _) in p.terms() {
            for (w, e) in m.factors() {
                if *e < 0 && !pde_params.contains(w) {
                    let name = match (w, &inv.shape) {
                        (Var::Chi, ChiShape::Time) => "t".to_string(),
                        _ => w.to_string(),
                    };
                    singular.insert(format!("{name} = 0"));
                }
            }
        }
    }
    Ok(ReducedOde {
        ode,
        order,
        singular: singular.into_iter().collect(),
        cancelled,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    /// `zeta(chi)` with integration constant `c1`.
    pub zeta: Poly,
    /// The invariant solution `u(x, t)`.
    pub u: Poly,
}

/// Solves `A zeta_chi + B zeta = 0` when `B / A = k / chi` with integer `k`
/// (or `B = 0`), giving `zeta = c1 chi^(-k)`.
pub fn solve_linear_first_order(ode: &ReducedOde, inv: &Invariants) -> Result<ClosedForm> {
    let unsupported = || Error::Unsupported(format!("`{ode}` is not of the form zeta_chi + (k/chi) zeta = 0"));
    let groups = ode.ode.collect_by(|w| matches!(w, Var::Zeta(_)));
    let mut a = Poly::zero();
    let mut b = Poly::zero();
    for (m, c) in groups {
        match m.factors() {
            [(Var::Zeta(1), 1)] => a = c,
            [(Var::Zeta(0), 1)] => b = c,
            _ => return Err(unsupported()),
        }
    }
    if a.is_zero() {
        return Err(unsupported());
    }
    let ratio = &b * &invert(&a, "coefficient of zeta_chi").map_err(|_| unsupported())?;
    let exponent = if ratio.is_zero() {
        0
    } else {
        let (k, m) = ratio.as_monomial().ok_or_else(unsupported)?;
        if m.factors() != [(Var::Chi, -1)] || !k.is_integer() {
            return Err(unsupported());
        }
        -i32::try_from(k.to_integer()).map_err(|_| unsupported())?
    };
    let c1 = Poly::param("c1");
    let zeta = &c1 * &Poly::var(Var::Chi).pow(exponent)?;
    let u = &inv.offset + &(&c1 * &inv.chi.pow(exponent)?);
    Ok(ClosedForm { zeta, u })
}

/// `true` when `ode` equals `expected` up to a nonzero rational factor.
pub fn same_up_to_factor(ode: &Poly, expected: &Poly) -> bool {
    ode.ratio_to(expected).is_some_and(|k| !k.is_zero())
}
