//! Checks of candidate solutions: exact residuals, group actions on
//! solutions, and numerical residuals on grids.

mod elliptic;
mod fd;
mod ratfunc;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use elliptic::{complete_k, jacobi_cn, jacobi_dn, jacobi_sn, jacobi_sncndn};
pub use fd::{fornberg, Centered};
pub use ratfunc::RatFunc;

use crate::determine::EvolutionPde;
use crate::error::{Error, Result};
use crate::expr::{JetVar, Poly, Var};
use crate::prolong::VectorField;
use crate::reduce::affine_parts;

/// Tolerance for exact solutions evaluated in floating point.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for finite-difference residuals.
pub const FD_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, t_min: f64, t_max: f64, nx: usize, nt: usize) -> Result<Grid> {
        if nx < 8 || nt < 8 {
            return Err(Error::Invalid(format!(
                "grid needs at least 8 points per axis, got {nx}x{nt}"
            )));
        }
        if !(x_min < x_max && t_min < t_max) || ![x_min, x_max, t_min, t_max].iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("grid ranges must be finite and increasing".into()));
        }
        Ok(Grid {
            x_min,
            x_max,
            t_min,
            t_max,
            nx,
            nt,
        })
    }

    /// `x0,x1,t0,t1,nx,nt`
    pub fn parse(text: &str) -> Result<Grid> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || Error::Invalid(format!("grid `{text}` is not x0,x1,t0,t1,nx,nt"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let n = |s: &str| s.parse::<usize>().map_err(|_| bad());
        Grid::new(
            f(parts[0])?,
            f(parts[1])?,
            f(parts[2])?,
            f(parts[3])?,
            n(parts[4])?,
            n(parts[5])?,
        )
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        (0..self.nx).map(move |i| self.x_min + i as f64 * dx)
    }

    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = (self.t_max - self.t_min) / (self.nt - 1) as f64;
        (0..self.nt).map(move |j| self.t_min + j as f64 * dt)
    }

    /// Fails unless `var = value` lies at least one cell outside the grid.
    pub fn excludes(&self, var: &Var, value: f64) -> Result<()> {
        let (lo, hi, n) = match var {
            Var::X => (self.x_min, self.x_max, self.nx),
            Var::T => (self.t_min, self.t_max, self.nt),
            _ => return Ok(()),
        };
        let cell = (hi - lo) / (n - 1) as f64;
        if value > lo - cell && value < hi + cell {
            return Err(Error::Domain(format!(
                "grid [{lo}, {hi}] comes within one cell of the singular locus {var} = {value}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// Root mean square over the evaluated points.
    pub l2: f64,
    pub points_evaluated: usize,
    pub symbolic_zero: bool,
}

impl ResidualReport {
    fn from_values(values: &[f64], symbolic_zero: bool) -> ResidualReport {
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l2 = if values.is_empty() {
            0.0
        } else {
            (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
        };
        ResidualReport {
            max_abs,
            l2,
            points_evaluated: values.len(),
            symbolic_zero,
        }
    }
}

/// `num / den^power` for a fixed `den`.
#[derive(Debug, Clone)]
struct Powered {
    num: Poly,
    power: i32,
}

/// Derivatives of `sol` as numerators over powers of its denominator.
struct JetTable<'a> {
    den: &'a Poly,
    jets: BTreeMap<JetVar, Powered>,
}

impl<'a> JetTable<'a> {
    fn new(sol: &'a RatFunc, needed: &BTreeSet<JetVar>) -> JetTable<'a> {
        let den = sol.den();
        let d = |p: &Powered, v: &Var| -> Powered {
            let dd = den.diff(v);
            if dd.is_zero() {
                return Powered {
                    num: p.num.diff(v),
                    power: p.power,
                };
            }
            let k = crate::expr::int(i64::from(p.power));
            Powered {
                num: &(&p.num.diff(v) * den) - &(&p.num * &dd).scale(&k),
                power: p.power + 1,
            }
        };
        let max_i = needed.iter().map(|j| j.i).max().unwrap_or(0);
        let max_j = needed.iter().map(|j| j.j).max().unwrap_or(0);
        let mut jets = BTreeMap::new();
        let mut col = Powered {
            num: sol.num().clone(),
            power: 1,
        };
        for j in 0..=max_j {
            let mut cur = col.clone();
            for i in 0..=max_i {
                let jv = JetVar::new(i, j);
                if needed.contains(&jv) {
                    jets.insert(jv, cur.clone());
                }
                if i < max_i {
                    cur = d(&cur, &Var::X);
                }
            }
            if j < max_j {
                col = d(&col, &Var::T);
            }
        }
        JetTable { den, jets }
    }

    /// `pde.lhs` after substitution, as a numerator over `den^power`.
    fn substitute(&self, lhs: &Poly) -> Result<Powered> {
        let mut parts: Vec<Powered> = Vec::new();
        for (m, c) in lhs.terms() {
            let mut acc = Powered {
                num: Poly::constant(c.clone()),
                power: 0,
            };
            for (v, e) in m.factors() {
                match v.as_jet() {
                    Some(j) => {
                        let p = &self.jets[&j];
                        acc.num = &acc.num * &p.num.pow(*e)?;
                        acc.power += p.power * e;
                    }
                    None => acc.num = &acc.num * &Poly::var(v.clone()).pow(*e)?,
                }
            }
            parts.push(acc);
        }
        let top = parts.iter().map(|p| p.power).max().unwrap_or(0);
        let mut num = Poly::zero();
        for p in parts {
            num += &(&p.num * &self.den.pow(top - p.power)?);
        }
        Ok(Powered { num, power: top })
    }
}

fn needed_jets(pde: &EvolutionPde) -> BTreeSet<JetVar> {
    pde.lhs.vars().iter().filter_map(Var::as_jet).collect()
}

/// Numerator of the PDE evaluated on `u = sol`, over a power of the
/// solution's denominator. Zero iff `sol` solves the equation.
pub fn residual_symbolic(sol: &RatFunc, pde: &EvolutionPde) -> Result<Poly> {
    let table = JetTable::new(sol, &needed_jets(pde));
    Ok(table.substitute(&pde.lhs)?.num)
}

/// Evaluates the PDE on `u = sol` over `grid`, with derivatives taken
/// symbolically. `values` binds every parameter and constant in `sol` and
/// the equation. Returns the report and the `(x, t, residual)` samples.
pub fn residual_numeric(
    sol: &RatFunc,
    pde: &EvolutionPde,
    grid: &Grid,
    values: &BTreeMap<Var, f64>,
) -> Result<(ResidualReport, Vec<[f64; 3]>)> {
    let table = JetTable::new(sol, &needed_jets(pde));
    let symbolic_zero = table.substitute(&pde.lhs)?.num.is_zero();
    let mut samples = Vec::with_capacity(grid.nx * grid.nt);
    for t in grid.ts() {
        for x in grid.xs() {
            let at = |v: &Var| match v {
                Var::X => Some(x),
                Var::T => Some(t),
                other => values.get(other).copied(),
            };
            let d = table.den.eval_f64(at)?;
            if d.abs() < 1e-300 {
                return Err(Error::Domain(format!("solution is singular at x = {x}, t = {t}")));
            }
            let mut jets = BTreeMap::new();
            for (j, p) in &table.jets {
                jets.insert(*j, p.num.eval_f64(at)? / d.powi(p.power));
            }
            let r = pde.lhs.eval_f64(|v| match v.as_jet() {
                Some(j) => jets.get(&j).copied(),
                None => at(v),
            })?;
            if !r.is_finite() {
                return Err(Error::Numeric(format!("non-finite residual at x = {x}, t = {t}")));
            }
            samples.push([x, t, r]);
        }
    }
    let vals: Vec<f64> = samples.iter().map(|s| s[2]).collect();
    Ok((ResidualReport::from_values(&vals, symbolic_zero), samples))
}

/// Residual of a solution known only through point evaluation, with
/// centered differences of radius 5 and step `h`. Supports equations whose
/// only mixed derivative is `u_t`.
pub fn residual_numeric_fn(
    f: &dyn Fn(f64, f64) -> f64,
    pde: &EvolutionPde,
    grid: &Grid,
    values: &BTreeMap<Var, f64>,
    h: f64,
) -> Result<ResidualReport> {
    let needed = needed_jets(pde);
    if needed.iter().any(|j| j.j > 1 || (j.j == 1 && j.i > 0)) {
        return Err(Error::Unsupported(
            "finite differences only handle u_t and pure x-derivatives".into(),
        ));
    }
    let max_i = needed.iter().map(|j| j.i).max().unwrap_or(0) as usize;
    let sx = Centered::new(h, 5, max_i.max(1))?;
    let st = Centered::new(h, 5, 1)?;
    let mut vals = Vec::new();
    for t in grid.ts() {
        for x in grid.xs() {
            let dx = sx.derivatives(&|y| f(y, t), x);
            let ut = st.derivatives(&|s| f(x, s), t)[1];
            let r = pde.lhs.eval_f64(|v| match v {
                Var::Jet(j) if j.j == 1 => Some(ut),
                Var::Jet(j) => dx.get(j.i as usize).copied(),
                Var::X => Some(x),
                Var::T => Some(t),
                other => values.get(other).copied(),
            })?;
            if !r.is_finite() {
                return Err(Error::Numeric(format!("non-finite residual at x = {x}, t = {t}")));
            }
            vals.push(r);
        }
    }
    Ok(ResidualReport::from_values(&vals, false))
}

/// Image of the solution `u = f(x, t)` under the flow of `v` for time `s`:
/// `u = f(x0, t0) + phi s` where `(x0, t0)` flows to `(x, t)`.
pub fn transform_solution(v: &VectorField, s: &Poly, f: &RatFunc) -> Result<RatFunc> {
    let (p, q) = affine_parts(v)?;
    let (x, t) = (Poly::var(Var::X), Poly::var(Var::T));
    let eta = &v.eta;
    // t0 = t - eta s, x0 = x - p s - q t s + q eta s^2 / 2
    let t0 = &t - &(eta * s);
    let mut x0 = &x - &(&p * s);
    x0 -= &(&(&q * &t) * s);
    x0 += &(&(&(&q * eta) * s) * s).scale(&crate::expr::rat(1, 2));
    let map = BTreeMap::from([(Var::X, x0), (Var::T, t0)]);
    let moved = f.substitute_all(&map)?;
    moved.add(&RatFunc::poly(&v.phi * s))
}

/// Pointwise residual of a reduced ODE on a profile `zeta(chi)`, with
/// derivatives from an 11-point centered stencil of step
/// `(b - a) / (8 n_points)`.
pub fn residual_ode(
    ode: &Poly,
    values: &BTreeMap<Var, f64>,
    profile: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    n_points: usize,
) -> Result<ResidualReport> {
    let (a, b) = interval;
    if n_points < 2 || !(a < b) {
        return Err(Error::Invalid(
            "need an increasing interval and at least two points".into(),
        ));
    }
    let order = ode
        .vars()
        .iter()
        .filter_map(|v| match v {
            Var::Zeta(k) => Some(*k as usize),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let h = (b - a) / (8 * n_points) as f64;
    let st = Centered::new(h, 5, order.max(1))?;
    let mut vals = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let chi = a + (b - a) * i as f64 / (n_points - 1) as f64;
        let d = st.derivatives(profile, chi);
        let r = ode.eval_f64(|v| match v {
            Var::Zeta(k) => d.get(*k as usize).copied(),
            Var::Chi => Some(chi),
            other => values.get(other).copied(),
        })?;
        if !r.is_finite() {
            return Err(Error::Numeric(format!("non-finite residual at chi = {chi}")));
        }
        vals.push(r);
    }
    Ok(ResidualReport::from_values(&vals, false))
}

/// `zeta = a0 + A sn^4(m chi, k) + B sn(m chi, k) d/dchi sn(m chi, k)`.
pub fn elliptic_profile(a0: f64, amp: f64, b: f64, m: f64, k: f64) -> Result<impl Fn(f64) -> f64> {
    jacobi_sncndn(0.0, k)?;
    Ok(move |chi: f64| {
        let (s, c, d) = jacobi_sncndn(m * chi, k).expect("modulus checked");
        a0 + amp * s.powi(4) + b * s * m * c * d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly;

    const PDE: &str = "u_t + a*u*u_x + b*u_x3 + c*u_x4 + d*u_x5 - e*u_x2";

    fn pde() -> EvolutionPde {
        EvolutionPde::parse(PDE).unwrap()
    }

    fn params() -> BTreeMap<Var, f64> {
        ["a", "b", "c", "d", "e"]
            .iter()
            .zip([2.0, 3.0, 5.0, 7.0, 11.0])
            .map(|(n, v)| (Var::param(n), v))
            .chain([(Var::param("c1"), 1.0)])
            .collect()
    }

    #[test]
    fn symbolic_residuals() {
        let sol = RatFunc::parse("(x + a*c1)/(a*t)").unwrap();
        assert!(residual_symbolic(&sol, &pde()).unwrap().is_zero());
        assert!(residual_symbolic(&RatFunc::parse("7").unwrap(), &pde())
            .unwrap()
            .is_zero());
        let r = residual_symbolic(&RatFunc::parse("x").unwrap(), &pde()).unwrap();
        assert_eq!(r, poly("a*x").unwrap());
    }

    #[test]
    fn numeric_residuals() {
        let g = Grid::new(0.0, 1.0, 1.0, 2.0, 100, 100).unwrap();
        let sol = RatFunc::parse("(x + a*c1)/(a*t)").unwrap();
        let (r, samples) = residual_numeric(&sol, &pde(), &g, &params()).unwrap();
        assert!(r.symbolic_zero);
        assert!(r.max_abs < 1e-12, "{}", r.max_abs);
        assert_eq!(samples.len(), 10_000);
        let (r, _) = residual_numeric(&RatFunc::parse("x").unwrap(), &pde(), &g, &params()).unwrap();
        assert!((r.max_abs - 2.0).abs() < 1e-12);
        assert!(!r.symbolic_zero);
        let (r, _) = residual_numeric(&RatFunc::parse("3").unwrap(), &pde(), &g, &params()).unwrap();
        assert_eq!(r.max_abs, 0.0);
        let bad = Grid::new(0.0, 1.0, -1.0, 1.0, 9, 9).unwrap();
        assert!(residual_numeric(&sol, &pde(), &bad, &params()).is_err());
        assert!(bad.excludes(&Var::T, 0.0).is_err());
        assert!(g.excludes(&Var::T, 0.0).is_ok());
    }

    #[test]
    fn finite_difference_residual_matches() {
        let g = Grid::new(0.0, 1.0, 1.0, 2.0, 8, 8).unwrap();
        let f = |x: f64, t: f64| (x + 2.0) / (2.0 * t);
        let r = residual_numeric_fn(&f, &pde(), &g, &params(), 0.05).unwrap();
        assert!(r.max_abs < FD_TOL, "{}", r.max_abs);
        let r = residual_numeric_fn(&|x, _| x, &pde(), &g, &params(), 0.05).unwrap();
        assert!((r.max_abs - 2.0).abs() < 1e-6);
    }

    #[test]
    fn group_actions_on_the_boost_solution() {
        let sol = RatFunc::parse("(x + a*c1)/(a*t)").unwrap();
        let s = Poly::param("s");
        let field = |xi: &str, eta: &str, phi: &str| {
            VectorField::new(poly(xi).unwrap(), poly(eta).unwrap(), poly(phi).unwrap()).unwrap()
        };
        let g1 = transform_solution(&field("1", "0", "0"), &s, &sol).unwrap();
        assert!(g1.same_as(&RatFunc::parse("(x - s + a*c1)/(a*t)").unwrap()));
        let g2 = transform_solution(&field("0", "1", "0"), &s, &sol).unwrap();
        assert!(g2.same_as(&RatFunc::parse("(x + a*c1)/(a*(t - s))").unwrap()));
        let g3 = transform_solution(&field("t", "0", "1/a"), &s, &sol).unwrap();
        assert!(g3.same_as(&sol));
        for g in [g1, g2] {
            assert!(residual_symbolic(&g, &pde()).unwrap().is_zero());
        }
        let zero = transform_solution(&field("1", "0", "0"), &Poly::zero(), &sol).unwrap();
        assert!(zero.same_as(&sol));
        let c = RatFunc::parse("4").unwrap();
        assert!(transform_solution(&field("0", "1", "0"), &s, &c).unwrap().same_as(&c));
    }

    #[test]
    fn ode_residuals() {
        let ode = poly("zeta_chi + zeta/chi").unwrap();
        let r = residual_ode(&ode, &BTreeMap::new(), &|chi| 1.0 / chi, (1.0, 2.0), 64).unwrap();
        assert!(r.max_abs < 1e-10, "{}", r.max_abs);
        let ode = poly("a*zeta*zeta_chi + b*zeta_chi3 + c*zeta_chi4 + d*zeta_chi5 - e*zeta_chi2").unwrap();
        let r = residual_ode(&ode, &params(), &|_| 2.5, (0.0, 1.0), 32).unwrap();
        assert_eq!(r.max_abs, 0.0);
        let p = elliptic_profile(0.1, 1.0, 0.5, 0.8, 0.6).unwrap();
        let r = residual_ode(&ode, &params(), &p, (0.0, 1.0), 16).unwrap();
        assert!(r.max_abs.is_finite() && r.max_abs > 0.0);
        assert!(elliptic_profile(0.0, 1.0, 1.0, 1.0, 1.5).is_err());
    }
}
