//! Determining equations for point symmetries of an evolution equation,
//! solved over a polynomial ansatz by exact linear algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{int, Dir, JetSpace, JetVar, Monomial, Poly, Rational, Var};
use crate::linalg::{Matrix, Vector};
use crate::prolong::{apply_prolonged, VectorField};

/// Parameter values keyed by parameter variable.
pub type ParamPoint = BTreeMap<Var, Rational>;

/// `u_t = F(x, t, u, u_x, u_xx, ...)` written as `lhs = u_t - F = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPde {
    pub lhs: Poly,
    pub solved: Poly,
    pub order: u32,
    pub params: Vec<Var>,
}

impl EvolutionPde {
    pub fn new(lhs: Poly) -> Result<Self> {
        if lhs.contains(|v| matches!(v, Var::Chi | Var::Zeta(_))) {
            return Err(Error::Invalid("reduced coordinates in a PDE".into()));
        }
        let ut = Var::jet(0, 1);
        let groups = lhs.collect_by(|v| *v == ut);
        let lead = groups
            .get(&Monomial::var(ut.clone()))
            .and_then(Poly::as_constant)
            .filter(|c| !c.is_zero())
            .ok_or_else(|| Error::Invalid("equation must be linear in u_t with a constant coefficient".into()))?;
        if groups.keys().any(|m| m.exponent(&ut) > 1 || m.exponent(&ut) < 0) {
            return Err(Error::Invalid("equation must be linear in u_t".into()));
        }
        let lhs = lhs.scale(&lead.recip());
        let solved = -&(&lhs - &Poly::var(ut));
        if solved.contains(|v| matches!(v, Var::Jet(j) if j.j > 0)) {
            return Err(Error::Invalid("right-hand side may not contain t-derivatives".into()));
        }
        let order = lhs.jet_order().unwrap_or(0).max(1);
        let params = lhs.vars().into_iter().filter(Var::is_param).collect();
        Ok(EvolutionPde {
            lhs,
            solved,
            order,
            params,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        EvolutionPde::new(crate::expr::poly(text)?)
    }

    /// Jet space large enough for elimination of `u_{x^k t}` during symmetry
    /// computations (orders up to `2n - 1`).
    pub fn working_space(&self) -> JetSpace {
        JetSpace::new(2 * self.order)
    }

    pub fn instantiate(&self, point: &ParamPoint) -> Result<EvolutionPde> {
        let missing: Vec<_> = self.params.iter().filter(|p| !point.contains_key(*p)).collect();
        if !missing.is_empty() {
            return Err(Error::Invalid(format!(
                "no value for parameter(s) {}",
                missing.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
            )));
        }
        EvolutionPde::new(self.lhs.instantiate(point)?)
    }

    /// Default generic points: successive primes assigned to the parameters
    /// in alphabetical order, `(2, 3, 5, ...)` and `(13, 17, 19, ...)` for
    /// five parameters.
    pub fn default_points(&self) -> [ParamPoint; 2] {
        const PRIMES: [i64; 30] = [
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
            107, 109, 113,
        ];
        let n = self.params.len();
        let k = n.max(5);
        let first = self
            .params
            .iter()
            .zip(PRIMES.iter())
            .map(|(p, v)| (p.clone(), int(*v)))
            .collect();
        let second = self
            .params
            .iter()
            .zip(PRIMES[k..].iter())
            .map(|(p, v)| (p.clone(), int(*v)))
            .collect();
        [first, second]
    }
}

impl fmt::Display for EvolutionPde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.lhs)
    }
}

/// Replaces `u_t` and all its derivatives by the right-hand side of the
/// equation and its total derivatives, until no t-derivative remains.
pub struct SolutionManifold<'a> {
    pde: &'a EvolutionPde,
    space: JetSpace,
    table: BTreeMap<JetVar, Poly>,
}

impl<'a> SolutionManifold<'a> {
    pub fn new(pde: &'a EvolutionPde, space: JetSpace) -> Self {
        SolutionManifold {
            pde,
            space,
            table: BTreeMap::new(),
        }
    }

    fn replacement(&mut self, jet: JetVar) -> Result<Poly> {
        if let Some(p) = self.table.get(&jet) {
            return Ok(p.clone());
        }
        let p = if jet.j == 0 {
            Poly::var(Var::Jet(jet))
        } else if jet.i > 0 {
            // t-free already, so D_x needs no further elimination
            let prev = self.replacement(JetVar::new(jet.i - 1, jet.j))?;
            self.space.total_derivative(&prev, Dir::X)?
        } else if jet.j == 1 {
            self.pde.solved.clone()
        } else {
            let prev = self.replacement(JetVar::new(0, jet.j - 1))?;
            let dt = self.space.total_derivative(&prev, Dir::T)?;
            self.reduce(&dt)?
        };
        self.table.insert(jet, p.clone());
        Ok(p)
    }

    pub fn reduce(&mut self, e: &Poly) -> Result<Poly> {
        let mut map = BTreeMap::new();
        for v in e.vars() {
            if let Var::Jet(j) = v {
                if j.j > 0 {
                    map.insert(v, self.replacement(j)?);
                }
            }
        }
        if map.is_empty() {
            return Ok(e.clone());
        }
        e.substitute_all(&map)
    }
}

pub fn reduce_mod_equation(e: &Poly, pde: &EvolutionPde, space: JetSpace) -> Result<Poly> {
    SolutionManifold::new(pde, space).reduce(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Xi,
    Eta,
    Phi,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::Xi => "xi",
            Slot::Eta => "eta",
            Slot::Phi => "phi",
        })
    }
}

/// Polynomial ansatz: one unknown per monomial `x^i t^j u^k`, `i+j+k <= degree`,
/// for each of `xi`, `eta`, `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub degree: u32,
    pub unknowns: Vec<(Slot, Monomial)>,
}

impl Ansatz {
    pub fn new(degree: u32) -> Self {
        let mut monos = Vec::new();
        for i in 0..=degree {
            for j in 0..=degree - i {
                for k in 0..=degree - i - j {
                    monos.push(Monomial::from_factors([
                        (Var::X, i as i32),
                        (Var::T, j as i32),
                        (Var::U, k as i32),
                    ]));
                }
            }
        }
        monos.sort();
        let unknowns = [Slot::Xi, Slot::Eta, Slot::Phi]
            .into_iter()
            .flat_map(|s| monos.iter().map(move |m| (s, m.clone())))
            .collect();
        Ansatz { degree, unknowns }
    }

    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    pub fn label(&self, col: usize) -> String {
        let (s, m) = &self.unknowns[col];
        format!("{s}:{m}")
    }

    /// The vector field `sum_k coeff_k * unknown_k`.
    pub fn field(&self, coeffs: &[Poly]) -> VectorField {
        let mut v = VectorField::zero();
        for ((slot, m), c) in self.unknowns.iter().zip(coeffs) {
            if c.is_zero() {
                continue;
            }
            let term = c.mul_monomial(&Rational::one(), m);
            match slot {
                Slot::Xi => v.xi += &term,
                Slot::Eta => v.eta += &term,
                Slot::Phi => v.phi += &term,
            }
        }
        v
    }

    fn unit_field(&self, col: usize) -> VectorField {
        let (slot, m) = &self.unknowns[col];
        let p = Poly::term(Rational::one(), m.clone());
        match slot {
            Slot::Xi => VectorField {
                xi: p,
                ..VectorField::zero()
            },
            Slot::Eta => VectorField {
                eta: p,
                ..VectorField::zero()
            },
            Slot::Phi => VectorField {
                phi: p,
                ..VectorField::zero()
            },
        }
    }
}

/// Homogeneous linear system in the ansatz unknowns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Matrix,
    pub labels: Vec<String>,
}

/// Builds `Pr v [lhs]` on the solution manifold for every ansatz unknown
/// separately (the condition is linear in the unknowns), then equates the
/// coefficient of every monomial in `x, t, u` and the jets to zero.
pub fn determining_system(pde: &EvolutionPde, ansatz: &Ansatz) -> Result<LinearSystem> {
    if let Some(p) = pde.lhs.vars().into_iter().find(Var::is_param) {
        return Err(Error::Invalid(format!("parameter `{p}` is not instantiated")));
    }
    let space = pde.working_space();
    let mut manifold = SolutionManifold::new(pde, space);
    let mut rows: BTreeMap<Monomial, BTreeMap<usize, Rational>> = BTreeMap::new();
    for col in 0..ansatz.len() {
        let v = ansatz.unit_field(col);
        let pr = apply_prolonged(&v, pde.order, &pde.lhs, &space)?;
        let cond = manifold.reduce(&pr)?;
        for (m, c) in cond.terms() {
            rows.entry(m.clone()).or_default().insert(col, c.clone());
        }
    }
    let n = ansatz.len();
    let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut matrix = Matrix::new(n);
    for entries in rows.into_values() {
        let mut row = vec![Rational::zero(); n];
        for (c, v) in entries {
            row[c] = v;
        }
        let lead = row.iter().find(|x| !x.is_zero()).cloned().expect("nonempty row");
        let scaled: Vec<Rational> = row.iter().map(|x| x / &lead).collect();
        if seen.insert(scaled.clone()) {
            matrix.push_row(scaled);
        }
    }
    if matrix.nrows() == 0 {
        matrix.push_row(vec![Rational::zero(); n]);
    }
    Ok(LinearSystem {
        matrix,
        labels: (0..n).map(|c| ansatz.label(c)).collect(),
    })
}

/// Basis of the symmetry algebra found within the ansatz.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    /// Normalised generators, in the order of their free ansatz columns.
    pub generators: Vec<VectorField>,
    /// Fitted nullspace vectors before normalisation (free column = 1).
    pub raw: Vec<VectorField>,
    pub free_columns: Vec<String>,
    pub points: [ParamPoint; 2],
    pub dimension: usize,
    pub ansatz_degree: u32,
}

impl SymmetryBasis {
    /// General infinitesimal `sum_k c_k raw_k`, with fresh constants `c1, c2, ...`.
    pub fn general_solution(&self) -> VectorField {
        self.raw.iter().enumerate().fold(VectorField::zero(), |acc, (k, v)| {
            acc.add(&v.mul_poly(&Poly::param(&format!("c{}", k + 1))))
        })
    }
}

struct PointSolution {
    free: Vec<usize>,
    basis: Vec<Vector>,
}

fn nullspace_at(pde: &EvolutionPde, ansatz: &Ansatz, point: &ParamPoint) -> Result<PointSolution> {
    let inst = pde.instantiate(point)?;
    let sys = determining_system(&inst, ansatz)?;
    let rref = sys.matrix.rref();
    Ok(PointSolution {
        free: rref.free_columns(),
        basis: rref.nullspace(),
    })
}

pub fn solve_symmetries(pde: &EvolutionPde, degree: u32, points: &[ParamPoint; 2]) -> Result<SymmetryBasis> {
    if degree == 0 {
        return Err(Error::Invalid("ansatz degree must be at least 1".into()));
    }
    if !pde.params.is_empty() {
        if points[0] == points[1] {
            return Err(Error::Invalid("parameter points must be distinct".into()));
        }
        for pt in points {
            if pt.values().any(Zero::is_zero) {
                return Err(Error::Invalid("parameter values must be nonzero".into()));
            }
        }
    }
    let ansatz = Ansatz::new(degree);
    let first = nullspace_at(pde, &ansatz, &points[0])?;
    let second = nullspace_at(pde, &ansatz, &points[1])?;
    if first.free != second.free {
        return Err(Error::NullspaceMismatch(format!(
            "dimension {} at the first point, {} at the second",
            first.free.len(),
            second.free.len()
        )));
    }
    let values = |pt: &ParamPoint| -> Vec<Rational> { pde.params.iter().map(|p| pt[p].clone()).collect() };
    let (p1, p2) = (values(&points[0]), values(&points[1]));

    let mut raw = Vec::new();
    for (v1, v2) in first.basis.iter().zip(&second.basis) {
        let mut coeffs = Vec::with_capacity(v1.len());
        for (col, (r1, r2)) in v1.iter().zip(v2).enumerate() {
            if r1.is_zero() != r2.is_zero() {
                return Err(Error::NullspaceMismatch(format!(
                    "column {} is active at only one point",
                    ansatz.label(col)
                )));
            }
            coeffs.push(if r1.is_zero() {
                Poly::zero()
            } else {
                fit_monomial(r1, r2, &pde.params, &p1, &p2)
                    .map_err(|e| Error::NullspaceMismatch(format!("{}: {e}", ansatz.label(col))))?
            });
        }
        raw.push(ansatz.field(&coeffs));
    }

    let space = pde.working_space();
    for (k, g) in raw.iter().enumerate() {
        let pr = apply_prolonged(g, pde.order, &pde.lhs, &space)?;
        let residue = reduce_mod_equation(&pr, pde, space)?;
        if !residue.is_zero() {
            return Err(Error::Verification(format!(
                "generator {} ({g}) leaves residue {residue}",
                k + 1
            )));
        }
    }

    let generators = raw.iter().map(normalize_generator).collect();
    Ok(SymmetryBasis {
        dimension: raw.len(),
        generators,
        raw,
        free_columns: first.free.iter().map(|&c| ansatz.label(c)).collect(),
        points: points.clone(),
        ansatz_degree: degree,
    })
}

/// Finds `c * prod p_i^{e_i}` taking value `r1` at the first point and `r2`
/// at the second, preferring the smallest total exponent. Exponents are
/// bounded by 4 in absolute value.
fn fit_monomial(r1: &Rational, r2: &Rational, params: &[Var], p1: &[Rational], p2: &[Rational]) -> Result<Poly> {
    const MAX_EXP: i32 = 4;
    let ratio = r1 / r2;
    let q: Vec<Rational> = p1.iter().zip(p2).map(|(a, b)| a / b).collect();
    let n = params.len();
    for level in 0..=(MAX_EXP as usize * n) {
        let mut hits = Vec::new();
        let mut exps = vec![0i32; n];
        exponent_vectors(&mut exps, 0, level as i32, MAX_EXP, &mut |e| {
            let m = e
                .iter()
                .zip(&q)
                .fold(Rational::one(), |acc, (k, qi)| acc * num_traits::Pow::pow(qi, *k));
            if m == ratio {
                hits.push(e.to_vec());
            }
        });
        match hits.len() {
            0 => continue,
            1 => {
                let e = &hits[0];
                let at1 = e
                    .iter()
                    .zip(p1)
                    .fold(Rational::one(), |acc, (k, v)| acc * num_traits::Pow::pow(v, *k));
                let mono = Monomial::from_factors(params.iter().cloned().zip(e.iter().copied()));
                return Ok(Poly::term(r1 / at1, mono));
            }
            _ => {
                return Err(Error::Invalid(
                    "parameter dependence is ambiguous at these points".into(),
                ))
            }
        }
    }
    Err(Error::Invalid(format!(
        "values {r1} and {r2} are not a monomial in the parameters"
    )))
}

fn exponent_vectors(e: &mut [i32], at: usize, remaining: i32, bound: i32, f: &mut dyn FnMut(&[i32])) {
    if at == e.len() {
        if remaining == 0 {
            f(e);
        }
        return;
    }
    for k in -bound.min(remaining)..=bound.min(remaining) {
        e[at] = k;
        exponent_vectors(e, at + 1, remaining - k.abs(), bound, f);
    }
    e[at] = 0;
}

/// Divides by the first nonzero coefficient (in `xi`, `eta`, `phi` order,
/// lowest monomial first), then clears rational denominators.
pub fn normalize_generator(v: &VectorField) -> VectorField {
    let Some((c, m)) = v
        .components()
        .iter()
        .find_map(|p| p.terms().next().map(|(m, c)| (c.clone(), m.clone())))
    else {
        return v.clone();
    };
    // Only the parameter part of the leading monomial is divided out.
    let (param_part, _) = m.split(Var::is_param);
    let divided = v.map(|p| p.mul_monomial(&c.recip(), &param_part.pow(-1)));
    let lcm = divided
        .components()
        .iter()
        .flat_map(|p| p.terms().map(|(_, c)| c.denom().clone()))
        .fold(num_bigint::BigInt::one(), |acc, d| acc.lcm(&d));
    let k = Rational::from_integer(lcm);
    let out = divided.scale(&k);
    debug_assert!(out
        .components()
        .iter()
        .find_map(|p| p.terms().next().map(|(_, c)| c.is_positive()))
        .unwrap_or(true));
    out
}
