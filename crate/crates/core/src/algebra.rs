//! Structure of a finite-dimensional Lie algebra of vector fields.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Monomial, Poly, Rational, Var};
use crate::linalg::{EchelonBasis, Matrix, Vector};
use crate::prolong::VectorField;

/// `[v, w]` with components `v(w^a) - w(v^a)`.
pub fn commutator(v: &VectorField, w: &VectorField) -> VectorField {
    VectorField {
        xi: &v.act(&w.xi) - &w.act(&v.xi),
        eta: &v.act(&w.eta) - &w.act(&v.eta),
        phi: &v.act(&w.phi) - &w.act(&v.phi),
    }
}

/// Coordinates of each field over the (slot, monomial) pairs that occur.
fn coordinates(fields: &[&VectorField]) -> (Vec<(usize, Monomial)>, Vec<Vector>) {
    let mut keys: BTreeMap<(usize, Monomial), ()> = BTreeMap::new();
    for f in fields {
        for (s, p) in f.components().iter().enumerate() {
            for (m, _) in p.terms() {
                keys.insert((s, m.clone()), ());
            }
        }
    }
    let keys: Vec<_> = keys.into_keys().collect();
    let vecs = fields
        .iter()
        .map(|f| keys.iter().map(|(s, m)| f.components()[*s].coeff(m)).collect())
        .collect();
    (keys, vecs)
}

/// Expresses `target` as a rational combination of `basis`.
pub fn express_in(basis: &[VectorField], target: &VectorField) -> Option<Vector> {
    let mut all: Vec<&VectorField> = basis.iter().collect();
    all.push(target);
    let (_, vecs) = coordinates(&all);
    let (b, cols) = vecs.split_at(basis.len());
    let n = cols[0].len();
    let a = Matrix::from_rows(
        basis.len(),
        (0..n).map(|r| b.iter().map(|v| v[r].clone()).collect()).collect(),
    );
    if n == 0 {
        return Some(vec![Rational::zero(); basis.len()]);
    }
    a.solve(&cols[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    /// Empty for an algebra given only by structure constants.
    pub basis: Vec<VectorField>,
    dim: usize,
    // c[(i * n + j) * n + k] = c^k_{ij}
    c: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFlags {
    pub solvable: bool,
    pub nilpotent: bool,
    pub derived_length: Option<usize>,
    pub nilpotency_class: Option<usize>,
    /// Dimensions of `L, [L,L], [[L,L],[L,L]], ...` until it stabilises.
    pub derived_dims: Vec<usize>,
    /// Dimensions of `L, [L,L], [L,[L,L]], ...` until it stabilises.
    pub lower_central_dims: Vec<usize>,
    #[serde(skip)]
    pub lower_central: Vec<Vec<Vector>>,
    pub note: Option<String>,
}

/// `Ad(exp(eps v_i))` as a matrix on coefficient vectors:
/// `Ad(exp(eps v_i)) v_j = sum_k entries[k][j] v_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    pub generator: usize,
    pub param: Poly,
    pub entries: Vec<Vec<Poly>>,
}

impl AdjointMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Substitutes a value for the symbolic parameter.
    pub fn eval(&self, eps: &Rational) -> Result<Matrix> {
        let vars = self.param.vars();
        let rows = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        let mut q = p.clone();
                        for v in &vars {
                            q = q.substitute(v, &Poly::constant(eps.clone()))?;
                        }
                        q.as_constant()
                            .ok_or_else(|| Error::Invalid(format!("entry {p} is not numeric")))
                    })
                    .collect::<Result<Vector>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_rows(self.dim(), rows))
    }

    /// Image of basis element `j`, written over symbols `v1, v2, ...`.
    pub fn image(&self, j: usize) -> Poly {
        let mut out = Poly::zero();
        for (k, row) in self.entries.iter().enumerate() {
            out += &(&row[j] * &basis_symbol(k));
        }
        out
    }

    pub fn apply(&self, v: &[Poly]) -> Vec<Poly> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).fold(Poly::zero(), |acc, (a, b)| &acc + &(a * b)))
            .collect()
    }
}

/// The symbol `v{k+1}` used when printing algebra elements.
pub fn basis_symbol(k: usize) -> Poly {
    Poly::param(&format!("v{}", k + 1))
}

/// Writes a coefficient vector as `a1*v1 + a2*v2 + ...`.
pub fn render_element(coeffs: &[Rational]) -> Poly {
    coeffs
        .iter()
        .enumerate()
        .fold(Poly::zero(), |acc, (k, c)| &acc + &basis_symbol(k).scale(c))
}

/// Reads a linear combination of `v1, v2, ...` whose coefficients may
/// involve parameters. Returns one coefficient per basis element.
pub fn parse_element(p: &Poly, dim: usize) -> Result<Vec<Poly>> {
    let names: Vec<Var> = (0..dim).map(|k| Var::param(&format!("v{}", k + 1))).collect();
    let groups = p.collect_by(|v| names.contains(v));
    let mut out = vec![Poly::zero(); dim];
    for (m, c) in groups {
        let idx = match m.factors() {
            [(v, 1)] => names.iter().position(|n| n == v),
            _ => None,
        };
        let k = idx.ok_or_else(|| Error::Invalid(format!("`{p}` is not a linear combination of v1..v{dim}")))?;
        if c.contains(|v| !v.is_param()) {
            return Err(Error::Invalid(format!("coefficient `{c}` must be constant")));
        }
        out[k] = c;
    }
    Ok(out)
}

impl LieAlgebra {
    /// Structure constants of the span of `basis`, which must be linearly
    /// independent and closed under the bracket.
    pub fn from_basis(basis: Vec<VectorField>) -> Result<LieAlgebra> {
        let n = basis.len();
        let refs: Vec<&VectorField> = basis.iter().collect();
        let (_, coords) = coordinates(&refs);
        let mut ech = EchelonBasis::new(coords.first().map_or(0, Vec::len));
        for (k, v) in coords.into_iter().enumerate() {
            if !ech.insert(v) {
                return Err(Error::Invalid(format!("basis element {} is linearly dependent", k + 1)));
            }
        }
        let mut c = vec![Rational::zero(); n * n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let br = commutator(&basis[i], &basis[j]);
                let coeffs = express_in(&basis, &br).ok_or(Error::NonClosure { i: i + 1, j: j + 1 })?;
                for (k, x) in coeffs.into_iter().enumerate() {
                    c[(i * n + j) * n + k] = x.clone();
                    c[(j * n + i) * n + k] = -x;
                }
            }
        }
        let alg = LieAlgebra { basis, dim: n, c };
        alg.check_jacobi()?;
        Ok(alg)
    }

    /// Abstract algebra from `c(i, j, k) = c^k_{ij}`.
    pub fn from_structure(dim: usize, c: impl Fn(usize, usize, usize) -> Rational) -> Result<LieAlgebra> {
        let mut data = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    data.push(c(i, j, k));
                }
            }
        }
        let alg = LieAlgebra {
            basis: Vec::new(),
            dim,
            c: data,
        };
        alg.check_antisymmetry()?;
        alg.check_jacobi()?;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn check_antisymmetry(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if *self.structure(i, j, k) != -self.structure(j, i, k).clone() {
                        return Err(Error::Verification(format!("c^{k}_{{{i}{j}}} is not antisymmetric")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_jacobi(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Rational::zero();
                        for m in 0..n {
                            s += self.structure(i, j, m) * self.structure(m, k, l);
                            s += self.structure(j, k, m) * self.structure(m, i, l);
                            s += self.structure(k, i, m) * self.structure(m, j, l);
                        }
                        if !s.is_zero() {
                            return Err(Error::Verification(format!(
                                "Jacobi identity fails for ({i}, {j}, {k}) in component {l}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Bracket of two coefficient vectors.
    pub fn bracket(&self, a: &[Rational], b: &[Rational]) -> Vector {
        let n = self.dim;
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.structure(i, j, k);
                    if !c.is_zero() {
                        *o += &ab * c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad(v_i)`: column `j` holds the coefficients of `[v_i, v_j]`.
    pub fn ad_matrix(&self, i: usize) -> Matrix {
        let n = self.dim;
        let rows = (0..n)
            .map(|k| (0..n).map(|j| self.structure(i, j, k).clone()).collect())
            .collect();
        Matrix::from_rows(n, rows)
    }

    /// `[v_i, v_j]` written over the basis symbols.
    pub fn commutator_table(&self) -> Vec<Vec<Poly>> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| render_element(&(0..n).map(|k| self.structure(i, j, k).clone()).collect::<Vec<_>>()))
                    .collect()
            })
            .collect()
    }

    fn unit(&self, k: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.dim];
        v[k] = Rational::one();
        v
    }

    fn bracket_span(&self, a: &[Vector], b: &[Vector]) -> Vec<Vector> {
        let mut e = EchelonBasis::new(self.dim);
        for x in a {
            for y in b {
                e.insert(self.bracket(x, y));
            }
        }
        e.basis()
    }

    pub fn series_flags(&self) -> SeriesFlags {
        let whole: Vec<Vector> = (0..self.dim).map(|k| self.unit(k)).collect();

        let mut derived = vec![whole.clone()];
        loop {
            let last = derived.last().expect("nonempty");
            let next = self.bracket_span(last, last);
            if next.len() == last.len() {
                break;
            }
            let stop = next.is_empty();
            derived.push(next);
            if stop {
                break;
            }
        }
        let mut lower = vec![whole.clone()];
        loop {
            let last = lower.last().expect("nonempty");
            let next = self.bracket_span(&whole, last);
            if next.len() == last.len() {
                break;
            }
            let stop = next.is_empty();
            lower.push(next);
            if stop {
                break;
            }
        }
        let solvable = derived.last().is_some_and(Vec::is_empty) || self.dim == 0;
        let nilpotent = lower.last().is_some_and(Vec::is_empty) || self.dim == 0;
        let derived_dims: Vec<usize> = derived.iter().map(Vec::len).collect();
        let lower_dims: Vec<usize> = lower.iter().map(Vec::len).collect();
        let note = (self.dim == 3 && nilpotent && lower_dims.get(1) == Some(&1))
            .then(|| "three-dimensional Heisenberg algebra (Bianchi type II)".to_string());
        SeriesFlags {
            solvable,
            nilpotent,
            derived_length: solvable.then(|| derived.len() - 1),
            nilpotency_class: nilpotent.then(|| lower.len() - 1),
            derived_dims,
            lower_central_dims: lower_dims,
            lower_central: lower,
            note,
        }
    }

    /// `Ad(exp(eps v_i)) = sum_n (-eps)^n / n! ad(v_i)^n`.
    ///
    /// Without a truncation order the series must terminate (ad nilpotent)
    /// within ten terms.
    pub fn adjoint(&self, i: usize, eps: &Poly, truncation: Option<usize>) -> Result<AdjointMatrix> {
        const MAX_TERMS: usize = 10;
        let n = self.dim;
        if i >= n {
            return Err(Error::Invalid(format!("no generator v{}", i + 1)));
        }
        let a = self.ad_matrix(i);
        let limit = truncation.unwrap_or(MAX_TERMS);
        let mut entries = vec![vec![Poly::zero(); n]; n];
        let mut power = Matrix::identity(n);
        let mut factorial = BigInt::one();
        let mut scale = Poly::one();
        let minus_eps = -eps;
        let mut k = 0;
        loop {
            if power.is_zero() {
                break;
            }
            if k > limit {
                if truncation.is_some() {
                    break;
                }
                return Err(Error::NonTerminating(i + 1, MAX_TERMS));
            }
            if k > 0 {
                factorial *= k;
                scale = &scale * &minus_eps;
            }
            let coef = scale.scale(&Rational::from_integer(factorial.clone()).recip());
            for (r, row) in entries.iter_mut().enumerate() {
                for (c, e) in row.iter_mut().enumerate() {
                    let x = power.get(r, c);
                    if !x.is_zero() {
                        *e += &coef.scale(x);
                    }
                }
            }
            power = a.mul(&power);
            k += 1;
        }
        Ok(AdjointMatrix {
            generator: i,
            param: eps.clone(),
            entries,
        })
    }

    /// `table[i][j] = Ad(exp(eps v_i)) v_j` over the basis symbols.
    pub fn adjoint_table(&self, eps: &Poly) -> Result<Vec<Vec<Poly>>> {
        (0..self.dim)
            .map(|i| {
                let m = self.adjoint(i, eps, None)?;
                Ok((0..self.dim).map(|j| m.image(j)).collect())
            })
            .collect()
    }

    /// True iff the span of `vectors` is closed under the bracket.
    pub fn is_subalgebra(&self, vectors: &[Vector]) -> Result<bool> {
        let mut span = EchelonBasis::new(self.dim);
        for v in vectors {
            if !span.insert(v.clone()) {
                return Err(Error::Invalid("subalgebra generators are linearly dependent".into()));
            }
        }
        for (a, x) in vectors.iter().enumerate() {
            for y in &vectors[a + 1..] {
                if !span.contains(&self.bracket(x, y)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, poly};

    fn vf(xi: &str, eta: &str, phi: &str) -> VectorField {
        VectorField::new(poly(xi).unwrap(), poly(eta).unwrap(), poly(phi).unwrap()).unwrap()
    }

    fn flagship() -> LieAlgebra {
        LieAlgebra::from_basis(vec![vf("1", "0", "0"), vf("0", "1", "0"), vf("t", "0", "1/a")]).unwrap()
    }

    #[test]
    fn commutator_examples() {
        let (v1, v2, v3) = (vf("1", "0", "0"), vf("0", "1", "0"), vf("t", "0", "1/a"));
        assert_eq!(commutator(&v2, &v3), v1);
        assert!(commutator(&v1, &v2).is_zero());
        let v = vf("x*u", "t^2", "u + x");
        assert!(commutator(&v, &v).is_zero());
    }

    #[test]
    fn commutator_table_of_flagship() {
        let alg = flagship();
        let t = alg.commutator_table();
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (1, 2) => poly("v1").unwrap(),
                    (2, 1) => poly("-v1").unwrap(),
                    _ => Poly::zero(),
                };
                assert_eq!(t[i][j], expected, "[v{}, v{}]", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn one_element_basis_is_abelian() {
        let alg = LieAlgebra::from_basis(vec![vf("x", "t", "u")]).unwrap();
        assert!(alg.structure(0, 0, 0).is_zero());
        let f = alg.series_flags();
        assert_eq!(f.nilpotency_class, Some(1));
    }

    #[test]
    fn non_closed_basis_is_rejected() {
        let err = LieAlgebra::from_basis(vec![vf("0", "1", "0"), vf("t", "0", "0")]).unwrap_err();
        assert_eq!(err, Error::NonClosure { i: 1, j: 2 });
        assert!(LieAlgebra::from_basis(vec![vf("1", "0", "0"), vf("2", "0", "0")]).is_err());
    }

    #[test]
    fn series_of_flagship() {
        let f = flagship().series_flags();
        assert!(f.solvable && f.nilpotent);
        assert_eq!(f.nilpotency_class, Some(2));
        assert_eq!(f.derived_length, Some(2));
        assert_eq!(f.lower_central_dims, vec![3, 1, 0]);
        assert_eq!(f.lower_central[1], vec![vec![int(1), int(0), int(0)]]);
        assert!(f.note.is_some());
    }

    #[test]
    fn affine_line_algebra_is_solvable_not_nilpotent() {
        // [e1, e2] = e2
        let alg = LieAlgebra::from_structure(2, |i, j, k| match (i, j, k) {
            (0, 1, 1) => int(1),
            (1, 0, 1) => int(-1),
            _ => int(0),
        })
        .unwrap();
        let f = alg.series_flags();
        assert!(f.solvable);
        assert!(!f.nilpotent);
        assert_eq!(f.derived_length, Some(2));
        assert_eq!(f.nilpotency_class, None);
    }

    #[test]
    fn adjoint_table_of_flagship() {
        let alg = flagship();
        let eps = Poly::param("eps");
        let t = alg.adjoint_table(&eps).unwrap();
        let p = |s: &str| poly(s).unwrap();
        assert_eq!(t[0], vec![p("v1"), p("v2"), p("v3")]);
        assert_eq!(t[1], vec![p("v1"), p("v2"), p("v3 - eps*v1")]);
        assert_eq!(t[2], vec![p("v1"), p("v2 + eps*v1"), p("v3")]);
    }

    #[test]
    fn adjoint_of_non_nilpotent_needs_truncation() {
        let alg = LieAlgebra::from_structure(2, |i, j, k| match (i, j, k) {
            (0, 1, 1) => int(1),
            (1, 0, 1) => int(-1),
            _ => int(0),
        })
        .unwrap();
        let eps = Poly::param("eps");
        assert_eq!(alg.adjoint(0, &eps, None).unwrap_err(), Error::NonTerminating(1, 10));
        let m = alg.adjoint(0, &eps, Some(3)).unwrap();
        // exp(-eps) truncated after the cubic term
        assert_eq!(m.entries[1][1], poly("1 - eps + eps^2/2 - eps^3/6").unwrap());
    }

    #[test]
    fn subalgebra_examples() {
        let alg = flagship();
        let e = |a: i64, b: i64, c: i64| vec![int(a), int(b), int(c)];
        assert!(alg.is_subalgebra(&[e(1, 0, 0), e(0, 1, 0)]).unwrap());
        assert!(!alg.is_subalgebra(&[e(0, 1, 0), e(0, 0, 1)]).unwrap());
        assert!(alg.is_subalgebra(&[e(1, 0, 0), e(0, 1, 0), e(0, 0, 1)]).unwrap());
        assert!(alg.is_subalgebra(&[e(1, 0, 0), e(2, 0, 0)]).is_err());
    }

    #[test]
    fn parse_elements() {
        let c = parse_element(&poly("v3 + beta*v2").unwrap(), 3).unwrap();
        assert_eq!(c, vec![Poly::zero(), poly("beta").unwrap(), Poly::one()]);
        assert!(parse_element(&poly("v3*v2").unwrap(), 3).is_err());
        assert!(parse_element(&poly("v4").unwrap(), 3).is_err());
        assert!(parse_element(&poly("x*v1").unwrap(), 3).is_err());
    }
}
