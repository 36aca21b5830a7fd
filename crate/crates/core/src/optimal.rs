//! One-dimensional optimal systems for three-dimensional algebras with a
//! single nonzero bracket `[v2, v3] = k v1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{parse_element, render_element, LieAlgebra};
use crate::error::{Error, Result};
use crate::expr::{int, rat, Poly, Rational, Var};
use crate::linalg::Vector;

/// Coefficients `(a1, a2, a3)` of `a1 v1 + a2 v2 + a3 v3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraVector(pub Vec<Rational>);

impl AlgebraVector {
    pub fn new(a1: Rational, a2: Rational, a3: Rational) -> Self {
        AlgebraVector(vec![a1, a2, a3])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> AlgebraVector {
        AlgebraVector(self.0.iter().map(|x| x * c).collect())
    }

    /// Parses `a1*v1 + a2*v2 + a3*v3` with rational coefficients.
    pub fn parse(text: &str) -> Result<AlgebraVector> {
        let p = crate::expr::poly(text)?;
        let coeffs = parse_element(&p, 3)?
            .into_iter()
            .map(|c| {
                c.as_constant()
                    .ok_or_else(|| Error::Invalid(format!("coefficient `{c}` must be a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraVector(coeffs))
    }
}

impl fmt::Display for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_element(&self.0))
    }
}

impl Serialize for AlgebraVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjointStep {
    pub generator: usize,
    pub eps: Rational,
}

/// Adjoint steps applied in order, then an overall scaling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitWitness {
    pub steps: Vec<AdjointStep>,
    pub scale: Rational,
}

impl OrbitWitness {
    pub fn identity() -> Self {
        OrbitWitness {
            steps: Vec::new(),
            scale: Rational::one(),
        }
    }

    /// Replays the witness with the general adjoint matrices of `alg`.
    pub fn apply(&self, alg: &LieAlgebra, v: &AlgebraVector) -> Result<AlgebraVector> {
        let mut cur: Vector = v.0.clone();
        for s in &self.steps {
            let m = alg.adjoint(s.generator, &Poly::constant(s.eps.clone()), None)?;
            cur = m.eval(&s.eps)?.apply(&cur);
        }
        Ok(AlgebraVector(cur).scale(&self.scale))
    }

    pub fn inverse(&self) -> OrbitWitness {
        OrbitWitness {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| AdjointStep {
                    generator: s.generator,
                    eps: -s.eps.clone(),
                })
                .collect(),
            scale: self.scale.recip(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &OrbitWitness) -> OrbitWitness {
        OrbitWitness {
            steps: self.steps.iter().chain(&next.steps).cloned().collect(),
            scale: &self.scale * &next.scale,
        }
    }
}

impl fmt::Display for OrbitWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            write!(f, "Ad(exp({}*v{})) then ", s.eps, s.generator + 1)?;
        }
        write!(f, "scale {}", self.scale)
    }
}

impl Serialize for OrbitWitness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Canonical forms of one-dimensional subalgebras.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Canonical {
    V1,
    V2,
    /// `v3 + alpha v2`
    V3PlusAlpha(Rational),
}

impl Canonical {
    pub fn vector(&self) -> AlgebraVector {
        let (z, o) = (Rational::zero(), Rational::one());
        match self {
            Canonical::V1 => AlgebraVector::new(o, z.clone(), z),
            Canonical::V2 => AlgebraVector::new(z.clone(), o, z),
            Canonical::V3PlusAlpha(a) => AlgebraVector::new(z, a.clone(), o),
        }
    }

    /// Collapses `alpha` to its sign.
    pub fn coarse(&self) -> Canonical {
        match self {
            Canonical::V3PlusAlpha(a) => Canonical::V3PlusAlpha(a.signum()),
            c => c.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Canonical::V1 => "v1",
            Canonical::V2 => "v2",
            Canonical::V3PlusAlpha(_) => "v3 + alpha*v2",
        }
    }
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vector())
    }
}

impl Serialize for Canonical {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The bracket constant `k` in `[v2, v3] = k v1`, or an error when the
/// algebra has any other shape.
pub fn heisenberg_constant(alg: &LieAlgebra) -> Result<Rational> {
    if alg.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "optimal systems are only computed for three-dimensional algebras, got dimension {}",
            alg.dim()
        )));
    }
    let k = alg.structure(1, 2, 0).clone();
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                let expected = match (i, j, l) {
                    (1, 2, 0) => k.clone(),
                    (2, 1, 0) => -k.clone(),
                    _ => Rational::zero(),
                };
                if *alg.structure(i, j, l) != expected || k.is_zero() {
                    return Err(Error::Unsupported(
                        "algebra is not of the form [v2, v3] = k v1 with all other brackets zero".into(),
                    ));
                }
            }
        }
    }
    Ok(k)
}

/// Canonical representative of the subalgebra spanned by `v`.
pub fn normalize_1d(alg: &LieAlgebra, v: &AlgebraVector) -> Result<(Canonical, OrbitWitness)> {
    let k = heisenberg_constant(alg)?;
    if v.0.len() != 3 {
        return Err(Error::Invalid(format!("expected 3 coefficients, got {}", v.0.len())));
    }
    if v.is_zero() {
        return Err(Error::Invalid("the zero vector spans no subalgebra".into()));
    }
    let (a1, a2, a3) = (&v.0[0], &v.0[1], &v.0[2]);
    Ok(if !a3.is_zero() {
        // Ad(exp(e v2)) v3 = v3 - e k v1
        let eps = a1 / (a3 * &k);
        let steps = if eps.is_zero() {
            Vec::new()
        } else {
            vec![AdjointStep { generator: 1, eps }]
        };
        (
            Canonical::V3PlusAlpha(a2 / a3),
            OrbitWitness {
                steps,
                scale: a3.recip(),
            },
        )
    } else if !a2.is_zero() {
        // Ad(exp(e v3)) v2 = v2 + e k v1
        let eps = -(a1 / (a2 * &k));
        let steps = if eps.is_zero() {
            Vec::new()
        } else {
            vec![AdjointStep { generator: 2, eps }]
        };
        (
            Canonical::V2,
            OrbitWitness {
                steps,
                scale: a2.recip(),
            },
        )
    } else {
        (
            Canonical::V1,
            OrbitWitness {
                steps: Vec::new(),
                scale: a1.recip(),
            },
        )
    })
}

/// A witness mapping `v` to `w` when they span conjugate subalgebras.
pub fn equivalent_1d(alg: &LieAlgebra, v: &AlgebraVector, w: &AlgebraVector) -> Result<Option<OrbitWitness>> {
    let (cv, wv) = normalize_1d(alg, v)?;
    let (cw, ww) = normalize_1d(alg, w)?;
    Ok((cv == cw).then(|| wv.then(&ww.inverse())))
}

/// `base + p * direction` for a free parameter `p`, or a single vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub label: String,
    pub base: Vector,
    pub direction: Option<(String, Vector)>,
}

impl Family {
    /// Parses e.g. `v2` or `v3 + alpha*v2`: coefficients affine in at most
    /// one parameter.
    pub fn parse(text: &str) -> Result<Family> {
        let p = crate::expr::poly(text)?;
        let coeffs = parse_element(&p, 3)?;
        let mut base = Vec::new();
        let mut dir = Vec::new();
        let mut name: Option<Var> = None;
        for c in &coeffs {
            let mut b = Rational::zero();
            let mut d = Rational::zero();
            for (m, x) in c.terms() {
                match m.factors() {
                    [] => b = x.clone(),
                    [(v, 1)] if name.as_ref().is_none_or(|n| n == v) => {
                        name = Some(v.clone());
                        d = x.clone();
                    }
                    _ => return Err(Error::Invalid(format!("`{text}` is not affine in a single parameter"))),
                }
            }
            base.push(b);
            dir.push(d);
        }
        Ok(Family {
            label: p.to_string(),
            base,
            direction: name.map(|n| (n.to_string(), dir)),
        })
    }

    pub fn fixed(v: &AlgebraVector) -> Family {
        Family {
            label: v.to_string(),
            base: v.0.clone(),
            direction: None,
        }
    }

    pub fn member(&self, p: &Rational) -> AlgebraVector {
        match &self.direction {
            None => AlgebraVector(self.base.clone()),
            Some((_, d)) => AlgebraVector(self.base.iter().zip(d).map(|(b, x)| b + p * x).collect()),
        }
    }

    /// Parameter values worth trying when looking for a member conjugate to
    /// `target`: the roots of each coefficient condition, plus a few generic
    /// values for conditions that hold identically.
    fn candidates(&self, target: &Canonical) -> Vec<Rational> {
        let Some((_, d)) = &self.direction else {
            return vec![Rational::zero()];
        };
        let b = &self.base;
        let mut lin = vec![(b[2].clone(), d[2].clone()), (b[1].clone(), d[1].clone())];
        if let Canonical::V3PlusAlpha(a) = target {
            lin.push((&b[1] - a * &b[2], &d[1] - a * &d[2]));
        }
        let mut out: BTreeSet<Rational> = [0, 1, -1, 2].into_iter().map(int).collect();
        for (c0, c1) in lin {
            if !c1.is_zero() {
                out.insert(-c0 / c1);
            }
        }
        out.into_iter().collect()
    }

    /// A parameter value whose member is conjugate to `target`.
    pub fn find(&self, alg: &LieAlgebra, target: &Canonical) -> Result<Option<Rational>> {
        for p in self.candidates(target) {
            let m = self.member(&p);
            if !m.is_zero() && normalize_1d(alg, &m)?.0 == *target {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    fn samples(&self) -> Vec<Rational> {
        match self.direction {
            None => vec![Rational::zero()],
            Some(_) => [-3, -1, 0, 1, 2, 5]
                .into_iter()
                .map(int)
                .chain([rat(1, 2), rat(-7, 3)])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub vector: AlgebraVector,
    pub canonical: Canonical,
    pub witness: OrbitWitness,
    pub replay_ok: bool,
    /// Index of the covering family, if any.
    pub family: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalReport {
    pub representatives: Vec<String>,
    /// Pairs of representatives (by index) found conjugate to each other,
    /// including distinct parameter values within one family.
    pub duplicates: Vec<(usize, usize)>,
    pub pairwise_inequivalent: bool,
    pub samples: usize,
    pub covered: usize,
    pub replay_failures: usize,
    /// Canonical kinds not reached by any representative, with the number of
    /// samples landing there.
    pub uncovered: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub outcomes: Vec<SampleOutcome>,
}

impl OptimalReport {
    pub fn is_complete(&self) -> bool {
        self.pairwise_inequivalent && self.uncovered.is_empty() && self.replay_failures == 0
    }
}

/// Random nonzero vectors whose coordinates are zero with probability 1/3
/// and otherwise small nonzero rationals.
pub fn random_vectors(n: usize, seed: u64) -> Vec<AlgebraVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = AlgebraVector(
            (0..3)
                .map(|_| {
                    if rng.gen_range(0..3) == 0 {
                        Rational::zero()
                    } else {
                        let mut num: i64 = rng.gen_range(1..=9);
                        if rng.gen_bool(0.5) {
                            num = -num;
                        }
                        Rational::new(num.into(), rng.gen_range(1i64..=5).into())
                    }
                })
                .collect(),
        );
        if !v.is_zero() {
            out.push(v);
        }
    }
    out
}

/// Checks that `reps` are pairwise inequivalent and cover every orbit.
///
/// Coverage is tested on the three structural probes `v1`, `v2`, `v3` and on
/// `samples` random vectors drawn with `seed`.
pub fn verify_optimal_system(alg: &LieAlgebra, reps: &[Family], samples: usize, seed: u64) -> Result<OptimalReport> {
    if reps.is_empty() {
        return Err(Error::Invalid("no representatives given".into()));
    }
    heisenberg_constant(alg)?;

    let mut forms: Vec<Vec<Canonical>> = Vec::new();
    for f in reps {
        let mut fs = Vec::new();
        for p in f.samples() {
            let m = f.member(&p);
            if !m.is_zero() {
                fs.push(normalize_1d(alg, &m)?.0);
            }
        }
        forms.push(fs);
    }
    let mut duplicates = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..reps.len() {
        let distinct: BTreeSet<_> = forms[i].iter().collect();
        if distinct.len() < forms[i].len() {
            duplicates.push((i, i));
            warnings.push(format!("representative `{}` has conjugate members", reps[i].label));
        }
        for j in (i + 1)..reps.len() {
            let hit = forms[i].iter().find_map(|c| match reps[j].find(alg, c) {
                Ok(Some(_)) => Some(Ok(c.clone())),
                Ok(None) => None,
                Err(e) => Some(Err(e)),
            });
            if let Some(c) = hit {
                let c = c?;
                duplicates.push((i, j));
                warnings.push(format!(
                    "representatives `{}` and `{}` are conjugate (both reach {c})",
                    reps[i].label, reps[j].label
                ));
            }
        }
    }

    let probes = [Canonical::V1, Canonical::V2, Canonical::V3PlusAlpha(Rational::zero())].map(|c| c.vector());
    let vectors: Vec<AlgebraVector> = probes.into_iter().chain(random_vectors(samples, seed)).collect();
    let mut outcomes = Vec::with_capacity(vectors.len());
    let mut uncovered: BTreeMap<String, usize> = BTreeMap::new();
    let mut covered = 0;
    let mut replay_failures = 0;
    for v in vectors {
        let (canonical, witness) = normalize_1d(alg, &v)?;
        let replay_ok = witness.apply(alg, &v)? == canonical.vector();
        if !replay_ok {
            replay_failures += 1;
        }
        let mut family = None;
        for (k, f) in reps.iter().enumerate() {
            if f.find(alg, &canonical)?.is_some() {
                family = Some(k);
                break;
            }
        }
        match family {
            Some(_) => covered += 1,
            None => *uncovered.entry(canonical.kind().to_string()).or_default() += 1,
        }
        outcomes.push(SampleOutcome {
            vector: v,
            canonical,
            witness,
            replay_ok,
            family,
        });
    }
    for (kind, n) in &uncovered {
        warnings.push(format!(
            "orbit of {kind} is not represented in the list ({n} of {} vectors land there)",
            outcomes.len()
        ));
    }
    if replay_failures > 0 {
        warnings.push(format!("{replay_failures} witnesses failed to replay"));
    }
    Ok(OptimalReport {
        representatives: reps.iter().map(|f| f.label.clone()).collect(),
        pairwise_inequivalent: duplicates.is_empty(),
        duplicates,
        samples: outcomes.len(),
        covered,
        replay_failures,
        uncovered,
        warnings,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis() -> LieAlgebra {
        LieAlgebra::from_structure(3, |i, j, k| match (i, j, k) {
            (1, 2, 0) => int(1),
            (2, 1, 0) => int(-1),
            _ => int(0),
        })
        .unwrap()
    }

    fn av(a: i64, b: i64, c: i64) -> AlgebraVector {
        AlgebraVector::new(int(a), int(b), int(c))
    }

    #[test]
    fn normalize_examples() {
        let alg = heis();
        let (c, w) = normalize_1d(&alg, &av(2, 3, 1)).unwrap();
        assert_eq!(c, Canonical::V3PlusAlpha(int(3)));
        assert_eq!(
            w.steps,
            vec![AdjointStep {
                generator: 1,
                eps: int(2)
            }]
        );
        assert_eq!(w.scale, int(1));
        assert_eq!(normalize_1d(&alg, &av(-4, 1, 0)).unwrap().0, Canonical::V2);
        assert_eq!(normalize_1d(&alg, &av(5, 0, 0)).unwrap().0, Canonical::V1);
        assert!(normalize_1d(&alg, &av(0, 0, 0)).is_err());
    }

    #[test]
    fn witness_replays() {
        let alg = heis();
        for v in random_vectors(50, 7) {
            let (c, w) = normalize_1d(&alg, &v).unwrap();
            assert_eq!(w.apply(&alg, &v).unwrap(), c.vector(), "{v}");
        }
    }

    #[test]
    fn equivalence_examples() {
        let alg = heis();
        let w = equivalent_1d(&alg, &av(7, 1, 1), &av(0, 1, 1)).unwrap().unwrap();
        assert_eq!(w.apply(&alg, &av(7, 1, 1)).unwrap(), av(0, 1, 1));
        assert!(equivalent_1d(&alg, &av(0, 1, 0), &av(1, 0, 0)).unwrap().is_none());
        let v = AlgebraVector::new(rat(1, 2), int(-3), int(2));
        let w = equivalent_1d(&alg, &v, &v.scale(&rat(-5, 3))).unwrap().unwrap();
        assert_eq!(w.apply(&alg, &v).unwrap(), v.scale(&rat(-5, 3)));
    }

    #[test]
    fn other_structures_are_refused() {
        let abelian = LieAlgebra::from_structure(3, |_, _, _| int(0)).unwrap();
        assert!(matches!(
            normalize_1d(&abelian, &av(1, 0, 0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn family_parsing() {
        let f = Family::parse("v3 + alpha*v2").unwrap();
        assert_eq!(f.base, vec![int(0), int(0), int(1)]);
        assert_eq!(f.direction, Some(("alpha".to_string(), vec![int(0), int(1), int(0)])));
        assert_eq!(Family::parse("2*v1").unwrap().direction, None);
        assert!(Family::parse("alpha*beta*v1").is_err());
        assert!(Family::parse("alpha*v1 + beta*v2").is_err());
    }

    #[test]
    fn stated_list_misses_v1() {
        let alg = heis();
        let reps = [Family::parse("v2").unwrap(), Family::parse("v3 + alpha*v2").unwrap()];
        let r = verify_optimal_system(&alg, &reps, 200, 42).unwrap();
        assert!(r.pairwise_inequivalent);
        assert_eq!(r.warnings.len(), 1, "{:?}", r.warnings);
        assert_eq!(r.uncovered.keys().collect::<Vec<_>>(), vec!["v1"]);
        assert_eq!(r.replay_failures, 0);
    }

    #[test]
    fn completed_list_is_optimal() {
        let alg = heis();
        let reps = ["v1", "v2", "v3 + alpha*v2"].map(|s| Family::parse(s).unwrap());
        let r = verify_optimal_system(&alg, &reps, 200, 42).unwrap();
        assert!(r.is_complete(), "{:?}", r.warnings);
        assert_eq!(r.covered, 203);
    }

    #[test]
    fn duplicates_are_detected() {
        let alg = heis();
        let reps = ["v2", "v2"].map(|s| Family::parse(s).unwrap());
        let r = verify_optimal_system(&alg, &reps, 10, 42).unwrap();
        assert_eq!(r.duplicates, vec![(0, 1)]);
        let reps = ["v3 + alpha*v2", "v3 + v1"].map(|s| Family::parse(s).unwrap());
        assert!(
            !verify_optimal_system(&alg, &reps, 10, 42)
                .unwrap()
                .pairwise_inequivalent
        );
        // every member of v3 + p v1 is conjugate to v3
        let r = verify_optimal_system(&alg, &[Family::parse("v3 + alpha*v1").unwrap()], 10, 42).unwrap();
        assert_eq!(r.duplicates, vec![(0, 0)]);
    }

    #[test]
    fn coarse_forms() {
        assert_eq!(
            Canonical::V3PlusAlpha(rat(-2, 7)).coarse(),
            Canonical::V3PlusAlpha(int(-1))
        );
        assert_eq!(Canonical::V2.coarse(), Canonical::V2);
    }
}
