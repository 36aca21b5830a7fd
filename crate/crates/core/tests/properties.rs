use std::collections::BTreeSet;

use num_traits::Zero;
use proptest::prelude::*;

use liesym::algebra::LieAlgebra;
use liesym::expr::{int, poly, rat, Dir, JetSpace, JetVar, Monomial, Poly, Rational, Var};
use liesym::optimal::{normalize_1d, AdjointStep, AlgebraVector, OrbitWitness};
use liesym::prolong::{prolong, prolong_closed_form, VectorField};
use liesym::verify::{transform_solution, RatFunc};

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..10, 1i64..6).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn poly_over(vars: Vec<Var>, min_exp: i32) -> impl Strategy<Value = Poly> {
    let n = vars.len();
    let term = (rational(), prop::collection::vec((0..n, min_exp..3), 0..4));
    prop::collection::vec(term, 0..5).prop_map(move |terms| {
        let mut out = Poly::zero();
        for (c, factors) in terms {
            let m = Monomial::from_factors(factors.into_iter().map(|(k, e)| (vars[k].clone(), e)));
            out.add_term(m, c);
        }
        out
    })
}

fn jet_poly() -> impl Strategy<Value = Poly> {
    poly_over(
        vec![
            Var::X,
            Var::T,
            Var::jet(0, 0),
            Var::jet(1, 0),
            Var::jet(0, 1),
            Var::jet(2, 0),
            Var::jet(1, 1),
            Var::jet(3, 0),
        ],
        0,
    )
}

fn point_poly() -> impl Strategy<Value = Poly> {
    poly_over(vec![Var::X, Var::T, Var::jet(0, 0)], 0)
}

fn heisenberg() -> LieAlgebra {
    LieAlgebra::from_structure(3, |i, j, k| match (i, j, k) {
        (1, 2, 0) => int(1),
        (2, 1, 0) => int(-1),
        _ => int(0),
    })
    .unwrap()
}

fn algebra_vector() -> impl Strategy<Value = AlgebraVector> {
    (rational(), rational(), rational())
        .prop_map(|(a, b, c)| AlgebraVector::new(a, b, c))
        .prop_filter("nonzero", |v| !v.is_zero())
}

proptest! {
    #[test]
    fn print_parse_round_trip(p in poly_over(vec![Var::X, Var::T, Var::jet(0, 0), Var::jet(2, 1), Var::param("a")], -1)) {
        let p = p.retain(|m| !m.contains(|v| matches!(v, Var::Jet(_))) || m.factors().iter().all(|(_, e)| *e >= 0));
        let back = poly(&p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn leibniz_rule(f in jet_poly(), g in jet_poly()) {
        let s = JetSpace::new(6);
        for dir in [Dir::X, Dir::T] {
            let lhs = s.total_derivative(&(&f * &g), dir).unwrap();
            let rhs = &(&s.total_derivative(&f, dir).unwrap() * &g) + &(&f * &s.total_derivative(&g, dir).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn linearity(f in jet_poly(), g in jet_poly(), a in rational(), b in rational()) {
        let s = JetSpace::new(6);
        let comb = &f.scale(&a) + &g.scale(&b);
        let lhs = s.total_derivative(&comb, Dir::X).unwrap();
        let rhs = &s.total_derivative(&f, Dir::X).unwrap().scale(&a) + &s.total_derivative(&g, Dir::X).unwrap().scale(&b);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn recursion_matches_closed_form(xi in point_poly(), eta in point_poly(), phi in point_poly()) {
        let v = VectorField::new(xi, eta, phi).unwrap();
        let space = JetSpace::new(5);
        let p = prolong(&v, 3, &space).unwrap();
        for (j, c) in &p.coeffs {
            prop_assert_eq!(c, &prolong_closed_form(&v, *j, &space).unwrap(), "phi^{}", j);
        }
        prop_assert_eq!(p.coeffs.len(), 9);
        let wanted: BTreeSet<JetVar> = p.coeffs.keys().copied().collect();
        prop_assert!(wanted.contains(&JetVar::new(1, 2)));
    }

    #[test]
    fn normalization_is_idempotent(v in algebra_vector()) {
        let alg = heisenberg();
        let (canon, witness) = normalize_1d(&alg, &v).unwrap();
        prop_assert_eq!(witness.apply(&alg, &v).unwrap(), canon.vector());
        let (again, w2) = normalize_1d(&alg, &canon.vector()).unwrap();
        prop_assert_eq!(&again, &canon);
        prop_assert_eq!(w2.apply(&alg, &canon.vector()).unwrap(), canon.vector());
        prop_assert_eq!(witness.inverse().apply(&alg, &canon.vector()).unwrap(), v);
    }

    #[test]
    fn normalization_is_constant_on_orbits(v in algebra_vector(), g in 0usize..3, e in rational(), c in nonzero_rational()) {
        let alg = heisenberg();
        let step = OrbitWitness { steps: vec![AdjointStep { generator: g, eps: e }], scale: c };
        let w = step.apply(&alg, &v).unwrap();
        prop_assert_eq!(normalize_1d(&alg, &w).unwrap().0, normalize_1d(&alg, &v).unwrap().0);
    }

    #[test]
    fn adjoint_is_an_automorphism(g in 0usize..3, e in rational(), a in algebra_vector(), b in algebra_vector()) {
        let alg = heisenberg();
        let ad = alg.adjoint(g, &Poly::param("eps"), None).unwrap().eval(&e).unwrap();
        let lhs = ad.apply(&alg.bracket(&a.0, &b.0));
        let rhs = alg.bracket(&ad.apply(&a.0), &ad.apply(&b.0));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjoint_group_law(g in 0usize..3, e1 in rational(), e2 in rational(), v in algebra_vector()) {
        let alg = heisenberg();
        let m = alg.adjoint(g, &Poly::param("eps"), None).unwrap();
        let two = m.eval(&e1).unwrap().apply(&m.eval(&e2).unwrap().apply(&v.0));
        let one = m.eval(&(e1 + e2)).unwrap().apply(&v.0);
        prop_assert_eq!(two, one);
    }

    #[test]
    fn flows_compose(k in 0usize..3, s1 in rational(), s2 in rational()) {
        let gens = [
            VectorField::new(Poly::one(), Poly::zero(), Poly::zero()).unwrap(),
            VectorField::new(Poly::zero(), Poly::one(), Poly::zero()).unwrap(),
            VectorField::new(poly("t").unwrap(), Poly::zero(), poly("1/a").unwrap()).unwrap(),
        ];
        let f = RatFunc::parse("(x + a*c1)/(a*t) + x^2*t").unwrap();
        let c = |s: &Rational| Poly::constant(s.clone());
        let twice = transform_solution(&gens[k], &c(&s2), &transform_solution(&gens[k], &c(&s1), &f).unwrap()).unwrap();
        let once = transform_solution(&gens[k], &c(&(&s1 + &s2)), &f).unwrap();
        prop_assert!(twice.same_as(&once), "{} vs {}", twice, once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn total_derivatives_commute(f in jet_poly()) {
        let s = JetSpace::new(6);
        let xt = s.total_derivative(&s.total_derivative(&f, Dir::T).unwrap(), Dir::X).unwrap();
        let tx = s.total_derivative(&s.total_derivative(&f, Dir::X).unwrap(), Dir::T).unwrap();
        prop_assert_eq!(xt, tx);
    }
}
