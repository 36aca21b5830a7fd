//! One PASS/FAIL line per acceptance criterion. Expected values are written
//! out by hand here and compared with what the binary or library computes.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use liesym::algebra::{express_in, LieAlgebra};
use liesym::determine::{normalize_generator, solve_symmetries, EvolutionPde};
use liesym::expr::{int, poly, rat, Dir, JetSpace, Monomial, Poly, Rational, Var};
use liesym::optimal::AlgebraVector;
use liesym::presets;
use liesym::prolong::VectorField;
use liesym::verify::{complete_k, jacobi_sn, RatFunc};

type Outcome = Result<String, String>;

fn liesym(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_liesym")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn liesym_json(args: &[&str]) -> Result<Value, String> {
    let (code, out) = liesym(args);
    if code != 0 {
        return Err(format!("{args:?} exited with {code}"));
    }
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn p(text: &str) -> Poly {
    poly(text).unwrap()
}

fn field(xi: &str, eta: &str, phi: &str) -> VectorField {
    VectorField::new(p(xi), p(eta), p(phi)).unwrap()
}

fn json_field(v: &Value) -> Result<VectorField, String> {
    let get = |k: &str| {
        v[k].as_str()
            .ok_or(format!("missing {k}"))
            .and_then(|s| poly(s).map_err(|e| e.to_string()))
    };
    VectorField::new(get("xi")?, get("eta")?, get("phi")?).map_err(|e| e.to_string())
}

fn same_span(a: &[VectorField], b: &[VectorField]) -> bool {
    a.len() == b.len() && a.iter().all(|v| express_in(b, v).is_some()) && b.iter().all(|v| express_in(a, v).is_some())
}

// [X, Y]^k = X(Y^k) - Y(X^k), computed directly from partial derivatives.
fn bracket_by_hand(a: &VectorField, b: &VectorField) -> VectorField {
    let act = |v: &VectorField, f: &Poly| {
        let mut out = &v.xi * &f.diff(&Var::X);
        out += &(&v.eta * &f.diff(&Var::T));
        out += &(&v.phi * &f.diff(&Var::Jet(liesym::expr::JetVar::U)));
        out
    };
    let c = |fa: &Poly, fb: &Poly| &act(a, fb) - &act(b, fa);
    VectorField::new(c(&a.xi, &b.xi), c(&a.eta, &b.eta), c(&a.phi, &b.phi)).unwrap()
}

fn table(rows: [[&str; 3]; 3]) -> Vec<Vec<Poly>> {
    rows.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect()
}

fn json_table(v: &Value) -> Result<Vec<Vec<Poly>>, String> {
    v.as_array()
        .ok_or("table is not an array")?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or("row is not an array")?
                .iter()
                .map(|c| poly(c.as_str().unwrap_or("?")).map_err(|e| e.to_string()))
                .collect()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let v = liesym_json(&["analyze", "--preset", "viscoelastic-tube", "--degree", "3", "--json"])?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    let pts = v["points"].as_array().ok_or("no points")?;
    let expect_pts = [[2, 3, 5, 7, 11], [13, 17, 19, 23, 29]];
    for (pt, want) in pts.iter().zip(expect_pts) {
        for (name, w) in ["a", "b", "c", "d", "e"].iter().zip(want) {
            ensure(pt[*name] == Value::String(w.to_string()), format!("point {pt}"))?;
        }
    }
    ensure(v["dimension"] == 3, format!("dimension {}", v["dimension"]))?;
    let got: Vec<VectorField> = v["generators"]
        .as_array()
        .ok_or("no generators")?
        .iter()
        .map(json_field)
        .collect::<Result<_, _>>()?;
    let expected = [field("1", "0", "0"), field("0", "1", "0"), field("t", "0", "1/a")];
    let normalized: Vec<VectorField> = expected.iter().map(normalize_generator).collect();
    ensure(got == normalized, format!("generators {got:?}"))?;
    ensure(same_span(&got, &expected), "span differs")?;
    Ok(format!("3 generators in {:.1}s", elapsed.as_secs_f64()))
}

fn flagship_tables() -> Result<Value, String> {
    liesym_json(&["tables", "--preset", "viscoelastic-tube", "--json"])
}

fn criterion_2() -> Outcome {
    let v = flagship_tables()?;
    let want = table([["0", "0", "0"], ["0", "0", "v1"], ["0", "-v1", "0"]]);
    ensure(json_table(&v["commutators"])? == want, format!("{}", v["commutators"]))?;
    let gens = [field("1", "0", "0"), field("0", "1", "0"), field("t", "0", "1/a")];
    for i in 0..3 {
        for j in 0..3 {
            let b = bracket_by_hand(&gens[i], &gens[j]);
            let expected = match (i, j) {
                (1, 2) => gens[0].clone(),
                (2, 1) => gens[0].scale(&int(-1)),
                _ => VectorField::zero(),
            };
            ensure(b == expected, format!("[v{}, v{}] = {b}", i + 1, j + 1))?;
        }
    }
    Ok("[v2, v3] = v1, all other brackets zero".into())
}

fn criterion_3() -> Outcome {
    let v = flagship_tables()?;
    let want = table([
        ["v1", "v2", "v3"],
        ["v1", "v2", "v3 - eps*v1"],
        ["v1", "v2 + eps*v1", "v3"],
    ]);
    ensure(json_table(&v["adjoint"])? == want, format!("{}", v["adjoint"]))?;
    Ok("Ad(exp(eps v2)) v3 = v3 - eps v1, Ad(exp(eps v3)) v2 = v2 + eps v1".into())
}

fn criterion_4() -> Outcome {
    let f = &flagship_tables()?["flags"];
    ensure(f["solvable"] == true, "not solvable")?;
    ensure(f["nilpotent"] == true, "not nilpotent")?;
    ensure(f["nilpotency_class"] == 2, format!("class {}", f["nilpotency_class"]))?;
    ensure(f["derived_dims"][1] == 1, format!("derived dims {}", f["derived_dims"]))?;
    Ok("solvable, nilpotent of class 2, dim [L, L] = 1".into())
}

fn criterion_5() -> Outcome {
    let v = liesym_json(&["optimal", "--preset", "viscoelastic-tube", "--samples", "200", "--json"])?;
    ensure(v["pairwise_inequivalent"] == true, "representatives conjugate")?;
    ensure(
        v["replay_failures"] == 0,
        format!("replay failures {}", v["replay_failures"]),
    )?;
    let outcomes = v["outcomes"].as_array().ok_or("no outcomes")?;
    ensure(outcomes.len() >= 200, format!("{} outcomes", outcomes.len()))?;
    for o in outcomes {
        let vec = AlgebraVector::parse(o["vector"].as_str().unwrap_or("")).map_err(|e| e.to_string())?;
        let [a1, a2, a3] = [&vec.0[0], &vec.0[1], &vec.0[2]];
        let zero = Rational::from_integer(0.into());
        // a2/a3 is unchanged by every adjoint map, and v1 spans the centre.
        let want = if *a3 != zero {
            AlgebraVector::new(zero.clone(), a2 / a3, int(1))
        } else if *a2 != zero {
            AlgebraVector::new(zero.clone(), int(1), zero.clone())
        } else {
            ensure(*a1 != zero, "zero vector sampled")?;
            AlgebraVector::new(int(1), zero.clone(), zero.clone())
        };
        let got = AlgebraVector::parse(o["canonical"].as_str().unwrap_or("")).map_err(|e| e.to_string())?;
        ensure(got == want, format!("{vec} normalised to {got}, expected {want}"))?;
        ensure(o["replay_ok"] == true, format!("replay of {vec} failed"))?;
    }
    let warnings = v["warnings"].as_array().ok_or("no warnings")?;
    ensure(warnings.len() == 1, format!("{} warnings", warnings.len()))?;
    ensure(
        warnings[0].as_str().unwrap_or("").contains("v1"),
        "warning is not about v1",
    )?;
    ensure(
        v["uncovered"].as_object().is_some_and(|m| m.keys().eq(["v1"])),
        "uncovered kinds",
    )?;
    Ok(format!(
        "{} vectors classified, one coverage warning (v1)",
        outcomes.len()
    ))
}

fn reduced(generator: &str) -> Result<Value, String> {
    liesym_json(&[
        "reduce",
        "--preset",
        "viscoelastic-tube",
        "--generator",
        generator,
        "--json",
    ])
}

fn proportional(got: &Value, want: &str) -> Result<(), String> {
    let g = poly(got.as_str().ok_or("no ode")?).map_err(|e| e.to_string())?;
    let w = p(want);
    ensure(
        g.ratio_to(&w).is_some_and(|k| k != int(0)),
        format!("`{g}` is not a multiple of `{w}`"),
    )
}

fn criterion_6() -> Outcome {
    let v = reduced("v3")?;
    proportional(&v["reduced"]["ode"], "zeta_chi + zeta/chi")?;
    let v = reduced("v2 + c0*v1")?;
    proportional(
        &v["reduced"]["ode"],
        "-c0*zeta_chi + a*zeta*zeta_chi + b*zeta_chi3 + c*zeta_chi4 + d*zeta_chi5 - e*zeta_chi2",
    )?;
    let v = reduced("v2")?;
    proportional(
        &v["reduced"]["ode"],
        "a*zeta*zeta_chi + b*zeta_chi3 + c*zeta_chi4 + d*zeta_chi5 - e*zeta_chi2",
    )?;
    let v = reduced("v3 + beta*v2")?;
    proportional(
        &v["reduced"]["ode"],
        "1/(a*beta) + a*zeta*zeta_chi + b*zeta_chi3 + c*zeta_chi4 + d*zeta_chi5 - e*zeta_chi2",
    )?;
    ensure(
        v["warnings"].as_array().is_some_and(|w| w.len() == 1),
        "cancellation warning missing",
    )?;
    let v = reduced("v1")?;
    proportional(&v["reduced"]["ode"], "zeta_chi")?;
    Ok("four reductions up to a constant factor, cancelled form with warning, zeta_chi = 0".into())
}

fn criterion_7() -> Outcome {
    let v = liesym_json(&[
        "verify",
        "--preset",
        "viscoelastic-tube",
        "--solution",
        "(x + a*c1)/(a*t)",
        "--params",
        "a=2,b=3,c=5,d=7,e=11,c1=1",
        "--grid",
        "0,1,1,2,100,100",
        "--json",
    ])?;
    ensure(
        v["symbolic_zero"] == true,
        format!("residual {}", v["symbolic_residual"]),
    )?;
    let max = v["numeric"]["max_abs"].as_f64().ok_or("no numeric residual")?;
    ensure(max < 1e-12, format!("max residual {max:e}"))?;
    ensure(v["numeric"]["points_evaluated"] == 10000, "grid size")?;
    // u = (x/a + c1)/t: u_t = -u/t, u_x = 1/(a t), higher x-derivatives vanish.
    let (a, c1) = (2.0, 1.0);
    let mut worst = 0.0f64;
    for j in 0..100 {
        for i in 0..100 {
            let (x, t) = (i as f64 / 99.0, 1.0 + j as f64 / 99.0);
            let u = (x / a + c1) / t;
            let r = -u / t + a * u / (a * t);
            worst = worst.max(r.abs());
        }
    }
    ensure(worst < 1e-12, format!("hand-derived residual {worst:e}"))?;
    Ok(format!("symbolic residual 0, numeric max {max:.1e}"))
}

fn criterion_8() -> Outcome {
    let expected = ["(x - s + a*c1)/(a*t)", "(x + a*c1)/(a*(t - s))", "(x + a*c1)/(a*t)"];
    let original = RatFunc::parse("(x + a*c1)/(a*t)").unwrap();
    for (k, want) in expected.iter().enumerate() {
        let g = format!("G{}:s", k + 1);
        let v = liesym_json(&[
            "verify",
            "--preset",
            "viscoelastic-tube",
            "--solution",
            "(x + a*c1)/(a*t)",
            "--transform",
            &g,
            "--json",
        ])?;
        ensure(
            v["symbolic_zero"] == true,
            format!("{g}: residual {}", v["symbolic_residual"]),
        )?;
        let got =
            RatFunc::parse(v["transform"]["solution"].as_str().ok_or("no solution")?).map_err(|e| e.to_string())?;
        ensure(got.same_as(&RatFunc::parse(want).unwrap()), format!("{g} gave {got}"))?;
        ensure(
            (v["transform"]["fixed"] == true) == got.same_as(&original),
            format!("{g}: fixed flag"),
        )?;
    }
    Ok("G1, G2, G3 images solve the equation; G3 fixes the solution".into())
}

fn criterion_9() -> Outcome {
    let v = liesym_json(&["analyze", "--preset", "burgers", "--json"])?;
    ensure(v["dimension"] == 5, format!("dimension {}", v["dimension"]))?;
    ensure(v["closed"] == true, "not closed")?;
    let got: Vec<VectorField> = v["generators"]
        .as_array()
        .ok_or("no generators")?
        .iter()
        .map(json_field)
        .collect::<Result<_, _>>()?;
    let oracle = [
        field("1", "0", "0"),
        field("0", "1", "0"),
        field("t", "0", "1"),
        field("x", "2*t", "-u"),
        field("x*t", "t^2", "x - t*u"),
    ];
    ensure(same_span(&got, &oracle), "span differs from the hand-derived basis")?;
    for a in &oracle {
        for b in &oracle {
            let c = bracket_by_hand(a, b);
            ensure(
                express_in(&oracle, &c).is_some(),
                format!("[{a}, {b}] = {c} leaves the span"),
            )?;
        }
    }
    Ok("5 generators, span and closure match".into())
}

fn random_poly(rng: &mut ChaCha8Rng) -> Poly {
    let vars = [
        Var::X,
        Var::T,
        Var::jet(0, 0),
        Var::jet(1, 0),
        Var::jet(0, 1),
        Var::jet(2, 0),
        Var::jet(1, 1),
        Var::jet(0, 2),
        Var::param("a"),
    ];
    let mut out = Poly::zero();
    for _ in 0..rng.gen_range(1..5) {
        let factors: Vec<(Var, i32)> = (0..rng.gen_range(0..4))
            .map(|_| (vars[rng.gen_range(0..vars.len())].clone(), rng.gen_range(1..3)))
            .collect();
        out.add_term(
            Monomial::from_factors(factors),
            rat(rng.gen_range(-9..10), rng.gen_range(1..5)),
        );
    }
    out
}

fn structure_tensors() -> Result<Vec<(String, LieAlgebra)>, String> {
    let mut out = Vec::new();
    for name in ["viscoelastic-tube", "burgers", "kdv"] {
        let pde = presets::preset(name).map_err(|e| e.to_string())?;
        out.push((name.to_string(), algebra_of(&pde, 3)?));
    }
    out.push((
        "heat".into(),
        algebra_of(&EvolutionPde::parse("u_t - u_x2").unwrap(), 1)?,
    ));
    Ok(out)
}

fn algebra_of(pde: &EvolutionPde, degree: u32) -> Result<LieAlgebra, String> {
    let b = solve_symmetries(pde, degree, &pde.default_points()).map_err(|e| e.to_string())?;
    LieAlgebra::from_basis(b.generators).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let space = JetSpace::new(6);
    for n in 0..1000 {
        let f = random_poly(&mut rng);
        let xt = space
            .total_derivative(&space.total_derivative(&f, Dir::T).unwrap(), Dir::X)
            .unwrap();
        let tx = space
            .total_derivative(&space.total_derivative(&f, Dir::X).unwrap(), Dir::T)
            .unwrap();
        ensure(xt == tx, format!("case {n}: D_x D_t != D_t D_x on {f}"))?;
    }

    let algebras = structure_tensors()?;
    for (name, alg) in &algebras {
        let n = alg.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut s = int(0);
                        for l in 0..n {
                            s += alg.structure(i, j, l) * alg.structure(l, k, m)
                                + alg.structure(j, k, l) * alg.structure(l, i, m)
                                + alg.structure(k, i, l) * alg.structure(l, j, m);
                        }
                        ensure(s == int(0), format!("{name}: Jacobi fails at ({i}, {j}, {k})"))?;
                    }
                }
            }
        }
    }

    let alg = &algebras[0].1;
    let unit = |i: usize| -> Vec<Rational> { (0..3).map(|k| int((k == i) as i64)).collect() };
    for e in [
        rat(1, 1),
        rat(-1, 1),
        rat(1, 2),
        rat(-3, 4),
        rat(2, 3),
        rat(5, 1),
        rat(-7, 2),
        rat(1, 9),
        rat(11, 5),
        rat(0, 1),
    ] {
        for g in 0..3 {
            let ad = alg
                .adjoint(g, &Poly::param("eps"), None)
                .and_then(|m| m.eval(&e))
                .map_err(|err| err.to_string())?;
            for i in 0..3 {
                for j in 0..3 {
                    let lhs = ad.apply(&alg.bracket(&unit(i), &unit(j)));
                    let rhs = alg.bracket(&ad.apply(&unit(i)), &ad.apply(&unit(j)));
                    ensure(lhs == rhs, format!("Ad(exp({e} v{})) is not an automorphism", g + 1))?;
                }
            }
        }
    }

    for k in [0.0, 0.1, 0.5, 0.9, 0.99] {
        let sn0 = jacobi_sn(0.0, k).map_err(|e| e.to_string())?;
        ensure(sn0.abs() < 1e-10, format!("sn(0, {k}) = {sn0}"))?;
        let kk = complete_k(k).map_err(|e| e.to_string())?;
        let q = jacobi_sn(kk, k).map_err(|e| e.to_string())?;
        ensure((q - 1.0).abs() < 1e-10, format!("sn(K, {k}) = {q}"))?;
    }
    for z in [-3.0, -0.5, 0.25, 1.0, 2.5] {
        let s = jacobi_sn(z, 0.0).map_err(|e| e.to_string())?;
        ensure((s - f64::sin(z)).abs() < 1e-10, format!("sn({z}, 0) = {s}"))?;
    }
    Ok(format!(
        "1000 commutation cases, Jacobi on {} algebras, 10 automorphism values, sn identities",
        algebras.len()
    ))
}

fn criterion_11() -> Outcome {
    let (c1, first) = liesym(&["paper-repro", "--json"]);
    let (c2, second) = liesym(&["paper-repro", "--json"]);
    ensure(c1 == 0 && c2 == 0, format!("exit codes {c1}, {c2}"))?;
    ensure(first == second, "outputs differ")?;
    let v: Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    let w = v["warnings"].as_array().ok_or("no warnings")?.len();
    ensure(w == 2, format!("{w} warnings"))?;
    ensure(v["passed"] == true, format!("failures {}", v["failures"]))?;
    Ok(format!("{} identical bytes, exit 0, 2 warnings", first.len()))
}

// Written to the raw stream so the lines show without --nocapture.
fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("symmetry recovery", criterion_1),
        ("commutator table", criterion_2),
        ("adjoint table", criterion_3),
        ("algebra flags", criterion_4),
        ("optimal system", criterion_5),
        ("reductions", criterion_6),
        ("closed-form solution", criterion_7),
        ("group action on solutions", criterion_8),
        ("Burgers oracle", criterion_9),
        ("property suites", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (n, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => report(&format!("criterion {:>2} {name}: PASS ({detail})", n + 1)),
            Err(why) => {
                report(&format!("criterion {:>2} {name}: FAIL ({why})", n + 1));
                failed.push(n + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
