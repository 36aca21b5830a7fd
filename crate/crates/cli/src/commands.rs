use std::collections::BTreeMap;
use std::fmt::Write;

use log::{debug, info};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use liesym::algebra::LieAlgebra;
use liesym::determine::{solve_symmetries, EvolutionPde, ParamPoint, SymmetryBasis};
use liesym::expr::{poly, JetSpace, Rational, Var};
use liesym::optimal::{verify_optimal_system, Family};
use liesym::prolong::{prolong as prolong_field, VectorField};
use liesym::reduce::{combine, invariants, reduce_pde, solve_linear_first_order};
use liesym::verify::{
    elliptic_profile, residual_numeric, residual_ode, residual_symbolic, transform_solution, Grid, RatFunc, EXACT_TOL,
};
use liesym::{presets, repro, Error, Result};

use crate::render::grid;
use crate::{Source, MISMATCH};

pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub code: u8,
}

fn load(s: &Source) -> Result<EvolutionPde> {
    match (&s.preset, &s.file) {
        (Some(name), _) => presets::preset(name),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {path}: {e}")))?;
            let body: Vec<&str> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .collect();
            EvolutionPde::parse(&body.join(" "))
        }
        (None, None) => Err(Error::Invalid("give an equation file or --preset".into())),
    }
}

fn parse_point(text: &str) -> Result<ParamPoint> {
    let mut out = ParamPoint::new();
    for item in text.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("`{item}` is not name=value")))?;
        let value = poly(v)?
            .as_constant()
            .ok_or_else(|| Error::Invalid(format!("value of `{k}` must be a number")))?;
        out.insert(Var::param(k.trim()), value);
    }
    Ok(out)
}

/// Two parameter points for the equation; `--params` keys that are not
/// equation parameters are rejected when `strict`.
fn points(s: &Source, pde: &EvolutionPde, strict: bool) -> Result<[ParamPoint; 2]> {
    let mut pts = pde.default_points();
    for (k, text) in [&s.params, &s.second_point].into_iter().enumerate() {
        let Some(text) = text else { continue };
        for (var, value) in parse_point(text)? {
            if pde.params.contains(&var) {
                pts[k].insert(var, value);
            } else if strict {
                return Err(Error::Invalid(format!("`{var}` is not a parameter of {pde}")));
            }
        }
    }
    Ok(pts)
}

fn basis_for(s: &Source, pde: &EvolutionPde, strict: bool) -> Result<SymmetryBasis> {
    let pts = points(s, pde, strict)?;
    info!("solving determining equations at degree {}", s.degree);
    let basis = solve_symmetries(pde, s.degree, &pts)?;
    debug!("free columns {:?}", basis.free_columns);
    Ok(basis)
}

fn point_json(p: &ParamPoint) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.to_string(), json!(v.to_string()))).collect())
}

fn point_text(p: &ParamPoint) -> String {
    let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("({})", parts.join(", "))
}

fn field_json(v: &VectorField) -> Value {
    json!({
        "xi": v.xi.to_string(),
        "eta": v.eta.to_string(),
        "phi": v.phi.to_string(),
        "field": v.to_string(),
    })
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn analyze(s: &Source) -> Result<Outcome> {
    let pde = load(s)?;
    let basis = basis_for(s, &pde, true)?;
    let closed = LieAlgebra::from_basis(basis.generators.clone()).is_ok();
    let mut text = String::new();
    let _ = writeln!(text, "equation: {pde}");
    let _ = writeln!(
        text,
        "ansatz degree {} at {} and {}",
        basis.ansatz_degree,
        point_text(&basis.points[0]),
        point_text(&basis.points[1])
    );
    let _ = writeln!(text, "dimension {}", basis.dimension);
    for (k, g) in basis.generators.iter().enumerate() {
        let _ = writeln!(text, "  v{} = {g}", k + 1);
    }
    let general = basis.general_solution();
    let _ = writeln!(text, "general: {general}");
    let _ = writeln!(text, "closed under commutator: {closed}");
    let generators: Vec<Value> = basis
        .generators
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let mut v = field_json(g);
            v["name"] = json!(format!("v{}", k + 1));
            v
        })
        .collect();
    Ok(Outcome {
        json: json!({
            "command": "analyze",
            "equation": pde.to_string(),
            "degree": basis.ansatz_degree,
            "points": basis.points.iter().map(point_json).collect::<Vec<_>>(),
            "dimension": basis.dimension,
            "free_columns": basis.free_columns,
            "generators": generators,
            "general_solution": field_json(&general),
            "closed": closed,
        }),
        text,
        code: 0,
    })
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("v{k}")).collect()
}

fn strings(t: &[Vec<liesym::expr::Poly>]) -> Vec<Vec<String>> {
    t.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

pub fn tables(s: &Source) -> Result<Outcome> {
    let pde = load(s)?;
    let basis = basis_for(s, &pde, true)?;
    let alg = LieAlgebra::from_basis(basis.generators.clone())?;
    let n = alg.dim();
    let comm = strings(&alg.commutator_table());
    let eps = liesym::expr::Poly::param("eps");
    let (adjoint, adjoint_note) = match alg.adjoint_table(&eps) {
        Ok(t) => (Some(strings(&t)), None),
        Err(e @ Error::NonTerminating(..)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let flags = alg.series_flags();
    let mut text = String::new();
    for (k, g) in basis.generators.iter().enumerate() {
        let _ = writeln!(text, "v{} = {g}", k + 1);
    }
    let _ = writeln!(text, "\nCommutator table");
    let rows: Vec<(String, Vec<String>)> = names(n).into_iter().zip(comm.clone()).collect();
    text.push_str(&grid("[,]", &names(n), &rows));
    let _ = writeln!(text, "\nAdjoint table Ad(exp(eps*v_i)) v_j");
    match (&adjoint, &adjoint_note) {
        (Some(t), _) => {
            let rows: Vec<(String, Vec<String>)> = names(n).into_iter().zip(t.clone()).collect();
            text.push_str(&grid("Ad", &names(n), &rows));
        }
        (None, Some(note)) => {
            let _ = writeln!(text, "{note}");
        }
        (None, None) => {}
    }
    let _ = writeln!(
        text,
        "\nsolvable: {}, nilpotent: {}, derived series dims {:?}, lower central dims {:?}",
        flags.solvable, flags.nilpotent, flags.derived_dims, flags.lower_central_dims
    );
    if let Some(c) = flags.nilpotency_class {
        let _ = writeln!(text, "nilpotency class {c}");
    }
    if let Some(note) = &flags.note {
        let _ = writeln!(text, "{note}");
    }
    Ok(Outcome {
        json: json!({
            "command": "tables",
            "equation": pde.to_string(),
            "generators": basis.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "commutators": comm,
            "adjoint": adjoint,
            "adjoint_note": adjoint_note,
            "flags": serde_json::to_value(&flags).expect("serializable"),
        }),
        text,
        code: 0,
    })
}

pub fn optimal(s: &Source, samples: usize, coarse: bool, reps: &[String]) -> Result<Outcome> {
    let pde = load(s)?;
    let basis = basis_for(s, &pde, true)?;
    let alg = LieAlgebra::from_basis(basis.generators.clone())?;
    let reps: Vec<String> = if reps.is_empty() {
        vec!["v2".into(), "v3 + alpha*v2".into()]
    } else {
        reps.to_vec()
    };
    let families: Vec<Family> = reps.iter().map(|r| Family::parse(r)).collect::<Result<_>>()?;
    let report = verify_optimal_system(&alg, &families, samples, s.seed)?;
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    let mut outcomes = Vec::new();
    for o in &report.outcomes {
        let canon = if coarse {
            o.canonical.coarse()
        } else {
            o.canonical.clone()
        };
        *classes.entry(canon.to_string()).or_default() += 1;
        outcomes.push(json!({
            "vector": o.vector.to_string(),
            "canonical": canon.to_string(),
            "witness": o.witness.to_string(),
            "replay_ok": o.replay_ok,
            "representative": o.family.map(|k| reps[k].clone()),
        }));
    }
    let ok = report.pairwise_inequivalent && report.replay_failures == 0;
    let mut text = String::new();
    let _ = writeln!(text, "representatives: {}", reps.join(", "));
    let _ = writeln!(
        text,
        "{} vectors (seed {}), {} covered, {} replay failures",
        report.samples, s.seed, report.covered, report.replay_failures
    );
    let _ = writeln!(text, "pairwise inequivalent: {}", report.pairwise_inequivalent);
    let label = if coarse {
        "canonical forms (coarse)"
    } else {
        "canonical forms"
    };
    let _ = writeln!(text, "{label}:");
    for (k, n) in &classes {
        let _ = writeln!(text, "  {k}: {n}");
    }
    for w in &report.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    Ok(Outcome {
        json: json!({
            "command": "optimal",
            "representatives": reps,
            "samples": report.samples,
            "seed": s.seed,
            "coarse": coarse,
            "pairwise_inequivalent": report.pairwise_inequivalent,
            "duplicates": report.duplicates,
            "covered": report.covered,
            "replay_failures": report.replay_failures,
            "uncovered": report.uncovered,
            "classes": classes,
            "warnings": report.warnings,
            "outcomes": outcomes,
        }),
        text,
        code: if ok { 0 } else { MISMATCH },
    })
}

pub fn reduce(s: &Source, generator: &str, solve: bool) -> Result<Outcome> {
    let pde = load(s)?;
    let basis = basis_for(s, &pde, true)?;
    let v = combine(&basis.generators, generator)?;
    let inv = invariants(&v)?;
    let r = reduce_pde(&pde, &inv)?;
    let mut warnings = Vec::new();
    if !r.cancelled.is_empty() {
        let parts: Vec<String> = r.cancelled.iter().map(ToString::to_string).collect();
        warnings.push(format!(
            "terms with explicit x or t cancel in the reduction: {}",
            parts.join(", ")
        ));
    }
    let solution = if solve {
        Some(solve_linear_first_order(&r, &inv)?)
    } else {
        None
    };
    let mut text = String::new();
    let _ = writeln!(text, "generator: {generator} = {v}");
    let _ = writeln!(text, "invariants: {inv}");
    let _ = writeln!(text, "reduced: {r}");
    if !r.singular.is_empty() {
        let _ = writeln!(text, "excluded: {}", r.singular.join(", "));
    }
    if let Some(cf) = &solution {
        let _ = writeln!(text, "zeta = {}", cf.zeta);
        let _ = writeln!(text, "u = {}", RatFunc::poly(cf.u.clone()));
    }
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    Ok(Outcome {
        json: json!({
            "command": "reduce",
            "equation": pde.to_string(),
            "generator": generator,
            "field": field_json(&v),
            "chi": inv.chi.to_string(),
            "zeta": inv.zeta.to_string(),
            "reduced": serde_json::to_value(&r).expect("serializable"),
            "solution": solution.as_ref().map(|cf| json!({
                "zeta": cf.zeta.to_string(),
                "u": RatFunc::poly(cf.u.clone()).to_string(),
            })),
            "warnings": warnings,
        }),
        text,
        code: 0,
    })
}

/// Numeric values for every parameter in `needed`; integration constants
/// `c1, c2, ...` default to 1. Returns the names still missing.
fn numeric_values(
    point: &ParamPoint,
    extra: &ParamPoint,
    needed: impl IntoIterator<Item = Var>,
) -> (BTreeMap<Var, f64>, Vec<String>) {
    let mut values: BTreeMap<Var, f64> = point.iter().map(|(k, v)| (k.clone(), to_f64(v))).collect();
    values.extend(extra.iter().map(|(k, v)| (k.clone(), to_f64(v))));
    let mut missing = Vec::new();
    for v in needed {
        if !v.is_param() || values.contains_key(&v) {
            continue;
        }
        let name = v.to_string();
        if name.len() > 1 && name.starts_with('c') && name[1..].chars().all(|c| c.is_ascii_digit()) {
            values.insert(v, 1.0);
        } else {
            missing.push(name);
        }
    }
    (values, missing)
}

fn parse_numbers(text: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Invalid(format!("{what} `{text}` must be {n} comma-separated numbers")))?;
    if parts.len() != n {
        return Err(Error::Invalid(format!(
            "{what} `{text}` must be {n} comma-separated numbers"
        )));
    }
    Ok(parts)
}

pub fn verify(
    s: &Source,
    solution: Option<&str>,
    grid_text: &str,
    transform: Option<&str>,
    dump: Option<&str>,
    elliptic: Option<&str>,
) -> Result<Outcome> {
    let pde = load(s)?;
    let pts = points(s, &pde, false)?;
    let extra = match &s.params {
        Some(t) => parse_point(t)?,
        None => ParamPoint::new(),
    };
    if let Some(constants) = elliptic {
        return screen_elliptic(s, &pde, &pts[0], &extra, constants);
    }
    let text_sol = solution.ok_or_else(|| Error::Invalid("--solution is required".into()))?;
    let mut sol = RatFunc::parse(text_sol)?;
    let grid = Grid::parse(grid_text)?;
    let mut transformed = Value::Null;
    let mut text = String::new();
    if let Some(tr) = transform {
        let (g, amount) = tr
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("transform `{tr}` is not G<k>:<parameter>")))?;
        let k: usize = g
            .trim()
            .strip_prefix('G')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Invalid(format!("transform `{tr}` is not G<k>:<parameter>")))?;
        let basis = basis_for(s, &pde, false)?;
        let v = basis
            .generators
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::Invalid(format!("there is no generator v{k}")))?;
        let moved = transform_solution(v, &poly(amount)?, &sol)?;
        let fixed = moved.same_as(&sol);
        let _ = writeln!(text, "G{k}({amount}) = exp({amount}*v{k}) with v{k} = {v}");
        let _ = writeln!(text, "transformed solution: u = {moved}");
        let _ = writeln!(text, "fixed by the transformation: {fixed}");
        transformed = json!({
            "generator": format!("v{k}"),
            "parameter": amount,
            "solution": moved.to_string(),
            "fixed": fixed,
        });
        sol = moved;
    }
    let symbolic = residual_symbolic(&sol, &pde)?;
    let _ = writeln!(text, "u = {sol}");
    let _ = writeln!(text, "symbolic residual numerator: {symbolic}");
    let mut needed = sol.num().vars();
    needed.extend(sol.den().vars());
    needed.extend(pde.params.iter().cloned());
    let (values, missing) = numeric_values(&pts[0], &extra, needed);
    let mut numeric = Value::Null;
    let mut max_abs = None;
    if missing.is_empty() {
        let (report, samples) = residual_numeric(&sol, &pde, &grid, &values)?;
        let _ = writeln!(
            text,
            "numeric residual on {}x{} grid: max {:.3e}, rms {:.3e}",
            grid.nx, grid.nt, report.max_abs, report.l2
        );
        if let Some(path) = dump {
            let mut csv = String::from("x,t,residual\n");
            for [x, t, r] in &samples {
                let _ = writeln!(csv, "{x},{t},{r}");
            }
            std::fs::write(path, csv).map_err(|e| Error::Invalid(format!("cannot write {path}: {e}")))?;
            let _ = writeln!(text, "residuals written to {path}");
        }
        max_abs = Some(report.max_abs);
        numeric = serde_json::to_value(report).expect("serializable");
    } else {
        let _ = writeln!(text, "numeric residual skipped: no value for {}", missing.join(", "));
        if dump.is_some() {
            return Err(Error::Invalid(format!(
                "--dump needs values for {}",
                missing.join(", ")
            )));
        }
    }
    let ok = symbolic.is_zero() || max_abs.is_some_and(|m| m < EXACT_TOL);
    let _ = writeln!(
        text,
        "{}",
        if ok {
            "solution verified"
        } else {
            "residual does not vanish"
        }
    );
    Ok(Outcome {
        json: json!({
            "command": "verify",
            "equation": pde.to_string(),
            "solution": sol.to_string(),
            "transform": transformed,
            "symbolic_residual": symbolic.to_string(),
            "symbolic_zero": symbolic.is_zero(),
            "values": values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "numeric": numeric,
            "missing": missing,
            "verified": ok,
        }),
        text,
        code: if ok { 0 } else { MISMATCH },
    })
}

fn screen_elliptic(
    s: &Source,
    pde: &EvolutionPde,
    point: &ParamPoint,
    extra: &ParamPoint,
    constants: &str,
) -> Result<Outcome> {
    let c = parse_numbers(constants, 6, "--elliptic")?;
    let basis = basis_for(s, pde, false)?;
    let v = combine(&basis.generators, "v2 + c0*v1")?;
    let inv = invariants(&v)?;
    let r = reduce_pde(pde, &inv)?;
    let (mut values, missing) = numeric_values(point, extra, pde.params.iter().cloned());
    if !missing.is_empty() {
        return Err(Error::Invalid(format!("no value for {}", missing.join(", "))));
    }
    values.insert(Var::param("c0"), c[5]);
    let profile = elliptic_profile(c[0], c[1], c[2], c[3], c[4])?;
    let report = residual_ode(&r.ode, &values, &profile, (0.0, 2.0), 200)?;
    let mut text = String::new();
    let _ = writeln!(text, "travelling-wave equation: {r}");
    let _ = writeln!(
        text,
        "zeta = {} + {}*sn^4({}*chi, {}) + {}*sn*sn'",
        c[0], c[1], c[3], c[4], c[2]
    );
    let _ = writeln!(
        text,
        "residual on chi in [0, 2], {} points: max {:.3e}, rms {:.3e} (screening only)",
        report.points_evaluated, report.max_abs, report.l2
    );
    Ok(Outcome {
        json: json!({
            "command": "verify",
            "equation": pde.to_string(),
            "reduced": r.to_string(),
            "elliptic": {
                "a0": c[0], "A": c[1], "B": c[2], "m": c[3], "k": c[4], "c0": c[5],
                "interval": [0.0, 2.0],
                "residual": serde_json::to_value(report).expect("serializable"),
            },
            "screening": true,
        }),
        text,
        code: 0,
    })
}

pub fn prolong(field: &str, order: u32) -> Result<Outcome> {
    let v = repro::parse_field(field)?;
    let p = prolong_field(&v, order, &JetSpace::new(order + 1))?;
    let mut text = String::new();
    let _ = writeln!(text, "v = {v}");
    let mut coeffs = Vec::new();
    for (j, c) in &p.coeffs {
        let _ = writeln!(text, "phi[{j}] = {c}");
        coeffs.push(json!({"jet": j.to_string(), "coefficient": c.to_string()}));
    }
    Ok(Outcome {
        json: json!({
            "command": "prolong",
            "field": field_json(&v),
            "order": order,
            "coefficients": coeffs,
        }),
        text,
        code: 0,
    })
}

pub fn reproduce() -> Result<Outcome> {
    let report = repro::run()?;
    let mut text = String::new();
    for st in &report.stages {
        let _ = writeln!(text, "{}: {}", st.name, if st.passed { "PASS" } else { "FAIL" });
        for c in &st.checks {
            let _ = writeln!(
                text,
                "  [{}] {}: {}",
                if c.passed { "ok" } else { "FAIL" },
                c.what,
                c.detail
            );
        }
    }
    for w in &report.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    for n in &report.notes {
        let _ = writeln!(text, "note: {n}");
    }
    let _ = writeln!(
        text,
        "{} with {} warnings",
        if report.passed { "PASS" } else { "FAIL" },
        report.warnings.len()
    );
    let mut json = serde_json::to_value(&report).expect("serializable");
    json["command"] = json!("paper-repro");
    Ok(Outcome {
        json,
        text,
        code: if report.passed { 0 } else { MISMATCH },
    })
}
