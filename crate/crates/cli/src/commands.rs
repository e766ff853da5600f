//! One function per subcommand: build the inputs, call the library, shape
//! the JSON payload.

use std::str::FromStr;
use std::sync::Arc;

use bsf_core::bernstein::{
    bs_poly as level_poly, limit_bs_poly, stadnik_report, verify_main_theorem, BSPoly,
};
use bsf_core::cartier::{check_f_pure, check_f_regular, frobenius_root};
use bsf_core::testmodule::{fpt as threshold, jumping_numbers, tau as test_module, Threshold};
use bsf_core::weyl::{identity_suite, STATED_IDENTITIES};
use bsf_core::{
    CartierModuleSpec, DigitVector, Error, FRegularStatus, Ideal, JumpingNumberReport, PAdicRational, Prime,
    Rational, Ring, SearchConfig, SparsePoly,
};
use serde_json::{json, Map, Value};

use crate::report::{Failure, Outcome, Success, EXIT_INCOMPLETE, EXIT_OK};
use crate::{HypersurfaceArgs, RingArgs, SearchArgs};

pub fn echo(hyp: Option<&HypersurfaceArgs>, search: Option<&SearchArgs>, extra: &[(&str, Value)]) -> Value {
    let mut map = Map::new();
    if let Some(h) = hyp {
        map.insert("p".into(), h.ring.p.into());
        map.insert("vars".into(), h.ring.vars.clone().into());
        map.insert("f".into(), h.f.clone().into());
        map.insert("g".into(), h.g.clone().into());
        map.insert("assume_f_regular".into(), h.assume_f_regular.into());
    }
    if let Some(s) = search {
        map.insert("e_max".into(), s.e_max.into());
        map.insert("audit_level".into(), s.audit_level.into());
        map.insert("period_window".into(), s.period_window.into());
        map.insert("window".into(), s.window.into());
    }
    for (k, v) in extra {
        map.insert((*k).into(), v.clone());
    }
    Value::Object(map)
}

pub fn echo_ring(ring: &RingArgs, extra: &[(&str, Value)]) -> Value {
    let mut map = Map::new();
    map.insert("p".into(), ring.p.into());
    map.insert("vars".into(), ring.vars.clone().into());
    for (k, v) in extra {
        map.insert((*k).into(), v.clone());
    }
    Value::Object(map)
}

fn build_ring(args: &RingArgs) -> Result<Arc<Ring>, Failure> {
    let p = Prime::new(args.p)?;
    let names: Vec<&str> = args.vars.iter().map(String::as_str).collect();
    Ok(Ring::new(p, &names)?)
}

struct Setup {
    spec: CartierModuleSpec,
    f: SparsePoly,
}

fn setup(hyp: &HypersurfaceArgs) -> Result<Setup, Failure> {
    let ring = build_ring(&hyp.ring)?;
    let f = SparsePoly::parse(&hyp.f, &ring)?;
    let g = SparsePoly::parse(&hyp.g, &ring)?;
    let spec = CartierModuleSpec::new(g)?;
    Ok(Setup { spec, f })
}

/// Runs the purity and regularity checks the searches depend on.
fn checked_setup(hyp: &HypersurfaceArgs, e_max: u32) -> Result<Setup, Failure> {
    let mut s = setup(hyp)?;
    if s.f.is_zero() {
        return Err(Error::ZeroHypersurface.into());
    }
    if !check_f_pure(&mut s.spec) {
        return Err(Error::NotFPure.into());
    }
    let (status, _) = check_f_regular(&s.spec, e_max.max(1));
    let status = match status {
        FRegularStatus::Unknown if hyp.assume_f_regular => FRegularStatus::Assumed,
        other => other,
    };
    s.spec.set_f_regular_status(status);
    Ok(s)
}

fn config(search: &SearchArgs) -> SearchConfig {
    SearchConfig {
        e_max: search.e_max,
        audit_level: search.audit_level,
        period_window: search.period_window,
        window: search.window,
    }
}

fn rationals(values: &[Rational]) -> Value {
    values.iter().map(|r| r.to_string()).collect::<Vec<_>>().into()
}

fn digits(v: &DigitVector) -> Value {
    v.digits().to_vec().into()
}

pub fn ideal_json(ideal: &Ideal) -> Value {
    let gens = match ideal.canonical() {
        Ok(c) => c.generators().to_vec(),
        Err(_) => ideal.generators().to_vec(),
    };
    let gens: Vec<String> = if gens.is_empty() {
        vec!["0".into()]
    } else {
        gens.iter().map(|g| g.to_string()).collect()
    };
    gens.into()
}

pub fn jumps_json(report: &JumpingNumberReport) -> Value {
    let sets: Map<String, Value> = report
        .jump_sets
        .iter()
        .map(|(e, set)| (e.to_string(), set.clone().into()))
        .collect();
    let open: Vec<Value> = report
        .unresolved
        .iter()
        .map(|(lo, hi)| json!([lo.to_string(), hi.to_string()]))
        .collect();
    json!({
        "jumping_numbers": rationals(&report.resolved),
        "unresolved": open,
        "complete": report.is_complete(),
        "e_reached": report.e_reached,
        "jump_sets": sets,
        "audit_level": report.audit_level,
        "audit_consistent": report.audit_consistent,
    })
}

fn search_stabilization(spec: &CartierModuleSpec, report: &JumpingNumberReport) -> Value {
    json!({
        "e_used": report.e_reached,
        "criterion": "jump_set_refinement",
        "f_regular_status": spec.f_regular_status().as_str(),
    })
}

fn poly_json(b: &BSPoly) -> Value {
    json!({
        "roots": rationals(&b.roots),
        "degree": b.degree(),
        "coefficients": rationals(&b.coefficients()),
        "polynomial": b.to_string(),
    })
}

pub fn tau(hyp: &HypersurfaceArgs, search: &SearchArgs, t: &str) -> Outcome {
    let s = setup(hyp)?;
    let t = Rational::from_str(t)?;
    if t.is_negative() {
        return Err(Failure::input(format!("t = {t} must be nonnegative")));
    }
    let t = PAdicRational::from_rational(&t, s.spec.prime())?;
    let res = test_module(&s.spec, &s.f, &t, &config(search))?;
    Ok(Success {
        result: json!({
            "ideal": ideal_json(&res.ideal),
            "t": res.t.to_rational().to_string(),
            "f_power": res.f_power.to_string(),
        }),
        stabilization: Some(json!({
            "e_used": res.e_used,
            "criterion": res.stabilization_criterion.as_str(),
            "f_regular_status": s.spec.f_regular_status().as_str(),
        })),
        code: EXIT_OK,
    })
}

pub fn jumps(hyp: &HypersurfaceArgs, search: &SearchArgs) -> Outcome {
    let s = checked_setup(hyp, search.e_max)?;
    let report = jumping_numbers(&s.spec, &s.f, &config(search))?;
    Ok(Success {
        result: jumps_json(&report),
        stabilization: Some(search_stabilization(&s.spec, &report)),
        code: if report.is_complete() {
            EXIT_OK
        } else {
            EXIT_INCOMPLETE
        },
    })
}

pub fn fpt(hyp: &HypersurfaceArgs, search: &SearchArgs) -> Outcome {
    let s = checked_setup(hyp, search.e_max)?;
    let (th, report) = threshold(&s.spec, &s.f, &config(search))?;
    let (result, code) = match th {
        Threshold::Exact(l) => (json!({ "fpt": l.to_string(), "interval": null }), EXIT_OK),
        Threshold::Interval(lo, hi) => (
            json!({ "fpt": null, "interval": [lo.to_string(), hi.to_string()] }),
            EXIT_INCOMPLETE,
        ),
        Threshold::None => (json!({ "fpt": null, "interval": null }), EXIT_OK),
    };
    Ok(Success {
        result,
        stabilization: Some(search_stabilization(&s.spec, &report)),
        code,
    })
}

pub fn bs_poly(hyp: &HypersurfaceArgs, e: u32) -> Outcome {
    let s = setup(hyp)?;
    if s.f.is_zero() {
        return Err(Error::ZeroHypersurface.into());
    }
    let b = level_poly(&s.spec, &s.f, e)?;
    let gamma = bsf_core::bernstein::gamma_set(&s.spec, &s.f, e)?;
    let mut result = poly_json(&b);
    let vectors: Vec<Value> = gamma.digit_vectors().iter().map(digits).collect();
    result["e"] = e.into();
    result["gamma"] = vectors.into();
    Ok(Success::ok(result))
}

pub fn bs_limit(hyp: &HypersurfaceArgs, search: &SearchArgs) -> Outcome {
    let s = checked_setup(hyp, search.e_max)?;
    let b = limit_bs_poly(&s.spec, &s.f, &config(search))?;
    Ok(Success::ok(poly_json(&b)))
}

pub fn stadnik(hyp: &HypersurfaceArgs, search: &SearchArgs, e: u32) -> Outcome {
    let s = checked_setup(hyp, search.e_max)?;
    let rep = stadnik_report(&s.spec, &s.f, e, &config(search))?;
    let pairs: Vec<Value> = rep
        .pairs
        .iter()
        .map(|pair| {
            json!({
                "lambda": pair.lambda,
                "mu": pair.mu,
                "lambda_digits": digits(&pair.lambda_digits),
                "mu_digits": digits(&pair.mu_digits),
            })
        })
        .collect();
    Ok(Success::ok(json!({
        "e": rep.e,
        "pairs": pairs,
        "relation_verified": rep.relation_verified,
        "b_tilde": poly_json(&rep.b_tilde),
    })))
}

pub fn verify_theorem(hyp: &HypersurfaceArgs, search: &SearchArgs, from: u32, to: u32) -> Outcome {
    let s = checked_setup(hyp, search.e_max)?;
    let rep = verify_main_theorem(&s.spec, &s.f, from..=to, &config(search))?;
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| json!({ "e": r.e, "gamma": r.gamma, "predicted": r.predicted, "equal": r.equal }))
        .collect();
    Ok(Success {
        result: json!({
            "holds": rep.holds,
            "jumping_numbers": rationals(&rep.jumping_numbers),
            "rows": rows,
            "stabilization_level": rep.stabilization_level,
            "window": rep.window,
        }),
        stabilization: None,
        code: if rep.holds { EXIT_OK } else { EXIT_INCOMPLETE },
    })
}

/// Smallest admissible bound that still sweeps every residue twice, and
/// never below 200.
pub fn default_bound(p: u64, e_max: u32) -> u64 {
    p.checked_pow(e_max + 1).map_or(u64::MAX, |q| (2 * q).max(200))
}

pub fn verify_identities(p: u64, e_max: u32, bound: u64) -> Outcome {
    let rep = identity_suite(Prime::new(p)?, e_max, bound)?;
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "statement": c.statement,
                "stated": STATED_IDENTITIES.contains(&c.name),
                "passed": c.passed(),
                "cases": c.cases,
                "failures": c.failures,
                "first_failure": c.first_failure,
            })
        })
        .collect();
    let stated_ok = rep
        .checks
        .iter()
        .filter(|c| STATED_IDENTITIES.contains(&c.name))
        .all(|c| c.passed());
    Ok(Success::ok(json!({
        "checks": checks,
        "all_stated_passed": stated_ok,
        "all_passed": rep.all_passed(),
    })))
}

pub fn froot(ring: &RingArgs, gens: &[String], e: u32) -> Outcome {
    let r = build_ring(ring)?;
    let polys = gens
        .iter()
        .map(|g| SparsePoly::parse(g, &r))
        .collect::<Result<Vec<_>, _>>()?;
    let root = frobenius_root(&Ideal::new(&r, polys), e);
    Ok(Success::ok(json!({ "ideal": ideal_json(&root), "e": e })))
}
