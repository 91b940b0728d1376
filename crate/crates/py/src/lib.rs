//! Python bindings for symflow-core.
//!
//! The module exposes the main entry points as plain functions returning
//! Python-native values (dicts, lists, strings); heavyweight reports come
//! back as JSON strings to keep the surface stable.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use symflow_core::catalog::{
    example_multiparameter, reductions, solutions, travelling_waves_all, EntryStatus, FormKind,
};
use symflow_core::exprcore::{parse, Rat};
use symflow_core::family::{classify as classify_rs, snap_to_rational, CaseId, PdeParams};
use symflow_core::flows::{closed_form_indices, group_map};
use symflow_core::moc::solve_ivp;
use symflow_core::symmetry::{generators as generators_rs, verify_commutator_table};
use symflow_core::verify::{audit as audit_rs, residual_entry, SampleDomain, Verdict};

fn val_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rat(label: &str, s: &str) -> PyResult<Rat> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| val_err(format!("{label}: bad numerator")))?;
        let q: i64 = q.trim().parse().map_err(|_| val_err(format!("{label}: bad denominator")))?;
        if q == 0 {
            return Err(val_err(format!("{label}: zero denominator")));
        }
        return Ok(Rat::new(p, q));
    }
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| val_err(format!("{label}: cannot parse '{s}'")))?;
    Ok(snap_to_rational(v).map_err(val_err)?.0)
}

fn params_from(lambda: f64, k: &str, m: &str) -> PyResult<(PdeParams, CaseId)> {
    let k = parse_rat("k", k)?;
    let m = parse_rat("m", m)?;
    let case = classify_rs(k, m).map_err(val_err)?;
    let params = PdeParams::new(lambda, k, m).map_err(val_err)?;
    Ok((params, case))
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Verified => "VERIFIED",
        Verdict::Discrepant => "DISCREPANT",
        Verdict::EmptyDomain => "EMPTY_DOMAIN",
    }
}

/// Classify (k, m) into one of the seven symmetry cases.
/// Returns {"case": int, "condition": str, "dim": int}.
#[pyfunction]
fn classify(py: Python<'_>, k: &str, m: &str) -> PyResult<PyObject> {
    let k = parse_rat("k", k)?;
    let m = parse_rat("m", m)?;
    let case = classify_rs(k, m).map_err(val_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("case", case.number())?;
    d.set_item("condition", case.condition())?;
    d.set_item("dim", case.algebra_dim())?;
    Ok(d.into())
}

/// Symmetry generators as a list of {"index", "xi", "tau", "phi"} dicts.
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0))]
fn generators(py: Python<'_>, k: &str, m: &str, lambda_: f64) -> PyResult<PyObject> {
    let (params, case) = params_from(lambda_, k, m)?;
    let gens = generators_rs(case, &params).map_err(val_err)?;
    let items = PyList::empty_bound(py);
    for (i, f) in gens.fields.iter().enumerate() {
        let d = PyDict::new_bound(py);
        d.set_item("index", i + 1)?;
        d.set_item("xi", f.xi.to_string())?;
        d.set_item("tau", f.tau.to_string())?;
        d.set_item("phi", f.phi.to_string())?;
        items.append(d)?;
    }
    Ok(items.into())
}

/// Verify the printed commutator table (cases 2 and 7).
/// Returns (all_match: bool, mismatched_cells: list[(i, j)]).
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0, seed=0, as_printed=false))]
fn bracket_table(
    k: &str,
    m: &str,
    lambda_: f64,
    seed: u64,
    as_printed: bool,
) -> PyResult<(bool, Vec<(usize, usize)>)> {
    let (params, case) = params_from(lambda_, k, m)?;
    let rep = verify_commutator_table(case, &params, 1e-9, 50, seed, as_printed).map_err(val_err)?;
    let bad = rep
        .cells
        .iter()
        .filter(|c| !c.matched)
        .map(|c| (c.i, c.j))
        .collect();
    Ok((rep.all_match, bad))
}

/// Apply the closed-form group map of generator `index` to a point.
#[pyfunction]
#[pyo3(signature = (k, m, index, eps, point, lambda_=1.0))]
fn flow_point(
    k: &str,
    m: &str,
    index: usize,
    eps: f64,
    point: (f64, f64, f64),
    lambda_: f64,
) -> PyResult<(f64, f64, f64)> {
    let (params, case) = params_from(lambda_, k, m)?;
    if !closed_form_indices(case).contains(&index) {
        return Err(val_err(format!(
            "generator {index} has no closed-form map for case {}",
            case.number()
        )));
    }
    let g = group_map(case, index, &params).map_err(val_err)?;
    g.apply(point, eps).map_err(val_err)
}

/// List catalog entries: [{"id", "kind", "status", "label", "expr"}].
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0, speed=2.0))]
fn catalog(py: Python<'_>, k: &str, m: &str, lambda_: f64, speed: f64) -> PyResult<PyObject> {
    let (params, case) = params_from(lambda_, k, m)?;
    let mut forms = solutions(case, &params).map_err(val_err)?;
    forms.extend(travelling_waves_all(case, &params, speed).map_err(val_err)?);
    if case == CaseId::Case7 {
        forms.extend(example_multiparameter(&params).map_err(val_err)?);
    }
    let items = PyList::empty_bound(py);
    for f in &forms {
        let d = PyDict::new_bound(py);
        d.set_item("id", &f.id)?;
        d.set_item(
            "kind",
            match f.kind {
                FormKind::Explicit => "explicit",
                FormKind::Implicit => "implicit",
            },
        )?;
        d.set_item(
            "status",
            match f.status {
                EntryStatus::Verified => "VERIFIED",
                EntryStatus::Discrepant => "DISCREPANT",
            },
        )?;
        d.set_item("label", &f.label)?;
        d.set_item("expr", f.expr.to_string())?;
        items.append(d)?;
    }
    Ok(items.into())
}

/// Similarity reductions: [{"id", "subalgebra", "psi", "u_of_f", "ode"}].
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0))]
fn catalog_reductions(py: Python<'_>, k: &str, m: &str, lambda_: f64) -> PyResult<PyObject> {
    let (params, case) = params_from(lambda_, k, m)?;
    let recs = reductions(case, &params).map_err(val_err)?;
    let items = PyList::empty_bound(py);
    for r in &recs {
        let d = PyDict::new_bound(py);
        d.set_item("id", &r.id)?;
        d.set_item("subalgebra", &r.subalgebra)?;
        d.set_item("psi", r.psi.to_string())?;
        d.set_item("u_of_f", r.u_of_f.to_string())?;
        d.set_item("ode", r.ode.to_string())?;
        items.append(d)?;
    }
    Ok(items.into())
}

/// Residual-verify every catalog entry. Returns a list of
/// {"id", "points", "max_residual", "verdict", "expected", "ok"}.
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0, seed=0, speed=2.0))]
fn verify(
    py: Python<'_>,
    k: &str,
    m: &str,
    lambda_: f64,
    seed: u64,
    speed: f64,
) -> PyResult<PyObject> {
    let (params, case) = params_from(lambda_, k, m)?;
    let mut forms = solutions(case, &params).map_err(val_err)?;
    forms.extend(travelling_waves_all(case, &params, speed).map_err(val_err)?);
    if case == CaseId::Case7 {
        forms.extend(example_multiparameter(&params).map_err(val_err)?);
    }
    let dom = SampleDomain::standard(seed);
    let items = PyList::empty_bound(py);
    for f in &forms {
        let rep = residual_entry(f, &params, &dom);
        let d = PyDict::new_bound(py);
        d.set_item("id", &rep.id)?;
        d.set_item("points", rep.points)?;
        d.set_item("max_residual", rep.max_residual)?;
        d.set_item("verdict", verdict_str(rep.verdict))?;
        d.set_item("expected", verdict_str(rep.expected))?;
        d.set_item("ok", rep.ok())?;
        items.append(d)?;
    }
    Ok(items.into())
}

/// Full deterministic audit, returned as a JSON string.
#[pyfunction]
#[pyo3(signature = (k, m, lambda_=1.0, seed=0))]
fn audit_json(k: &str, m: &str, lambda_: f64, seed: u64) -> PyResult<String> {
    let (params, case) = params_from(lambda_, k, m)?;
    Ok(audit_rs(case, &params, seed).to_json())
}

/// Method-of-characteristics IVP solve. `u0` is an expression in x;
/// `queries` is a list of (x, t). Returns [(x, t, u)].
#[pyfunction]
#[pyo3(signature = (u0, k, m, queries, lambda_=1.0))]
fn solve_moc(
    u0: &str,
    k: &str,
    m: &str,
    queries: Vec<(f64, f64)>,
    lambda_: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let (params, _case) = params_from(lambda_, k, m)?;
    let expr = parse(u0).map_err(val_err)?;
    let sol = solve_ivp(&expr, &params, &queries).map_err(val_err)?;
    Ok(sol.grid)
}

#[pymodule]
fn symflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(generators, m)?)?;
    m.add_function(wrap_pyfunction!(bracket_table, m)?)?;
    m.add_function(wrap_pyfunction!(flow_point, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_reductions, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(audit_json, m)?)?;
    m.add_function(wrap_pyfunction!(solve_moc, m)?)?;
    Ok(())
}
