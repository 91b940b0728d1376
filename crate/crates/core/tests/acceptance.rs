//! Acceptance suite: eight top-level criteria, each printed as one
//! pass/fail line (run with `--nocapture` to see them on success).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symflow_core::catalog::{
    example_multiparameter, reductions, solutions, travelling_waves_all, EntryStatus, FormKind,
};
use symflow_core::exprcore::{
    differentiate, evaluate, rat, substitute, Bindings, Expr, Rat, Var,
};
use symflow_core::family::{classify, CaseId, PdeParams};
use symflow_core::flows::{
    closed_form_indices, exponentiate_generator, group_law_residual, group_map, pushforward,
    SolutionHandle,
};
use symflow_core::moc::{conserved_quantity, solve_ivp, u_along_characteristic, MocError};
use symflow_core::symmetry::{
    generators, jacobi_deviation, lie_bracket, prolongation_residual, residual_scale,
    verify_commutator_table, VectorField,
};
use symflow_core::verify::{
    audit, residual_entry, verify_reduced, ReducedF, SampleDomain, Verdict,
};

const ALL_CASES: [CaseId; 7] = [
    CaseId::Case1,
    CaseId::Case2,
    CaseId::Case3,
    CaseId::Case4,
    CaseId::Case5,
    CaseId::Case6,
    CaseId::Case7,
];

/// A fixed representative parameter point per case (lambda != 1 on purpose:
/// several tabulated-variant coincidences happen exactly at lambda = 1).
fn base_params(case: CaseId) -> PdeParams {
    let (k, m) = match case {
        CaseId::Case1 => (rat(2, 1), rat(2, 1)),
        CaseId::Case2 => (rat(3, 2), rat(5, 2)),
        CaseId::Case3 => (rat(-3, 2), rat(5, 2)),
        CaseId::Case4 => (rat(1, 1), rat(3, 1)),
        CaseId::Case5 => (rat(-1, 2), rat(2, 1)),
        CaseId::Case6 => (rat(1, 1), rat(4, 1)),
        CaseId::Case7 => (rat(2, 1), rat(1, 1)),
    };
    PdeParams::new(1.3, k, m).unwrap()
}

/// Five parameter draws satisfying the case condition, with rational
/// exponents and varying lambda.
fn param_draws(case: CaseId, rng: &mut ChaCha8Rng) -> Vec<PdeParams> {
    let pool: [Rat; 8] = [
        rat(1, 1),
        rat(2, 1),
        rat(3, 1),
        rat(1, 2),
        rat(3, 2),
        rat(-1, 2),
        rat(-3, 2),
        rat(-2, 1),
    ];
    let one = rat(1, 1);
    let mut out = Vec::new();
    while out.len() < 5 {
        let lambda = rng.gen_range(0.5..2.0);
        let k = pool[rng.gen_range(0..pool.len())];
        let (k, m) = match case {
            CaseId::Case7 => (k, one),
            CaseId::Case2 => (k, k + one),
            CaseId::Case3 => (k, one - k),
            CaseId::Case4 => (k, k * rat(2, 1) + one),
            CaseId::Case5 => (k, one - k * rat(2, 1)),
            CaseId::Case6 => (k, k * rat(3, 1) + one),
            CaseId::Case1 => {
                let m = pool[rng.gen_range(0..pool.len())];
                (k, m)
            }
        };
        if classify(k, m) != Ok(case) {
            continue;
        }
        out.push(PdeParams::new(lambda, k, m).unwrap());
    }
    out
}

/// Criterion 1: every generator of every case satisfies the linearized
/// symmetry condition (scaled residual <= 1e-9) at 200 random states for
/// each of 5 parameter draws; a perturbed generator exceeds 1e-3.
fn criterion_1() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for case in ALL_CASES {
        for params in param_draws(case, &mut rng) {
            let gens = generators(case, &params).map_err(|e| e.to_string())?;
            for (gi, field) in gens.fields.iter().enumerate() {
                let mut max_r: f64 = 0.0;
                let mut n = 0;
                for _ in 0..200 {
                    let st = (
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.5..2.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    if let Ok(r) = prolongation_residual(field, &params, st) {
                        max_r = max_r.max(r.abs() / residual_scale(&params, st));
                        n += 1;
                    }
                }
                if n < 100 {
                    return Err(format!(
                        "case {} M{}: only {n} evaluable states",
                        case.number(),
                        gi + 1
                    ));
                }
                if max_r > 1e-9 {
                    return Err(format!(
                        "case {} M{}: scaled residual {max_r:.3e} > 1e-9",
                        case.number(),
                        gi + 1
                    ));
                }
                worst = worst.max(max_r);
            }
        }
    }
    // Negative control: perturb M1 of the base case 2 generators.
    let params = base_params(CaseId::Case2);
    let gens = generators(CaseId::Case2, &params).unwrap();
    let g = &gens.fields[0];
    let bad = VectorField::new(
        g.xi.clone(),
        g.tau.clone(),
        g.phi.clone() + Expr::real(0.05) * Expr::u(),
    );
    let mut ctl: f64 = 0.0;
    for _ in 0..200 {
        let st = (
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.0..1.0),
        );
        if let Ok(r) = prolongation_residual(&bad, &params, st) {
            ctl = ctl.max(r.abs() / residual_scale(&params, st));
        }
    }
    if ctl <= 1e-3 {
        return Err(format!("perturbed control residual {ctl:.3e} <= 1e-3"));
    }
    Ok(format!(
        "all generators <= 1e-9 (worst {worst:.2e}); perturbed control {ctl:.2e} > 1e-3"
    ))
}

/// Criterion 2: the printed 8x8 tables of cases 2 and 7 are reproduced
/// cell-by-cell (coefficients to 1e-9 at 50 states); antisymmetry and the
/// Jacobi identity hold to 1e-8.
fn criterion_2() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in [CaseId::Case2, CaseId::Case7] {
        let params = base_params(case);
        let rep = verify_commutator_table(case, &params, 1e-9, 50, 7, false)
            .map_err(|e| e.to_string())?;
        if !rep.all_match {
            let bad: Vec<_> = rep.cells.iter().filter(|c| !c.matched).collect();
            return Err(format!(
                "case {} corrected table mismatch: {:?}",
                case.number(),
                bad.iter().map(|c| (c.i, c.j)).collect::<Vec<_>>()
            ));
        }
        // Antisymmetry: [X, Y] + [Y, X] = 0 for random pairs.
        let gens = generators(case, &params).unwrap();
        let n = gens.fields.len();
        for _ in 0..20 {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let s = lie_bracket(&gens.fields[i], &gens.fields[j])
                .add(&lie_bracket(&gens.fields[j], &gens.fields[i]));
            let b = Bindings::new()
                .var(Var::X, rng.gen_range(0.1..2.0))
                .var(Var::T, rng.gen_range(0.1..2.0))
                .var(Var::U, rng.gen_range(0.5..2.0));
            let v = s.eval(&b).map_err(|e| e.to_string())?;
            let dev = v[0].abs().max(v[1].abs()).max(v[2].abs());
            if dev > 1e-8 {
                return Err(format!(
                    "case {} antisymmetry [M{},M{}] deviation {dev:.3e}",
                    case.number(),
                    i + 1,
                    j + 1
                ));
            }
        }
        // Jacobi identity for random triples.
        for _ in 0..20 {
            let (i, j, l) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            let dev = jacobi_deviation(
                &gens.fields[i],
                &gens.fields[j],
                &gens.fields[l],
                &params,
                20,
                rng.gen(),
            )
            .map_err(|e| e.to_string())?;
            if dev > 1e-8 {
                return Err(format!(
                    "case {} Jacobi (M{},M{},M{}) deviation {dev:.3e}",
                    case.number(),
                    i + 1,
                    j + 1,
                    l + 1
                ));
            }
        }
    }
    Ok("cases 2 and 7 tables cell-exact; antisymmetry and Jacobi <= 1e-8".into())
}

/// Criterion 3: numerical exponentiation matches each closed-form group map
/// to 1e-8 over eps in [-0.2, 0.2]; group law to 1e-10; identity to 1e-12.
fn criterion_3() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in ALL_CASES {
        let params = base_params(case);
        for &idx in closed_form_indices(case) {
            let g = group_map(case, idx, &params).map_err(|e| e.to_string())?;
            let mut checked = 0;
            for _ in 0..400 {
                if checked >= 40 {
                    break;
                }
                let p0 = (
                    rng.gen_range(0.1..2.0),
                    rng.gen_range(0.1..2.0),
                    rng.gen_range(0.5..2.0),
                );
                let eps = rng.gen_range(-0.2..0.2);
                if !g.in_domain(p0, eps) || !g.in_domain(p0, eps / 2.0) {
                    continue;
                }
                let closed = match g.apply(p0, eps) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let num = match exponentiate_generator(case, idx, &params, p0, eps) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let mag = 1.0 + closed.0.abs().max(closed.1.abs()).max(closed.2.abs());
                let dev = (closed.0 - num.0)
                    .abs()
                    .max((closed.1 - num.1).abs())
                    .max((closed.2 - num.2).abs())
                    / mag;
                if dev > 1e-8 {
                    return Err(format!(
                        "case {} G{idx}: flow deviation {dev:.3e} at eps {eps:.3}",
                        case.number()
                    ));
                }
                let id = g.apply(p0, 0.0).map_err(|e| e.to_string())?;
                let id_dev = (id.0 - p0.0)
                    .abs()
                    .max((id.1 - p0.1).abs())
                    .max((id.2 - p0.2).abs());
                if id_dev > 1e-12 {
                    return Err(format!(
                        "case {} G{idx}: identity deviation {id_dev:.3e}",
                        case.number()
                    ));
                }
                let law = group_law_residual(&g, eps / 2.0, eps / 2.0, p0)
                    .map_err(|e| e.to_string())?;
                if law / mag > 1e-10 {
                    return Err(format!(
                        "case {} G{idx}: group-law residual {law:.3e}",
                        case.number()
                    ));
                }
                checked += 1;
            }
            if checked < 20 {
                return Err(format!(
                    "case {} G{idx}: only {checked} usable flow samples",
                    case.number()
                ));
            }
        }
    }
    Ok("every closed-form map: flow <= 1e-8, group law <= 1e-10, identity <= 1e-12".into())
}

/// Criterion 4: catalog residuals — explicit <= 1e-8 and implicit <= 1e-7
/// over 5 parameter draws; every retained discrepant entry has a verified
/// corrected companion.
fn criterion_4() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut n_checked = 0;
    for case in ALL_CASES {
        let mut draws = param_draws(case, &mut rng);
        draws[0] = base_params(case); // keep the richest fixed point in the mix
        for (di, params) in draws.iter().enumerate() {
            let mut forms = solutions(case, params).map_err(|e| e.to_string())?;
            forms
                .extend(travelling_waves_all(case, params, 2.0).map_err(|e| e.to_string())?);
            let dom = SampleDomain::standard(9000 + di as u64);
            for form in &forms {
                let rep = residual_entry(form, params, &dom);
                let expected = match form.status {
                    EntryStatus::Verified => Verdict::Verified,
                    EntryStatus::Discrepant => Verdict::Discrepant,
                };
                if rep.verdict != expected && rep.verdict != Verdict::EmptyDomain {
                    return Err(format!(
                        "case {} {}: verdict {:?} (max residual {:.3e}), expected {:?}",
                        case.number(),
                        form.id,
                        rep.verdict,
                        rep.max_residual,
                        expected
                    ));
                }
                if form.status == EntryStatus::Discrepant {
                    let comp_id = form
                        .companion
                        .as_ref()
                        .ok_or_else(|| format!("{}: discrepant without companion", form.id))?;
                    let comp = forms
                        .iter()
                        .find(|f| &f.id == comp_id)
                        .ok_or_else(|| format!("{}: companion {comp_id} missing", form.id))?;
                    let crep = residual_entry(comp, params, &dom);
                    if crep.verdict == Verdict::Discrepant {
                        return Err(format!(
                            "{}: corrected companion {comp_id} fails ({:.3e})",
                            form.id, crep.max_residual
                        ));
                    }
                }
                n_checked += 1;
            }
        }
    }
    Ok(format!(
        "{n_checked} catalog entry checks; explicit <= 1e-8, implicit <= 1e-7, discrepancies all have verified companions"
    ))
}

/// Criterion 5: pushforward closure — transforming any verified explicit
/// solution by any closed-form map with eps in {+-0.05, +-0.1} stays
/// verified; the five- and six-parameter chain examples built from u = 0
/// pass with residual <= 1e-8.
fn criterion_5() -> Result<String, String> {
    let mut n_moved = 0;
    for case in ALL_CASES {
        let params = base_params(case);
        let forms = solutions(case, &params).map_err(|e| e.to_string())?;
        for form in forms
            .iter()
            .filter(|f| f.kind == FormKind::Explicit && f.status == EntryStatus::Verified)
        {
            let handle = SolutionHandle::new(form.bound_expr(), form.bound_guards());
            for &idx in closed_form_indices(case) {
                let g = group_map(case, idx, &params).map_err(|e| e.to_string())?;
                for eps in [-0.1, -0.05, 0.05, 0.1] {
                    let moved = match pushforward(&g, eps, &handle) {
                        Ok(h) => h,
                        Err(_) => continue,
                    };
                    let mut probe = form.clone();
                    probe.id = format!("{}*G{idx}@{eps:+}", form.id);
                    probe.expr = moved.expr.clone();
                    probe.guards = moved.guards.clone();
                    probe.constants.clear();
                    let dom = SampleDomain::standard(500);
                    let rep = residual_entry(&probe, &params, &dom);
                    if rep.verdict == Verdict::Discrepant {
                        return Err(format!(
                            "{}: pushforward residual {:.3e} > 1e-8",
                            probe.id, rep.max_residual
                        ));
                    }
                    if rep.verdict == Verdict::Verified {
                        n_moved += 1;
                    }
                }
            }
        }
    }
    if n_moved < 100 {
        return Err(format!("only {n_moved} verified pushforward checks"));
    }
    // Multi-parameter chain examples (linear damping).
    let params = base_params(CaseId::Case7);
    let examples = example_multiparameter(&params).map_err(|e| e.to_string())?;
    let dom = SampleDomain::standard(501);
    let mut n_chain = 0;
    for form in &examples {
        let rep = residual_entry(form, &params, &dom);
        let expected = match form.status {
            EntryStatus::Verified => Verdict::Verified,
            EntryStatus::Discrepant => Verdict::Discrepant,
        };
        if rep.verdict != expected && rep.verdict != Verdict::EmptyDomain {
            return Err(format!(
                "chain example {}: verdict {:?} ({:.3e}), expected {:?}",
                form.id, rep.verdict, rep.max_residual, expected
            ));
        }
        if form.status == EntryStatus::Verified {
            n_chain += 1;
        }
    }
    if n_chain < 2 {
        return Err("missing verified chain examples".into());
    }
    Ok(format!(
        "{n_moved} pushforward closures verified; both chain-built examples pass <= 1e-8"
    ))
}

/// Criterion 6: the quadratic first integral of the half-order reduction
/// satisfies its ODE to 1e-9; every similarity reduction reconstructs a PDE
/// solution from a numerically integrated F (tol 1e-6), including the rows
/// with no recorded closed form.
fn criterion_6() -> Result<String, String> {
    // Quadratic solution of the case 3 half-order reduction.
    let params = base_params(CaseId::Case3);
    let recs = reductions(CaseId::Case3, &params).map_err(|e| e.to_string())?;
    let mut quad_checked = 0;
    for rec in recs.iter().filter(|r| r.id.contains("m7m8")) {
        let f = rec
            .bound_known_f()
            .ok_or_else(|| format!("{}: no recorded F", rec.id))?;
        let fp = differentiate(&f, Var::Psi);
        for i in 0..60 {
            let psi = 0.02 + 0.01 * i as f64;
            let b = Bindings::new().var(Var::Psi, psi);
            let (fv, fpv) = match (evaluate(&f, &b), evaluate(&fp, &b)) {
                (Ok(a), Ok(c)) if a.is_finite() && c.is_finite() => (a, c),
                _ => continue,
            };
            let bo = Bindings::new()
                .var(Var::Psi, psi)
                .var(Var::F, fv)
                .var(Var::Fp, fpv);
            let r = evaluate(&rec.ode, &bo).map_err(|e| e.to_string())?;
            let scale = 1.0 + fv.abs() + fpv.abs();
            if r.abs() > 1e-9 * scale {
                return Err(format!(
                    "{}: quadratic F leaves ODE residual {:.3e} at psi {psi}",
                    rec.id,
                    r.abs()
                ));
            }
            quad_checked += 1;
        }
    }
    if quad_checked < 60 {
        return Err(format!("only {quad_checked} quadratic-solution samples"));
    }
    // Integrated-F reconstruction across all cases.
    let mut verified = 0;
    let mut unsolved_verified = 0;
    for case in ALL_CASES {
        let params = base_params(case);
        for rec in reductions(case, &params).map_err(|e| e.to_string())? {
            let anchor = rec
                .bound_known_f()
                .and_then(|f| evaluate(&f, &Bindings::new().var(Var::Psi, 1.0)).ok())
                .filter(|v| v.is_finite());
            let (psi0, f0) = match anchor {
                Some(f0) => (1.0, f0),
                None => (1.0, 0.8),
            };
            let mut dom = SampleDomain::standard(606);
            dom.count = 120;
            let rep = verify_reduced(&rec, ReducedF::Integrated { psi0, f0 }, &params, &dom, 1e-6);
            match rep.verdict {
                Verdict::Verified => {
                    verified += 1;
                    if rec.known_f.is_none() {
                        unsolved_verified += 1;
                    }
                }
                Verdict::EmptyDomain => {}
                Verdict::Discrepant => {
                    return Err(format!(
                        "case {} {}: integrated-F residual {:.3e} > 1e-6",
                        case.number(),
                        rec.id,
                        rep.max_residual
                    ));
                }
            }
        }
    }
    if verified < 10 || unsolved_verified < 3 {
        return Err(format!(
            "reconstruction coverage too thin: {verified} rows ({unsolved_verified} unsolved)"
        ));
    }
    Ok(format!(
        "quadratic F exact to 1e-9; {verified} reductions reconstructed at 1e-6 ({unsolved_verified} without closed-form F)"
    ))
}

/// Criterion 7: the method-of-characteristics oracle reproduces each
/// verified explicit solution from its own t = 0 slice to 1e-6, and the
/// damping invariant is conserved along characteristics to 1e-10.
fn criterion_7() -> Result<String, String> {
    let mut tested = 0;
    for case in [CaseId::Case7, CaseId::Case2, CaseId::Case3] {
        let params = base_params(case);
        for form in solutions(case, &params).map_err(|e| e.to_string())? {
            if form.status != EntryStatus::Verified || form.kind != FormKind::Explicit {
                continue;
            }
            let u = form.bound_expr();
            let guards = form.bound_guards();
            let u0fn = substitute(&u, Var::T, &Expr::real(0.0));
            let mut queries = Vec::new();
            let mut wants = Vec::new();
            'q: for i in 0..40 {
                let x = 0.5 + 0.03 * i as f64;
                let t = 0.05 + 0.01 * (i % 10) as f64;
                for (px, pt) in [(x - 1.0, 0.0), (x - 0.5, 0.0), (x, 0.0), (x, t)] {
                    let b = Bindings::new().var(Var::X, px).var(Var::T, pt);
                    for g in &guards {
                        match evaluate(g, &b) {
                            Ok(v) if v > 1e-3 => {}
                            _ => continue 'q,
                        }
                    }
                }
                let b = Bindings::new().var(Var::X, x).var(Var::T, t);
                match evaluate(&u, &b) {
                    Ok(v) if v.is_finite() && v > 0.0 => {
                        queries.push((x, t));
                        wants.push(v);
                    }
                    _ => {}
                }
            }
            if queries.len() < 10 {
                continue;
            }
            let sol = match solve_ivp(&u0fn, &params, &queries) {
                Ok(s) => s,
                Err(MocError::ShockReached(_)) => continue,
                Err(e) => return Err(format!("{}: {e}", form.id)),
            };
            let linf = sol
                .grid
                .iter()
                .zip(&wants)
                .map(|(&(_, _, got), &want)| (got - want).abs())
                .fold(0.0_f64, f64::max);
            if linf > 1e-6 {
                return Err(format!("{}: oracle L-inf {linf:.3e} > 1e-6", form.id));
            }
            tested += 1;
        }
    }
    if tested < 4 {
        return Err(format!("only {tested} solutions crosschecked against the oracle"));
    }
    // Conservation of the damping invariant.
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for case in ALL_CASES {
        let params = base_params(case);
        for _ in 0..20 {
            let u0 = rng.gen_range(0.5..2.0);
            let c0 = conserved_quantity(u0, &params, 0.0);
            for i in 1..=8 {
                let t = 0.05 * i as f64;
                let u = match u_along_characteristic(u0, &params, t) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                let drift = (conserved_quantity(u, &params, t) - c0).abs();
                if drift > 1e-10 {
                    return Err(format!(
                        "case {}: invariant drift {drift:.3e} > 1e-10",
                        case.number()
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{tested} solutions reproduced to 1e-6 from their initial slice; invariant drift <= 1e-10"
    ))
}

/// Criterion 8: the audit is byte-identical across runs at a fixed seed, and
/// classification agrees with a 50-pair exact-rational hand table.
fn criterion_8() -> Result<String, String> {
    for case in [CaseId::Case2, CaseId::Case7] {
        let params = base_params(case);
        let a = audit(case, &params, 42).to_json();
        let b = audit(case, &params, 42).to_json();
        if a != b {
            return Err(format!("case {} audit not byte-identical", case.number()));
        }
        if !audit(case, &params, 42).all_ok {
            return Err(format!("case {} audit reports a failure", case.number()));
        }
    }
    // Hand-checked classification table: ((k_n, k_d), (m_n, m_d), case).
    #[rustfmt::skip]
    let table: [((i64, i64), (i64, i64), u8); 50] = [
        ((2, 1), (3, 1), 2), ((1, 1), (2, 1), 2), ((1, 2), (3, 2), 2),
        ((-1, 2), (1, 2), 2), ((3, 1), (4, 1), 2), ((5, 2), (7, 2), 2),
        ((-2, 1), (-1, 1), 2), ((-1, 1), (2, 1), 3), ((-2, 1), (3, 1), 3),
        ((1, 2), (1, 2), 3), ((-3, 2), (5, 2), 3), ((-1, 2), (3, 2), 3),
        ((2, 1), (-1, 1), 3), ((3, 1), (-2, 1), 3), ((1, 1), (3, 1), 4),
        ((1, 2), (2, 1), 4), ((2, 1), (5, 1), 4), ((3, 2), (4, 1), 4),
        ((-1, 1), (-1, 1), 4), ((-1, 2), (0, 1), 4), ((-1, 1), (3, 1), 5),
        ((-1, 2), (2, 1), 5), ((-2, 1), (5, 1), 5), ((-3, 2), (4, 1), 5),
        ((1, 1), (-1, 1), 5), ((1, 2), (0, 1), 5), ((1, 1), (4, 1), 6),
        ((2, 1), (7, 1), 6), ((1, 3), (2, 1), 6), ((-1, 1), (-2, 1), 6),
        ((2, 3), (3, 1), 6), ((-1, 3), (0, 1), 6), ((1, 1), (1, 1), 7),
        ((2, 1), (1, 1), 7), ((-1, 1), (1, 1), 7), ((1, 2), (1, 1), 7),
        ((-3, 2), (1, 1), 7), ((5, 1), (1, 1), 7), ((2, 1), (2, 1), 1),
        ((3, 1), (2, 1), 1), ((1, 1), (5, 1), 1), ((1, 2), (3, 1), 1),
        ((-1, 2), (4, 1), 1), ((3, 2), (1, 2), 1), ((5, 2), (2, 1), 1),
        ((-2, 1), (2, 1), 1), ((1, 1), (0, 1), 3), ((2, 1), (0, 1), 1),
        ((4, 1), (3, 1), 1), ((1, 3), (3, 1), 1),
    ];
    for ((kn, kd), (mn, md), want) in table {
        let got = classify(Rat::new(kn, kd), Rat::new(mn, md))
            .map_err(|e| format!("({kn}/{kd}, {mn}/{md}): {e}"))?;
        if got.number() != want {
            return Err(format!(
                "({kn}/{kd}, {mn}/{md}): classified case {}, expected {want}",
                got.number()
            ));
        }
    }
    Ok("audits byte-identical and all_ok; 50-pair classification table exact".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<String, String>); 8] = [
        ("symmetry validity", criterion_1),
        ("commutator tables", criterion_2),
        ("flow agreement", criterion_3),
        ("solution catalog", criterion_4),
        ("pushforward closure", criterion_5),
        ("reduced ODEs", criterion_6),
        ("oracle equivalence", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS — {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL — {name}: {detail}", i + 1);
                failures.push(format!("{name}: {detail}"));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
