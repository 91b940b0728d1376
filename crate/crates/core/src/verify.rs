//! Residual engine and audit orchestrator: numeric verification of explicit,
//! implicit, and reduced-ODE solutions, plus the per-case structured audit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{
    example_multiparameter, reductions, solutions, travelling_waves_all, EntryStatus, FormKind,
    ReductionRecord, SolutionForm,
};
use crate::exprcore::{differentiate, evaluate, fold, Bindings, Expr, Var};
use crate::family::{CaseId, PdeParams};
use crate::flows::{
    closed_form_indices, exponentiate_generator, group_law_residual, group_map, pushforward,
    SolutionHandle,
};
use crate::symmetry::{generators, prolongation_residual, residual_scale, verify_commutator_table};
use crate::util::{bracket_and_solve, rk45, NumericError};

/// Rectangular sample region with positivity guards and a margin.
#[derive(Clone, Debug, Serialize)]
pub struct SampleDomain {
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    /// Guards must exceed this margin at every reported sample.
    pub margin: f64,
    /// Number of accepted samples aimed for (draws stop after 20x attempts).
    pub count: usize,
    pub seed: u64,
}

impl SampleDomain {
    pub fn standard(seed: u64) -> SampleDomain {
        SampleDomain {
            x_range: (0.1, 2.0),
            t_range: (0.1, 2.0),
            margin: 1e-3,
            count: 200,
            seed,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        (
            rng.gen_range(self.x_range.0..self.x_range.1),
            rng.gen_range(self.t_range.0..self.t_range.1),
        )
    }

    fn guards_hold(&self, guards: &[Expr], b: &Bindings) -> bool {
        guards.iter().all(|g| match evaluate(g, b) {
            Ok(v) => v.is_finite() && v > self.margin,
            Err(_) => false,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "VERIFIED")]
    Verified,
    #[serde(rename = "DISCREPANT")]
    Discrepant,
    #[serde(rename = "EMPTY_DOMAIN")]
    EmptyDomain,
}

/// Outcome of one residual sweep.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub id: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub worst_point: Option<(f64, f64)>,
    pub verdict: Verdict,
    /// What the catalog says this entry should do (discrepant entries are
    /// kept on purpose; they pass the audit by failing verification).
    pub expected: Verdict,
}

impl ResidualReport {
    fn from_samples(id: &str, samples: &[(f64, f64, f64)], quota: usize, tol: f64) -> Self {
        if samples.is_empty() {
            return ResidualReport {
                id: id.to_string(),
                points: 0,
                max_residual: f64::NAN,
                mean_residual: f64::NAN,
                worst_point: None,
                verdict: Verdict::EmptyDomain,
                expected: Verdict::Verified,
            };
        }
        let mut max_r = 0.0_f64;
        let mut sum = 0.0_f64;
        let mut worst = (samples[0].0, samples[0].1);
        for &(x, t, r) in samples {
            sum += r;
            if r >= max_r {
                max_r = r;
                worst = (x, t);
            }
        }
        let verdict = if samples.len() < quota {
            Verdict::EmptyDomain
        } else if max_r <= tol {
            Verdict::Verified
        } else {
            Verdict::Discrepant
        };
        ResidualReport {
            id: id.to_string(),
            points: samples.len(),
            max_residual: max_r,
            mean_residual: sum / samples.len() as f64,
            worst_point: Some(worst),
            verdict,
            expected: Verdict::Verified,
        }
    }

    fn expect(mut self, v: Verdict) -> Self {
        self.expected = v;
        self
    }

    /// An entry is in order when it does what the catalog expects of it.
    /// An empty domain is inconclusive, not a failure.
    pub fn ok(&self) -> bool {
        self.verdict == self.expected || self.verdict == Verdict::EmptyDomain
    }
}

/// Scaled PDE residual of an explicit u(x, t) expression at one point, from
/// exact symbolic derivatives. None when evaluation leaves the real domain.
pub fn pointwise_residual(u: &Expr, params: &PdeParams, x: f64, t: f64) -> Option<f64> {
    let ux = differentiate(u, Var::X);
    let ut = differentiate(u, Var::T);
    let b = Bindings::new().var(Var::X, x).var(Var::T, t);
    let uv = evaluate(u, &b).ok()?;
    let uxv = evaluate(&ux, &b).ok()?;
    let utv = evaluate(&ut, &b).ok()?;
    residual_from_values(params, uv, uxv, utv)
}

fn residual_from_values(params: &PdeParams, uv: f64, uxv: f64, utv: f64) -> Option<f64> {
    if !uv.is_finite() || !uxv.is_finite() || !utv.is_finite() {
        return None;
    }
    let flux = signed_pow(uv, params.k_f64())? * uxv;
    let damp = params.lambda * signed_pow(uv, params.m_f64())?;
    let res = utv + flux + damp;
    let scale = 1.0 + utv.abs().max(flux.abs()).max(damp.abs());
    Some(res.abs() / scale)
}

/// u^p for possibly negative u: real only when p is (numerically) an integer.
fn signed_pow(u: f64, p: f64) -> Option<f64> {
    if u >= 0.0 {
        Some(u.powf(p))
    } else if (p - p.round()).abs() < 1e-12 {
        let mag = (-u).powf(p);
        Some(if (p.round() as i64) % 2 == 0 { mag } else { -mag })
    } else {
        None
    }
}

/// Residual sweep for an explicit catalog entry (constants at defaults).
pub fn residual_explicit(
    form: &SolutionForm,
    params: &PdeParams,
    dom: &SampleDomain,
    tol: f64,
) -> ResidualReport {
    assert_eq!(form.kind, FormKind::Explicit, "explicit entry expected");
    let u = form.bound_expr();
    let guards = form.bound_guards();
    let ux = differentiate(&u, Var::X);
    let ut = differentiate(&u, Var::T);
    let mut rng = ChaCha8Rng::seed_from_u64(dom.seed);
    let mut samples = Vec::new();
    for _ in 0..dom.count * 20 {
        if samples.len() >= dom.count {
            break;
        }
        let (x, t) = dom.draw(&mut rng);
        let b = Bindings::new().var(Var::X, x).var(Var::T, t);
        if !dom.guards_hold(&guards, &b) {
            continue;
        }
        let (uv, uxv, utv) = match (evaluate(&u, &b), evaluate(&ux, &b), evaluate(&ut, &b)) {
            (Ok(a), Ok(bb), Ok(c)) => (a, bb, c),
            _ => continue,
        };
        if let Some(r) = residual_from_values(params, uv, uxv, utv) {
            samples.push((x, t, r));
        }
    }
    let quota = (dom.count / 10).max(8);
    ResidualReport::from_samples(&form.id, &samples, quota, tol)
        .expect(expected_of(form.status))
}

fn expected_of(status: EntryStatus) -> Verdict {
    match status {
        EntryStatus::Verified => Verdict::Verified,
        EntryStatus::Discrepant => Verdict::Discrepant,
    }
}

/// Residual sweep for an implicit relation: bracketed root extraction on the
/// declared u-interval, then implicit differentiation with exact partials.
pub fn residual_implicit(
    form: &SolutionForm,
    params: &PdeParams,
    dom: &SampleDomain,
    tol: f64,
) -> ResidualReport {
    assert_eq!(form.kind, FormKind::Implicit, "implicit entry expected");
    let rel = form.bound_expr();
    let guards = form.bound_guards();
    let (ulo, uhi) = form.u_bracket.unwrap_or((1e-3, 10.0));
    let rel_x = differentiate(&rel, Var::X);
    let rel_t = differentiate(&rel, Var::T);
    let rel_u = differentiate(&rel, Var::U);
    let mut rng = ChaCha8Rng::seed_from_u64(dom.seed);
    let mut samples = Vec::new();
    for _ in 0..dom.count * 20 {
        if samples.len() >= dom.count {
            break;
        }
        let (x, t) = dom.draw(&mut rng);
        let bxt = Bindings::new().var(Var::X, x).var(Var::T, t);
        if !dom.guards_hold(&guards, &bxt) {
            continue;
        }
        let mut f = |uu: f64| -> Result<f64, NumericError> {
            let b = Bindings::new().var(Var::X, x).var(Var::T, t).var(Var::U, uu);
            evaluate(&rel, &b).map_err(|e| NumericError::Domain(e.to_string()))
        };
        let root = match bracket_and_solve(&mut f, ulo, uhi, 400, 1e-12) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let b = Bindings::new().var(Var::X, x).var(Var::T, t).var(Var::U, root);
        let (rx, rt, ru) = match (
            evaluate(&rel_x, &b),
            evaluate(&rel_t, &b),
            evaluate(&rel_u, &b),
        ) {
            (Ok(a), Ok(bb), Ok(c)) if c.abs() > 1e-14 => (a, bb, c),
            _ => continue,
        };
        let uxv = -rx / ru;
        let utv = -rt / ru;
        if let Some(r) = residual_from_values(params, root, uxv, utv) {
            samples.push((x, t, r));
        }
    }
    let quota = (dom.count / 20).max(4);
    ResidualReport::from_samples(&form.id, &samples, quota, tol)
        .expect(expected_of(form.status))
}

/// Dispatch on the entry kind with per-kind default tolerances.
pub fn residual_entry(form: &SolutionForm, params: &PdeParams, dom: &SampleDomain) -> ResidualReport {
    match form.kind {
        FormKind::Explicit => residual_explicit(form, params, dom, 1e-8),
        FormKind::Implicit => residual_implicit(form, params, dom, 1e-7),
    }
}

/// Source of F for checking a reduction record.
pub enum ReducedF<'a> {
    /// Use the record's own known_F (error if absent).
    Known,
    /// An explicit F(psi) expression.
    Given(&'a Expr),
    /// Integrate F' = -Q/P from (psi0, f0) along psi (RK45, tol 1e-9).
    Integrated { psi0: f64, f0: f64 },
}

/// Split the reduced ODE, linear in F', into P*F' + Q at a point.
fn ode_split(ode: &Expr, psi_v: f64, f_v: f64) -> Option<(f64, f64)> {
    let b0 = Bindings::new()
        .var(Var::Psi, psi_v)
        .var(Var::F, f_v)
        .var(Var::Fp, 0.0);
    let b1 = Bindings::new()
        .var(Var::Psi, psi_v)
        .var(Var::F, f_v)
        .var(Var::Fp, 1.0);
    let q = evaluate(ode, &b0).ok()?;
    let p1 = evaluate(ode, &b1).ok()?;
    let p = p1 - q;
    if !p.is_finite() || !q.is_finite() {
        return None;
    }
    Some((p, q))
}

fn integrate_f(ode: &Expr, psi0: f64, f0: f64, psi_target: f64) -> Result<f64, NumericError> {
    if (psi_target - psi0).abs() < 1e-14 {
        return Ok(f0);
    }
    let f = |s: f64, y: &[f64; 1], dy: &mut [f64; 1]| -> Result<(), NumericError> {
        let (p, q) = ode_split(ode, s, y[0])
            .ok_or_else(|| NumericError::Domain("ode eval".into()))?;
        if p.abs() < 1e-12 {
            return Err(NumericError::Domain("ode singular in F'".into()));
        }
        dy[0] = -q / p;
        Ok(())
    };
    // rk45 integrates s over [0, s_end]; shift to [psi0, psi_target].
    let g = |s: f64, y: &[f64; 1], dy: &mut [f64; 1]| f(psi0 + s, y, dy);
    let y = rk45(g, [f0], psi_target - psi0, 1e-9, |y| {
        y.iter().all(|v| v.is_finite() && v.abs() < 1e6)
    })?;
    Ok(y[0])
}

/// Integrated values of F at sorted psi targets by continuation outward from
/// the anchor (one short integration hop per target instead of a restart).
fn integrate_f_grid(ode: &Expr, psi0: f64, f0: f64, targets: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; targets.len()];
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    for dir in [1i32, -1] {
        let mut cur = (psi0, f0);
        let side: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| {
                if dir > 0 {
                    targets[i] >= psi0
                } else {
                    targets[i] < psi0
                }
            })
            .collect();
        let iter: Box<dyn Iterator<Item = usize>> = if dir > 0 {
            Box::new(side.into_iter())
        } else {
            Box::new(side.into_iter().rev())
        };
        for i in iter {
            // Cap the excursion: far targets are skipped, not chased.
            if (targets[i] - psi0).abs() > 6.0 {
                continue;
            }
            match integrate_f(ode, cur.0, cur.1, targets[i]) {
                Ok(v) => {
                    cur = (targets[i], v);
                    out[i] = Some(v);
                }
                Err(_) => break,
            }
        }
    }
    out
}

/// Check a reduction record: F (known, given, or integrated) must satisfy
/// the reduced ODE, and the reconstructed u must satisfy the PDE via the
/// implicit chain rule. Residuals from both checks feed one report.
pub fn verify_reduced(
    rec: &ReductionRecord,
    f_source: ReducedF,
    params: &PdeParams,
    dom: &SampleDomain,
    tol: f64,
) -> ResidualReport {
    let psi_x = differentiate(&rec.psi, Var::X);
    let psi_t = differentiate(&rec.psi, Var::T);
    let u_x = differentiate(&rec.u_of_f, Var::X);
    let u_t = differentiate(&rec.u_of_f, Var::T);
    let u_f = differentiate(&rec.u_of_f, Var::F);

    let known = match &f_source {
        ReducedF::Known => rec.bound_known_f(),
        ReducedF::Given(e) => Some((*e).clone()),
        ReducedF::Integrated { .. } => None,
    };
    if matches!(f_source, ReducedF::Known) && known.is_none() {
        // Nothing recorded to check against.
        return ResidualReport::from_samples(&rec.id, &[], 1, tol);
    }
    let known_p = known.as_ref().map(|f| differentiate(f, Var::Psi));

    // Phase 1: collect sample points with a finite similarity variable.
    let mut rng = ChaCha8Rng::seed_from_u64(dom.seed);
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for _ in 0..dom.count * 20 {
        if pts.len() >= dom.count {
            break;
        }
        let (x, t) = dom.draw(&mut rng);
        let bxt = Bindings::new().var(Var::X, x).var(Var::T, t);
        match evaluate(&rec.psi, &bxt) {
            Ok(v) if v.is_finite() => pts.push((x, t, v)),
            _ => {}
        }
    }
    // Phase 2: F values, either from the expression or by continuation.
    let integrated: Option<Vec<Option<f64>>> = match (&known, &f_source) {
        (None, ReducedF::Integrated { psi0, f0 }) => {
            let targets: Vec<f64> = pts.iter().map(|p| p.2).collect();
            Some(integrate_f_grid(&rec.ode, *psi0, *f0, &targets))
        }
        _ => None,
    };

    let mut samples = Vec::new();
    for (i, &(x, t, psi_v)) in pts.iter().enumerate() {
        let bxt = Bindings::new().var(Var::X, x).var(Var::T, t);
        let (f_v, fp_v, ode_dev) = match (&known, &known_p) {
            (Some(kf), Some(kfp)) => {
                let b = Bindings::new().var(Var::Psi, psi_v);
                let (fv, fpv) = match (evaluate(kf, &b), evaluate(kfp, &b)) {
                    (Ok(a), Ok(bb)) if a.is_finite() && bb.is_finite() => (a, bb),
                    _ => continue,
                };
                let bo = Bindings::new()
                    .var(Var::Psi, psi_v)
                    .var(Var::F, fv)
                    .var(Var::Fp, fpv);
                let dev = match evaluate(&rec.ode, &bo) {
                    Ok(v) if v.is_finite() => v.abs() / (1.0 + fv.abs() + fpv.abs()),
                    _ => continue,
                };
                (fv, fpv, dev)
            }
            _ => {
                let fv = match integrated.as_ref().and_then(|g| g[i]) {
                    Some(v) => v,
                    None => continue,
                };
                let (p, q) = match ode_split(&rec.ode, psi_v, fv) {
                    Some((p, q)) if p.abs() > 1e-10 => (p, q),
                    _ => continue,
                };
                (fv, -q / p, 0.0)
            }
        };
        // Reconstruct the PDE residual through the chain rule.
        let b = Bindings::new()
            .var(Var::X, x)
            .var(Var::T, t)
            .var(Var::F, f_v);
        let vals = (
            evaluate(&rec.u_of_f, &b),
            evaluate(&u_x, &b),
            evaluate(&u_t, &b),
            evaluate(&u_f, &b),
            evaluate(&psi_x, &bxt),
            evaluate(&psi_t, &bxt),
        );
        let (uv, uxe, ute, ufv, pxv, ptv) = match vals {
            (Ok(a), Ok(b1), Ok(c1), Ok(d), Ok(e), Ok(f1))
                if [a, b1, c1, d, e, f1].iter().all(|v| v.is_finite()) && a > 1e-9 =>
            {
                (a, b1, c1, d, e, f1)
            }
            _ => continue,
        };
        let uxv = uxe + ufv * fp_v * pxv;
        let utv = ute + ufv * fp_v * ptv;
        if let Some(r) = residual_from_values(params, uv, uxv, utv) {
            samples.push((x, t, r.max(ode_dev)));
        }
    }
    let quota = (dom.count / 20).max(4);
    ResidualReport::from_samples(&rec.id, &samples, quota, tol)
        .expect(expected_of(rec.status))
}

/// Fourth-order central-difference crosscheck of the symbolic derivatives
/// used by `residual_explicit`. Reports the max |FD - symbolic| residual gap.
pub fn finite_difference_crosscheck(
    form: &SolutionForm,
    params: &PdeParams,
    dom: &SampleDomain,
    tol: f64,
) -> ResidualReport {
    assert_eq!(form.kind, FormKind::Explicit, "explicit entry expected");
    let u = form.bound_expr();
    let guards = form.bound_guards();
    let ux = differentiate(&u, Var::X);
    let ut = differentiate(&u, Var::T);
    let mut rng = ChaCha8Rng::seed_from_u64(dom.seed);
    let mut samples = Vec::new();
    let ev = |x: f64, t: f64| -> Option<f64> {
        let b = Bindings::new().var(Var::X, x).var(Var::T, t);
        evaluate(&u, &b).ok().filter(|v| v.is_finite())
    };
    for _ in 0..dom.count * 20 {
        if samples.len() >= dom.count {
            break;
        }
        let (x, t) = dom.draw(&mut rng);
        let b = Bindings::new().var(Var::X, x).var(Var::T, t);
        if !dom.guards_hold(&guards, &b) {
            continue;
        }
        let hx = 1e-4 * (1.0 + x.abs());
        let ht = 1e-4 * (1.0 + t.abs());
        let stencil_x = (
            ev(x - 2.0 * hx, t),
            ev(x - hx, t),
            ev(x + hx, t),
            ev(x + 2.0 * hx, t),
        );
        let stencil_t = (
            ev(x, t - 2.0 * ht),
            ev(x, t - ht),
            ev(x, t + ht),
            ev(x, t + 2.0 * ht),
        );
        let (Some(xm2), Some(xm1), Some(xp1), Some(xp2)) = stencil_x else {
            continue;
        };
        let (Some(tm2), Some(tm1), Some(tp1), Some(tp2)) = stencil_t else {
            continue;
        };
        let ux_fd = (xm2 - 8.0 * xm1 + 8.0 * xp1 - xp2) / (12.0 * hx);
        let ut_fd = (tm2 - 8.0 * tm1 + 8.0 * tp1 - tp2) / (12.0 * ht);
        let (uv, uxs, uts) = match (evaluate(&u, &b), evaluate(&ux, &b), evaluate(&ut, &b)) {
            (Ok(a), Ok(bb), Ok(c)) if a.is_finite() && bb.is_finite() && c.is_finite() => {
                (a, bb, c)
            }
            _ => continue,
        };
        let (r_fd, r_sym) = match (
            residual_from_values(params, uv, ux_fd, ut_fd),
            residual_from_values(params, uv, uxs, uts),
        ) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        samples.push((x, t, (r_fd - r_sym).abs()));
    }
    let quota = (dom.count / 10).max(8);
    ResidualReport::from_samples(&form.id, &samples, quota, tol)
        .expect(expected_of(form.status))
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSection {
    pub name: String,
    pub entries: Vec<ResidualReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditMeta {
    pub case: u8,
    pub lambda: f64,
    pub k: String,
    pub m: String,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub meta: AuditMeta,
    pub sections: Vec<AuditSection>,
    /// True when every entry behaves as its catalog status predicts.
    pub all_ok: bool,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }
}

fn sorted(mut entries: Vec<ResidualReport>) -> Vec<ResidualReport> {
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    entries
}

/// Full deterministic audit of one case: generator checks, commutator table
/// (where recorded), flow-vs-exponentiation, every catalog residual,
/// pushforward-closure spot checks, and (linear damping) the example chains.
pub fn audit(case: CaseId, params: &PdeParams, seed: u64) -> AuditReport {
    let tol = 1e-9;
    let mut sections = Vec::new();

    sections.push(AuditSection {
        name: "generators".into(),
        entries: sorted(audit_generators(case, params, seed)),
    });
    if matches!(case, CaseId::Case2 | CaseId::Case7) {
        sections.push(AuditSection {
            name: "commutator-table".into(),
            entries: sorted(audit_table(case, params, seed)),
        });
    }
    sections.push(AuditSection {
        name: "flows".into(),
        entries: sorted(audit_flows(case, params, seed)),
    });
    sections.push(AuditSection {
        name: "solutions".into(),
        entries: sorted(audit_solutions(case, params, seed)),
    });
    sections.push(AuditSection {
        name: "reductions".into(),
        entries: sorted(audit_reductions(case, params, seed)),
    });
    sections.push(AuditSection {
        name: "pushforward-closure".into(),
        entries: sorted(audit_closure(case, params, seed)),
    });

    let all_ok = sections
        .iter()
        .flat_map(|s| &s.entries)
        .all(ResidualReport::ok);
    AuditReport {
        meta: AuditMeta {
            case: case.number(),
            lambda: params.lambda,
            k: params.k.to_string(),
            m: params.m.to_string(),
            seed,
            tol,
        },
        sections,
        all_ok,
    }
}

fn audit_generators(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let mut out = Vec::new();
    let Ok(gens) = generators(case, params) else {
        return out;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    for (i, field) in gens.fields.iter().enumerate() {
        let mut samples = Vec::new();
        for _ in 0..200 {
            let st = (
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
            );
            if let Ok(r) = prolongation_residual(field, params, st) {
                samples.push((st.0, st.1, r.abs() / residual_scale(params, st)));
            }
        }
        out.push(ResidualReport::from_samples(
            &format!("M{}", i + 1),
            &samples,
            50,
            1e-9,
        ));
    }
    // Negative control: a perturbed translation is not a symmetry.
    if let Some(first) = gens.fields.first() {
        let mut bad = first.clone();
        bad.phi = bad.phi.clone() + Expr::real(0.05) * Expr::u();
        let mut samples = Vec::new();
        for _ in 0..50 {
            let st = (
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
            );
            if let Ok(r) = prolongation_residual(&bad, params, st) {
                samples.push((st.0, st.1, r.abs() / residual_scale(params, st)));
            }
        }
        out.push(
            ResidualReport::from_samples("M1-perturbed-control", &samples, 10, 1e-3)
                .expect(Verdict::Discrepant),
        );
    }
    out
}

fn audit_table(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let mut out = Vec::new();
    for (suffix, as_printed, expected) in [
        ("corrected", false, Verdict::Verified),
        (
            "as-tabulated",
            true,
            // The linear-damping table has one transcribed cell that does
            // not match the bracket; the quadratic-damping table is exact.
            // At lambda*k = 1 the bad cell coincides with the corrected one,
            // so the tabulated variant is legitimately verified there.
            if case == CaseId::Case7 && (params.lambda * params.k_f64() - 1.0).abs() > 1e-9 {
                Verdict::Discrepant
            } else {
                Verdict::Verified
            },
        ),
    ] {
        let Ok(rep) = verify_commutator_table(case, params, 1e-9, 50, seed, as_printed) else {
            continue;
        };
        let max_dev = rep
            .cells
            .iter()
            .map(|c| c.max_dev)
            .fold(0.0_f64, f64::max);
        let verdict = if rep.all_match {
            Verdict::Verified
        } else {
            Verdict::Discrepant
        };
        out.push(ResidualReport {
            id: format!("table-{suffix}"),
            points: rep.cells.len(),
            max_residual: max_dev,
            mean_residual: max_dev,
            worst_point: None,
            verdict,
            expected,
        });
    }
    out
}

fn audit_flows(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x40);
    for &idx in closed_form_indices(case) {
        let Ok(g) = group_map(case, idx, params) else {
            continue;
        };
        let mut samples = Vec::new();
        for _ in 0..250 {
            let p0 = (
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..2.0),
            );
            let eps = rng.gen_range(-0.2..0.2);
            if !g.in_domain(p0, eps) {
                continue;
            }
            let Ok(closed) = g.apply(p0, eps) else {
                continue;
            };
            let Ok(num) = exponentiate_generator(case, idx, params, p0, eps) else {
                continue;
            };
            // Scale by the image magnitude: near-singular map denominators
            // legitimately amplify both the closed form and the integrator.
            let mag = 1.0 + closed.0.abs().max(closed.1.abs()).max(closed.2.abs());
            let flow_dev = (closed.0 - num.0)
                .abs()
                .max((closed.1 - num.1).abs())
                .max((closed.2 - num.2).abs())
                / mag;
            // Identity and group law at the same base point.
            let id_dev = match g.apply(p0, 0.0) {
                Ok(p) => (p.0 - p0.0).abs().max((p.1 - p0.1).abs()).max((p.2 - p0.2).abs()),
                Err(_) => continue,
            };
            let law_dev = if g.in_domain(p0, eps / 2.0) {
                group_law_residual(&g, eps / 2.0, eps / 2.0, p0).unwrap_or(f64::INFINITY)
            } else {
                0.0
            };
            if !law_dev.is_finite() {
                continue;
            }
            // Normalize the sub-checks to the flow tolerance.
            let combined = flow_dev
                .max(id_dev * (1e-8 / 1e-12))
                .max(law_dev * (1e-8 / 1e-10));
            samples.push((p0.0, p0.1, combined));
        }
        out.push(ResidualReport::from_samples(
            &format!("G{idx}"),
            &samples,
            25,
            1e-8,
        ));
    }
    out
}

fn catalog_entries(case: CaseId, params: &PdeParams) -> Vec<SolutionForm> {
    let mut forms = solutions(case, params).unwrap_or_default();
    forms.extend(travelling_waves_all(case, params, 2.0).unwrap_or_default());
    if case == CaseId::Case7 {
        forms.extend(example_multiparameter(params).unwrap_or_default());
    }
    forms
}

fn audit_solutions(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let dom = SampleDomain::standard(seed ^ 0x50);
    catalog_entries(case, params)
        .iter()
        .map(|form| residual_entry(form, params, &dom))
        .collect()
}

fn audit_reductions(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let dom = SampleDomain::standard(seed ^ 0x60);
    let mut out = Vec::new();
    for rec in reductions(case, params).unwrap_or_default() {
        if rec.known_f.is_some() {
            let mut rep = verify_reduced(&rec, ReducedF::Known, params, &dom, 1e-8);
            rep.id = format!("{}-known", rec.id);
            out.push(rep);
        }
        // Numerically integrated F through a safe interior anchor.
        let anchor = reduction_anchor(&rec, params);
        if let Some((psi0, f0)) = anchor {
            let mut rep = verify_reduced(
                &rec,
                ReducedF::Integrated { psi0, f0 },
                params,
                &dom,
                1e-6,
            );
            rep.id = format!("{}-integrated", rec.id);
            out.push(rep);
        }
    }
    out
}

/// A (psi0, f0) anchor from which the reduced ODE integrates stably.
fn reduction_anchor(rec: &ReductionRecord, _params: &PdeParams) -> Option<(f64, f64)> {
    // Prefer starting on the known solution when there is one, slightly
    // perturbed so the integrated trajectory is not trivially symbolic.
    if let Some(kf) = rec.bound_known_f() {
        let psi0 = 1.0;
        let b = Bindings::new().var(Var::Psi, psi0);
        if let Ok(f0) = evaluate(&kf, &b) {
            if f0.is_finite() {
                return Some((psi0, f0));
            }
        }
    }
    Some((1.0, 0.8))
}

fn audit_closure(case: CaseId, params: &PdeParams, seed: u64) -> Vec<ResidualReport> {
    let mut out = Vec::new();
    let forms: Vec<SolutionForm> = solutions(case, params)
        .unwrap_or_default()
        .into_iter()
        .filter(|f| f.status == EntryStatus::Verified && f.kind == FormKind::Explicit)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70);
    for &idx in closed_form_indices(case) {
        let Ok(g) = group_map(case, idx, params) else {
            continue;
        };
        for form in &forms {
            for eps in [0.05, -0.05, 0.1, -0.1] {
                let seedsol = SolutionHandle::new(form.bound_expr(), form.bound_guards());
                let Ok(pushed) = pushforward(&g, eps, &seedsol) else {
                    continue;
                };
                let pu = fold(&pushed.expr);
                let pux = differentiate(&pu, Var::X);
                let put = differentiate(&pu, Var::T);
                let mut samples = Vec::new();
                for _ in 0..120 {
                    let x = rng.gen_range(0.1..2.0);
                    let t = rng.gen_range(0.1..2.0);
                    if !seedsol.in_domain(x, t) {
                        continue;
                    }
                    // Transport the base point through the group element so
                    // the sample lands inside the transformed domain.
                    let u0 = match seedsol.eval(x, t) {
                        Ok(v) if v.is_finite() => v,
                        _ => continue,
                    };
                    let (xt, tt) = match g.apply((x, t, u0), eps) {
                        Ok(p) => (p.0, p.1),
                        Err(_) => continue,
                    };
                    if !pushed.in_domain(xt, tt) {
                        continue;
                    }
                    let b = Bindings::new().var(Var::X, xt).var(Var::T, tt);
                    let vals = (evaluate(&pu, &b), evaluate(&pux, &b), evaluate(&put, &b));
                    if let (Ok(uv), Ok(uxv), Ok(utv)) = vals {
                        if let Some(r) = residual_from_values(params, uv, uxv, utv) {
                            samples.push((xt, tt, r));
                        }
                    }
                }
                out.push(ResidualReport::from_samples(
                    &format!("{}*G{idx}@{eps:+.2}", form.id),
                    &samples,
                    10,
                    1e-8,
                ));
            }
        }
    }
    out
}
