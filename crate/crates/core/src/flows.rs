//! One-parameter group transformations: closed-form catalog, numerical
//! exponentiation of generators, group-law checks, and solution pushforward
//! including multi-parameter chains.

use crate::exprcore::{
    evaluate, fold, substitute, substitute_all, Bindings, EvalError, Expr, Num, Rat, Var,
};
use crate::family::{CaseId, FamilyError, PdeParams};
use crate::symmetry::{generators, SymmetryError, VectorField};
use crate::util::{rk45, NumericError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("no group transformation with index {index} for case {case}")]
    UnknownIndex { case: u8, index: usize },
    #[error("no closed form is tabulated for index {index} of case {case}; use numerical exponentiation")]
    NoClosedForm { case: u8, index: usize },
    #[error("point leaves the transformation domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// A one-parameter transformation group in closed form. The component
/// expressions use the variables x, t, u and eps; the base components are
/// independent of u.
#[derive(Clone, Debug)]
pub struct GroupMap {
    pub case: CaseId,
    pub index: usize,
    pub params: PdeParams,
    pub x_map: Expr,
    pub t_map: Expr,
    pub u_map: Expr,
    /// Expressions (in x, t, u, eps) that must stay strictly positive.
    pub domain_guard: Vec<Expr>,
}

/// An evaluable solution u = phi(x, t) together with the domain guards it
/// has accumulated (expressions in x, t that must stay strictly positive).
#[derive(Clone, Debug)]
pub struct SolutionHandle {
    pub expr: Expr,
    pub guards: Vec<Expr>,
    /// The group-parameter values accumulated by pushforwards, in order.
    pub eps_history: Vec<(usize, f64)>,
}

impl SolutionHandle {
    pub fn new(expr: Expr, guards: Vec<Expr>) -> SolutionHandle {
        SolutionHandle {
            expr: fold(&expr),
            guards,
            eps_history: Vec::new(),
        }
    }

    /// The trivial seed solution u == 0.
    pub fn zero() -> SolutionHandle {
        SolutionHandle::new(Expr::zero(), Vec::new())
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, FlowError> {
        let b = Bindings::new().var(Var::X, x).var(Var::T, t);
        for g in &self.guards {
            if evaluate(g, &b)? <= 0.0 {
                return Err(FlowError::Domain(format!("guard violated at ({x}, {t})")));
            }
        }
        Ok(evaluate(&self.expr, &b)?)
    }

    /// True when every guard is strictly positive at (x, t).
    pub fn in_domain(&self, x: f64, t: f64) -> bool {
        let b = Bindings::new().var(Var::X, x).var(Var::T, t);
        self.guards
            .iter()
            .all(|g| matches!(evaluate(g, &b), Ok(v) if v > 0.0))
    }
}

fn rf(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ri(i: i64) -> Rat {
    Rat::from_integer(i)
}

fn c(r: Rat) -> Expr {
    Expr::num(Num::Rat(r))
}

/// Indices with a tabulated closed form for each case.
pub fn closed_form_indices(case: CaseId) -> &'static [usize] {
    match case {
        CaseId::Case1 | CaseId::Case5 | CaseId::Case6 => &[1, 2, 3],
        CaseId::Case2 | CaseId::Case7 => &[1, 2, 3, 4, 5, 6, 7, 8],
        CaseId::Case3 | CaseId::Case4 => &[1, 2, 6, 7, 8],
    }
}

/// All generator indices of a case (closed form or not).
pub fn all_indices(case: CaseId) -> std::ops::RangeInclusive<usize> {
    1..=case.algebra_dim()
}

/// The closed-form transformation G_index of the given case.
pub fn group_map(case: CaseId, index: usize, params: &PdeParams) -> Result<GroupMap, FlowError> {
    let actual = params.case();
    if actual != case {
        return Err(FlowError::Family(FamilyError::CaseMismatch {
            requested: case,
            actual,
        }));
    }
    if !all_indices(case).contains(&index) {
        return Err(FlowError::UnknownIndex {
            case: case.number(),
            index,
        });
    }
    if !closed_form_indices(case).contains(&index) {
        return Err(FlowError::NoClosedForm {
            case: case.number(),
            index,
        });
    }
    let x = Expr::x();
    let t = Expr::t();
    let u = Expr::u();
    let e = Expr::eps();
    let k = params.k;
    let m = params.m;
    let lam = params.lambda;
    let mut guards: Vec<Expr> = Vec::new();
    let (xm, tm, um) = match (case, index) {
        (_, 1) => (x.clone() + e.clone(), t.clone(), u.clone()),
        (_, 2) => (x.clone(), t.clone() + e.clone(), u.clone()),
        (CaseId::Case1, 3) => (
            (c((k - m + ri(1)) / k) * e.clone()).exp() * x.clone(),
            (c((ri(1) - m) / k) * e.clone()).exp() * t.clone(),
            (c(ri(1) / k) * e.clone()).exp() * u.clone(),
        ),
        (CaseId::Case2, idx) => {
            // a = lambda (m - 1)
            let a = lam * rf(m - ri(1));
            let ae = Expr::real(a);
            let inv_a = Expr::real(1.0 / a);
            let e_pax = (ae.clone() * x.clone()).exp();
            let e_nax = (Expr::real(-a) * x.clone()).exp();
            let rm1 = |b: Expr| b.pow(Num::Rat(ri(1) / (m - ri(1))));
            let r1m = |b: Expr| b.pow(Num::Rat(ri(1) / (ri(1) - m)));
            match idx {
                3 => {
                    let w = Expr::one() - ae.clone() * e.clone() * t.clone();
                    let radicand = e.clone() * w.clone()
                        + w.clone().powi(2) * u.clone().pow(Num::Rat(m - ri(1)));
                    guards.push(w.clone());
                    guards.push(radicand.clone());
                    (
                        x.clone() - inv_a.clone() * w.clone().ln(),
                        t.clone() * w.recip(),
                        rm1(radicand),
                    )
                }
                4 => {
                    let s = ae.clone() * e.clone() * t.clone() + e_pax.clone();
                    let num = e.clone() * e_nax.clone() + u.clone().pow(Num::Rat(m - ri(1)));
                    let den = Expr::one() + ae.clone() * e.clone() * t.clone() * e_nax.clone();
                    guards.push(s.clone());
                    guards.push(num.clone());
                    guards.push(den.clone());
                    (inv_a.clone() * s.ln(), t.clone(), rm1(num * den.recip()))
                }
                5 => {
                    let radicand =
                        u.clone().pow(Num::Rat(ri(1) - m)) - e.clone() * e_pax.clone();
                    guards.push(radicand.clone());
                    (
                        x.clone(),
                        t.clone() - inv_a.clone() * e.clone() * e_pax.clone(),
                        r1m(radicand),
                    )
                }
                6 => (
                    x.clone(),
                    (-e.clone()).exp() * t.clone(),
                    (c(ri(1) / (m - ri(1))) * e.clone()).exp() * u.clone(),
                ),
                7 => {
                    let s = -e.clone() + e_pax.clone();
                    guards.push(s.clone());
                    (
                        inv_a.clone() * s.clone().ln(),
                        t.clone(),
                        (Expr::real(lam) * x.clone()).exp() * r1m(s) * u.clone(),
                    )
                }
                8 => {
                    let s = Expr::real(-a) * e.clone() + e_nax.clone();
                    let den = Expr::one() - ae.clone() * e.clone() * e_pax.clone();
                    let radicand = Expr::real(a * a) * e.clone() * t.clone() * s.clone().recip()
                        + u.clone().pow(Num::Rat(ri(1) - m));
                    guards.push(s.clone());
                    guards.push(den.clone());
                    guards.push(radicand.clone());
                    (
                        -inv_a.clone() * s.ln(),
                        t.clone() * den.recip(),
                        r1m(radicand),
                    )
                }
                _ => unreachable!(),
            }
        }
        (CaseId::Case3, idx) => {
            // b = lambda (1 - m)
            let b = lam * rf(ri(1) - m);
            let r1m = |base: Expr| base.pow(Num::Rat(ri(1) / (ri(1) - m)));
            let u1m = u.clone().pow(Num::Rat(ri(1) - m));
            match idx {
                6 => {
                    let radicand = e.clone() + u1m;
                    guards.push(radicand.clone());
                    (x.clone() + e.clone() * t.clone(), t.clone(), r1m(radicand))
                }
                7 => {
                    let shift = Expr::real(b / 2.0) * t.clone().powi(2);
                    let radicand = e.clone().exp()
                        * (u1m + Expr::real(b) * t.clone())
                        - Expr::real(b) * t.clone();
                    guards.push(radicand.clone());
                    (
                        (x.clone() + shift.clone()) * e.clone().exp() - shift,
                        t.clone(),
                        r1m(radicand),
                    )
                }
                8 => {
                    let radicand =
                        Expr::real(b) * (Expr::one() - e.clone().exp()) * t.clone() + u1m;
                    guards.push(radicand.clone());
                    (
                        (x.clone()
                            + Expr::real(b / 2.0)
                                * t.clone().powi(2)
                                * (Expr::one() - e.clone().exp()))
                            * e.clone().exp(),
                        e.clone().exp() * t.clone(),
                        r1m(radicand),
                    )
                }
                _ => unreachable!(),
            }
        }
        (CaseId::Case4, idx) => {
            // a = lambda (m - 1) / 2
            let a = lam * rf(m - ri(1)) / 2.0;
            let r2m = |base: Expr| base.pow(Num::Rat(ri(2) / (ri(1) - m)));
            let uh = u.clone().pow(Num::Rat((ri(1) - m) / ri(2)));
            match idx {
                6 => {
                    let g = (e.clone().exp() + Expr::int(-1)) * Expr::real(a);
                    let radicand = g.clone() * x.clone() + uh;
                    guards.push(radicand.clone());
                    (
                        e.clone().exp() * x.clone(),
                        (t.clone()
                            + Expr::real(0.5) * g * x.clone().powi(2))
                            * e.clone().exp(),
                        r2m(radicand),
                    )
                }
                7 => {
                    let g = ((Expr::int(2) * e.clone()).exp() + Expr::int(-1)) * Expr::real(a);
                    let radicand = (g.clone() * x.clone() + uh) * (-e.clone()).exp();
                    guards.push(radicand.clone());
                    (
                        e.clone().exp() * x.clone(),
                        t.clone() + Expr::real(0.5) * g * x.clone().powi(2),
                        r2m(radicand),
                    )
                }
                8 => {
                    let radicand = -e.clone() + uh;
                    guards.push(radicand.clone());
                    (
                        x.clone(),
                        t.clone() - e.clone() * x.clone(),
                        r2m(radicand),
                    )
                }
                _ => unreachable!(),
            }
        }
        (CaseId::Case5, 3) => (
            (c(Rat::new(3, 2)) * e.clone()).exp() * x.clone(),
            e.clone().exp() * t.clone(),
            (c(ri(1) / (ri(1) - m)) * e.clone()).exp() * u.clone(),
        ),
        (CaseId::Case6, 3) => (
            (Expr::int(-2) * e.clone()).exp() * x.clone(),
            (Expr::int(-3) * e.clone()).exp() * t.clone(),
            (c(ri(3) / (m - ri(1))) * e.clone()).exp() * u.clone(),
        ),
        (CaseId::Case7, idx) => {
            // w = lambda k
            let w = lam * rf(k);
            let we = Expr::real(w);
            let inv_w = Expr::real(1.0 / w);
            let e_pwt = (we.clone() * t.clone()).exp();
            let e_nwt = (Expr::real(-w) * t.clone()).exp();
            let rk = |base: Expr| base.pow(Num::Rat(ri(1) / k));
            let uk = u.clone().pow(Num::Rat(k));
            match idx {
                3 => {
                    let wfac = Expr::one() - we.clone() * e.clone() * x.clone();
                    let inner = wfac.clone() - e.clone() * uk;
                    guards.push(wfac.clone());
                    guards.push(inner.clone());
                    (
                        x.clone() * wfac.clone().recip(),
                        t.clone() + inv_w.clone() * wfac.clone().ln(),
                        u.clone() * (wfac * inner).pow(Num::Rat(ri(-1) / k)),
                    )
                }
                4 => {
                    let s = we.clone() * e.clone() * x.clone() + e_nwt.clone();
                    let num = Expr::one() + we.clone() * e.clone() * x.clone() * e_pwt.clone();
                    let den = Expr::one() - e.clone() * e_pwt.clone() * uk;
                    guards.push(s.clone());
                    guards.push(num.clone());
                    guards.push(den.clone());
                    (
                        x.clone(),
                        -inv_w.clone() * s.ln(),
                        rk(num * den.recip()) * u.clone(),
                    )
                }
                5 => {
                    let radicand = e.clone() * e_nwt.clone() + uk;
                    guards.push(radicand.clone());
                    (
                        x.clone() - inv_w.clone() * e.clone() * e_nwt.clone(),
                        t.clone(),
                        rk(radicand),
                    )
                }
                6 => (
                    x.clone() * e.clone().exp(),
                    t.clone(),
                    (c(ri(1) / k) * e.clone()).exp() * u.clone(),
                ),
                7 => {
                    let s = e.clone() + e_nwt.clone();
                    let fac = Expr::one() + e.clone() * e_pwt.clone();
                    guards.push(s.clone());
                    guards.push(fac.clone());
                    (x.clone(), -inv_w.clone() * s.ln(), rk(fac) * u.clone())
                }
                8 => {
                    let den = Expr::one() + we.clone() * e.clone() * e_nwt.clone();
                    let s = we.clone() * e.clone() + e_pwt.clone();
                    let radicand = Expr::real(lam * lam * rf(k) * rf(k))
                        * e.clone()
                        * x.clone()
                        * e_nwt.clone()
                        * den.clone().recip()
                        + uk;
                    guards.push(den.clone());
                    guards.push(s.clone());
                    guards.push(radicand.clone());
                    (
                        x.clone() * den.recip(),
                        inv_w.clone() * s.ln(),
                        rk(radicand),
                    )
                }
                _ => unreachable!(),
            }
        }
        _ => unreachable!(),
    };
    Ok(GroupMap {
        case,
        index,
        params: params.clone(),
        x_map: fold(&xm),
        t_map: fold(&tm),
        u_map: fold(&um),
        domain_guard: guards.into_iter().map(|g| fold(&g)).collect(),
    })
}

impl GroupMap {
    /// Apply the transformation to a point, checking the domain guards.
    pub fn apply(&self, p0: (f64, f64, f64), eps: f64) -> Result<(f64, f64, f64), FlowError> {
        let b = Bindings::new()
            .var(Var::X, p0.0)
            .var(Var::T, p0.1)
            .var(Var::U, p0.2)
            .var(Var::Eps, eps);
        for g in &self.domain_guard {
            if evaluate(g, &b)? <= 0.0 {
                return Err(FlowError::Domain(format!(
                    "guard violated for G{} at eps={eps}",
                    self.index
                )));
            }
        }
        Ok((
            evaluate(&self.x_map, &b)?,
            evaluate(&self.t_map, &b)?,
            evaluate(&self.u_map, &b)?,
        ))
    }

    /// True if the point is inside the guard region for this eps.
    pub fn in_domain(&self, p0: (f64, f64, f64), eps: f64) -> bool {
        let b = Bindings::new()
            .var(Var::X, p0.0)
            .var(Var::T, p0.1)
            .var(Var::U, p0.2)
            .var(Var::Eps, eps);
        self.domain_guard
            .iter()
            .all(|g| matches!(evaluate(g, &b), Ok(v) if v > 0.0))
    }
}

/// Numerically integrate the flow of a vector field from p0 for parameter
/// length eps with an adaptive Dormand-Prince integrator (tolerance 1e-11).
pub fn exponentiate(
    field: &VectorField,
    p0: (f64, f64, f64),
    eps: f64,
) -> Result<(f64, f64, f64), FlowError> {
    let f = |_s: f64, y: &[f64; 3], dy: &mut [f64; 3]| -> Result<(), NumericError> {
        let b = Bindings::new()
            .var(Var::X, y[0])
            .var(Var::T, y[1])
            .var(Var::U, y[2]);
        let v = field
            .eval(&b)
            .map_err(|e| NumericError::Domain(e.to_string()))?;
        dy.copy_from_slice(&v);
        Ok(())
    };
    let y = rk45(f, [p0.0, p0.1, p0.2], eps, 1e-11, |y| {
        y.iter().all(|v| v.is_finite())
    })?;
    Ok((y[0], y[1], y[2]))
}

/// Numerically exponentiate generator `index` of a case.
pub fn exponentiate_generator(
    case: CaseId,
    index: usize,
    params: &PdeParams,
    p0: (f64, f64, f64),
    eps: f64,
) -> Result<(f64, f64, f64), FlowError> {
    let gens = generators(case, params)?;
    let field = gens
        .fields
        .get(index.wrapping_sub(1))
        .ok_or(FlowError::UnknownIndex {
            case: case.number(),
            index,
        })?;
    exponentiate(field, p0, eps)
}

/// Max component deviation between G(eps1) . G(eps2) and G(eps1 + eps2)
/// at p0.
pub fn group_law_residual(
    g: &GroupMap,
    eps1: f64,
    eps2: f64,
    p0: (f64, f64, f64),
) -> Result<f64, FlowError> {
    let inner = g.apply(p0, eps2)?;
    let two_step = g.apply(inner, eps1)?;
    let one_step = g.apply(p0, eps1 + eps2)?;
    Ok((two_step.0 - one_step.0)
        .abs()
        .max((two_step.1 - one_step.1).abs())
        .max((two_step.2 - one_step.2).abs()))
}

/// Transform a solution by the group element G(eps): the new solution
/// ubar satisfies ubar(x~, t~) = u~-component of G(eps) at (x, t, phi(x,t)).
/// Implemented symbolically by inverting the u-independent base map via the
/// base components of G at -eps.
pub fn pushforward(
    g: &GroupMap,
    eps: f64,
    sol: &SolutionHandle,
) -> Result<SolutionHandle, FlowError> {
    // Inverse base map: pull (x, t) back along the group.
    let x0 = fold(&substitute(&g.x_map, Var::Eps, &Expr::real(-eps)));
    let t0 = fold(&substitute(&g.t_map, Var::Eps, &Expr::real(-eps)));
    debug_assert!(!x0.depends_on(Var::U) && !t0.depends_on(Var::U));
    let pullback = [(Var::X, x0.clone()), (Var::T, t0.clone())];
    let phi0 = fold(&substitute_all(&sol.expr, &pullback));
    let um = substitute(&g.u_map, Var::Eps, &Expr::real(eps));
    let new_expr = fold(&substitute_all(
        &um,
        &[
            (Var::X, x0.clone()),
            (Var::T, t0.clone()),
            (Var::U, phi0.clone()),
        ],
    ));
    let mut guards: Vec<Expr> = Vec::new();
    // Guards of the map, transported to the new coordinates.
    for gd in &g.domain_guard {
        let gd_eps = substitute(gd, Var::Eps, &Expr::real(eps));
        guards.push(fold(&substitute_all(
            &gd_eps,
            &[
                (Var::X, x0.clone()),
                (Var::T, t0.clone()),
                (Var::U, phi0.clone()),
            ],
        )));
        // The inverse base map itself must stay in its guard region.
        let gd_neg = substitute(gd, Var::Eps, &Expr::real(-eps));
        if !gd_neg.depends_on(Var::U) {
            guards.push(fold(&gd_neg));
        }
    }
    // Guards of the input solution, pulled back.
    for gd in &sol.guards {
        guards.push(fold(&substitute_all(gd, &pullback)));
    }
    let mut eps_history = sol.eps_history.clone();
    eps_history.push((g.index, eps));
    Ok(SolutionHandle {
        expr: new_expr,
        guards,
        eps_history,
    })
}

/// Left fold of pushforward over a chain of (index, eps) steps.
pub fn compose_chain(
    case: CaseId,
    params: &PdeParams,
    steps: &[(usize, f64)],
    seed: &SolutionHandle,
) -> Result<SolutionHandle, FlowError> {
    let mut sol = seed.clone();
    for &(index, eps) in steps {
        let g = group_map(case, index, params)?;
        sol = pushforward(&g, eps, &sol)?;
    }
    Ok(sol)
}
