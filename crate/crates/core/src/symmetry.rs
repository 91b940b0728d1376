//! Symmetry generators, first-prolongation checks, Lie brackets, and
//! commutator-table verification for u_t + u^k u_x + lambda u^m = 0.

use crate::exprcore::{
    differentiate, evaluate, fold, rat, Bindings, EvalError, Expr, Num, Rat, Var,
};
use crate::family::{ut_on_shell, CaseId, FamilyError, PdeParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("xi and tau must not depend on u")]
    AnsatzViolation,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("commutator table is only tabulated for cases 2 and 7")]
    NoTable,
}

/// A point vector field xi(x,t,u) d/dx + tau(x,t,u) d/dt + phi(x,t,u) d/du.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub xi: Expr,
    pub tau: Expr,
    pub phi: Expr,
}

impl VectorField {
    pub fn new(xi: Expr, tau: Expr, phi: Expr) -> VectorField {
        VectorField {
            xi: fold(&xi),
            tau: fold(&tau),
            phi: fold(&phi),
        }
    }

    pub fn zero() -> VectorField {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// First-order action X(f) = xi f_x + tau f_t + phi f_u.
    pub fn apply(&self, f: &Expr) -> Expr {
        fold(
            &(self.xi.clone() * differentiate(f, Var::X)
                + self.tau.clone() * differentiate(f, Var::T)
                + self.phi.clone() * differentiate(f, Var::U)),
        )
    }

    /// True when xi and tau are independent of u (the point-symmetry ansatz).
    pub fn is_ansatz(&self) -> bool {
        !self.xi.depends_on(Var::U) && !self.tau.depends_on(Var::U)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.xi.clone() + other.xi.clone(),
            self.tau.clone() + other.tau.clone(),
            self.phi.clone() + other.phi.clone(),
        )
    }

    pub fn scale(&self, c: f64) -> VectorField {
        let ce = Expr::real(c);
        VectorField::new(
            ce.clone() * self.xi.clone(),
            ce.clone() * self.tau.clone(),
            ce * self.phi.clone(),
        )
    }

    pub fn neg(&self) -> VectorField {
        self.scale(-1.0)
    }

    pub fn eval(&self, b: &Bindings) -> Result<[f64; 3], EvalError> {
        Ok([
            evaluate(&self.xi, b)?,
            evaluate(&self.tau, b)?,
            evaluate(&self.phi, b)?,
        ])
    }
}

/// An ordered generator basis for one classification case.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub case: CaseId,
    pub params: PdeParams,
    pub fields: Vec<VectorField>,
}

/// The decomposition data of a field satisfying the ansatz:
/// tau_x = -A, xi_x - tau_t = B, xi_t = C, and
/// phi = (g^2 A + g B + C) / g'  with g = u^k.
#[derive(Clone, Debug)]
pub struct ConsistencyTriple {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    /// Max scaled deviation of phi from its reconstructed form over a small
    /// deterministic sample (0 for exact symmetries of the family).
    pub phi_dev: f64,
}

fn c(r: Rat) -> Expr {
    Expr::num(Num::Rat(r))
}

fn ri(i: i64) -> Rat {
    Rat::from_integer(i)
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The generator list of the given case, parameters substituted.
/// M1 = d/dx and M2 = d/dt always come first.
pub fn generators(case: CaseId, params: &PdeParams) -> Result<GeneratorSet, SymmetryError> {
    let actual = params.case();
    if actual != case {
        return Err(SymmetryError::Family(FamilyError::CaseMismatch {
            requested: case,
            actual,
        }));
    }
    let x = Expr::x();
    let t = Expr::t();
    let u = Expr::u();
    let lam = Expr::real(params.lambda);
    let k = params.k;
    let m = params.m;
    let mut fields = vec![
        VectorField::new(Expr::one(), Expr::zero(), Expr::zero()),
        VectorField::new(Expr::zero(), Expr::one(), Expr::zero()),
    ];
    match case {
        CaseId::Case1 => {
            fields.push(VectorField::new(
                c((k - m + ri(1)) / k) * x,
                c((ri(1) - m) / k) * t,
                c(ri(1) / k) * u,
            ));
        }
        CaseId::Case2 => {
            // k = m - 1; a = lambda (m - 1)
            let a = params.lambda * rat_f64(m - ri(1));
            let ae = Expr::real(a);
            let inv_m1 = c(ri(1) / (m - ri(1)));
            let e_pax = (ae.clone() * x.clone()).exp();
            let e_nax = (Expr::real(-a) * x.clone()).exp();
            fields.push(VectorField::new(
                t.clone(),
                ae.clone() * t.clone().powi(2),
                inv_m1.clone() * u.clone().pow(Num::Rat(ri(2) - m))
                    - Expr::int(2) * lam.clone() * t.clone() * u.clone(),
            ));
            fields.push(VectorField::new(
                t.clone() * e_nax.clone(),
                Expr::zero(),
                (inv_m1.clone() * u.clone().pow(Num::Rat(ri(2) - m))
                    - lam.clone() * t.clone() * u.clone())
                    * e_nax.clone(),
            ));
            fields.push(VectorField::new(
                Expr::zero(),
                Expr::real(-1.0 / a) * e_pax.clone(),
                inv_m1.clone() * u.clone().pow(Num::Rat(m)) * e_pax.clone(),
            ));
            fields.push(VectorField::new(
                Expr::zero(),
                -t.clone(),
                inv_m1.clone() * u.clone(),
            ));
            fields.push(VectorField::new(
                Expr::real(-1.0 / a) * e_nax.clone(),
                Expr::zero(),
                inv_m1.clone() * u.clone() * e_nax,
            ));
            fields.push(VectorField::new(
                e_pax.clone(),
                ae * t.clone() * e_pax.clone(),
                Expr::real(-params.lambda * params.lambda)
                    * c(m - ri(1))
                    * t.clone()
                    * u.clone().pow(Num::Rat(m))
                    * e_pax,
            ));
        }
        CaseId::Case3 => {
            // k = 1 - m; b = lambda (1 - m)
            let b = params.lambda * rat_f64(ri(1) - m);
            let inv = c(ri(1) / (ri(1) - m));
            let um = u.clone().pow(Num::Rat(m));
            let u2m = u.clone().pow(Num::Rat(ri(2) - m));
            fields.push(VectorField::new(
                -x.clone().powi(2) + Expr::real(b * b / 4.0) * t.clone().powi(4),
                -(x.clone() * t.clone() + Expr::real(b / 2.0) * t.clone().powi(3)),
                inv.clone()
                    * (t.clone() * u2m.clone()
                        + (Expr::real(1.5 * b) * t.clone().powi(2) - x.clone()) * u.clone()
                        + Expr::real(b * b) * t.clone().powi(3) * um.clone()),
            ));
            fields.push(VectorField::new(
                Expr::real(3.0 * b) * x.clone() * t.clone()
                    - Expr::real(b * b / 2.0) * t.clone().powi(3),
                Expr::real(1.5 * b) * t.clone().powi(2) - x.clone(),
                inv.clone()
                    * (u2m.clone()
                        + (Expr::real(3.0 * b) * x.clone()
                            - Expr::real(1.5 * b * b) * t.clone().powi(2))
                            * um.clone()),
            ));
            fields.push(VectorField::new(
                Expr::real(b / 2.0) * t.clone().powi(3) - x.clone() * t.clone(),
                -t.clone().powi(2),
                inv.clone()
                    * (t.clone() * u.clone()
                        + (Expr::real(1.5 * b) * t.clone().powi(2) - x.clone()) * um.clone()),
            ));
            fields.push(VectorField::new(
                t.clone(),
                Expr::zero(),
                inv.clone() * um.clone(),
            ));
            fields.push(VectorField::new(
                x.clone() + Expr::real(b / 2.0) * t.clone().powi(2),
                Expr::zero(),
                inv.clone() * (u.clone() + Expr::real(b) * t.clone() * um.clone()),
            ));
            fields.push(VectorField::new(
                x.clone() - Expr::real(b / 2.0) * t.clone().powi(2),
                t.clone(),
                -lam.clone() * t.clone() * um,
            ));
        }
        CaseId::Case4 => {
            // k = (m - 1)/2; b = lambda (m - 1)
            let b = params.lambda * rat_f64(m - ri(1));
            let two = c(ri(2) / (m - ri(1)));
            let up = u.clone().pow(Num::Rat((m + ri(1)) / ri(2)));
            let uq = u.clone().pow(Num::Rat((ri(3) - m) / ri(2)));
            fields.push(VectorField::new(
                x.clone() * t.clone() - Expr::real(b / 4.0) * x.clone().powi(3),
                t.clone().powi(2) - Expr::real(b * b / 16.0) * x.clone().powi(4),
                two.clone()
                    * (Expr::real(b * b / 4.0) * x.clone().powi(3) * up.clone()
                        - (t.clone() + Expr::real(0.75 * b) * x.clone().powi(2)) * u.clone()
                        + x.clone() * uq.clone()),
            ));
            fields.push(VectorField::new(
                t.clone() - Expr::real(0.75 * b) * x.clone().powi(2),
                Expr::real(-b * b / 4.0) * x.clone().powi(3),
                two.clone()
                    * (Expr::real(0.75 * b * b) * x.clone().powi(2) * up.clone()
                        - Expr::real(1.5 * b) * x.clone() * u.clone()
                        + uq.clone()),
            ));
            fields.push(VectorField::new(
                -x.clone().powi(2),
                -(x.clone() * t.clone() + Expr::real(b / 4.0) * x.clone().powi(3)),
                two.clone()
                    * ((t.clone() + Expr::real(0.75 * b) * x.clone().powi(2)) * up.clone()
                        - x.clone() * u.clone()),
            ));
            fields.push(VectorField::new(
                x.clone(),
                t.clone() + Expr::real(b / 4.0) * x.clone().powi(2),
                -lam.clone() * x.clone() * up.clone(),
            ));
            fields.push(VectorField::new(
                x.clone(),
                Expr::real(b / 2.0) * x.clone().powi(2),
                two.clone() * (u.clone() - Expr::real(b) * x.clone() * up.clone()),
            ));
            fields.push(VectorField::new(Expr::zero(), -x.clone(), two * up));
        }
        CaseId::Case5 => {
            fields.push(VectorField::new(
                c(rat(3, 2)) * x,
                t,
                c(ri(1) / (ri(1) - m)) * u,
            ));
        }
        CaseId::Case6 => {
            fields.push(VectorField::new(
                Expr::int(-2) * x,
                Expr::int(-3) * t,
                c(ri(3) / (m - ri(1))) * u,
            ));
        }
        CaseId::Case7 => {
            // m = 1; w = lambda k
            let w = params.lambda * rat_f64(k);
            let inv_k = c(ri(1) / k);
            let e_pwt = (Expr::real(w) * t.clone()).exp();
            let e_nwt = (Expr::real(-w) * t.clone()).exp();
            let uk1 = u.clone().pow(Num::Rat(k + ri(1)));
            let u1k = u.clone().pow(Num::Rat(ri(1) - k));
            fields.push(VectorField::new(
                Expr::real(w) * x.clone().powi(2),
                -x.clone(),
                inv_k.clone() * (uk1.clone() + Expr::real(2.0 * w) * x.clone() * u.clone()),
            ));
            fields.push(VectorField::new(
                Expr::zero(),
                -x.clone() * e_pwt.clone(),
                inv_k.clone()
                    * (uk1 + Expr::real(w) * x.clone() * u.clone())
                    * e_pwt.clone(),
            ));
            fields.push(VectorField::new(
                Expr::real(-1.0 / w) * e_nwt.clone(),
                Expr::zero(),
                inv_k.clone() * u1k.clone() * e_nwt.clone(),
            ));
            fields.push(VectorField::new(
                x.clone(),
                Expr::zero(),
                inv_k.clone() * u.clone(),
            ));
            fields.push(VectorField::new(
                Expr::zero(),
                Expr::real(-1.0 / w) * e_pwt.clone(),
                inv_k * u.clone() * e_pwt,
            ));
            fields.push(VectorField::new(
                Expr::real(-w) * x.clone() * e_nwt.clone(),
                e_nwt.clone(),
                Expr::real(params.lambda * params.lambda) * c(k) * x.clone() * u1k * e_nwt,
            ));
        }
    }
    debug_assert_eq!(fields.len(), case.algebra_dim());
    Ok(GeneratorSet {
        case,
        params: params.clone(),
        fields,
    })
}

fn state_bindings(params: &PdeParams, x: f64, t: f64, u: f64) -> Bindings {
    let _ = params;
    Bindings::new().var(Var::X, x).var(Var::T, t).var(Var::U, u)
}

/// Value of the first prolongation of X applied to Delta = u_t + u^k u_x +
/// lambda u^m, with u_t eliminated on-shell. Vanishes iff X is a symmetry
/// at that state.
pub fn prolongation_residual(
    x_field: &VectorField,
    params: &PdeParams,
    state: (f64, f64, f64, f64),
) -> Result<f64, SymmetryError> {
    let (xi, tau, phi) = (&x_field.xi, &x_field.tau, &x_field.phi);
    let ux = Expr::var(Var::Ux);
    let ut = Expr::var(Var::Ut);
    let d = |f: &Expr, v: Var| differentiate(f, v);
    // eta^x and eta^t from the first-prolongation formulas.
    let eta_x = d(phi, Var::X)
        + (d(phi, Var::U) - d(xi, Var::X)) * ux.clone()
        - d(tau, Var::X) * ut.clone()
        - d(xi, Var::U) * ux.clone().powi(2)
        - d(tau, Var::U) * ux.clone() * ut.clone();
    let eta_t = d(phi, Var::T) - d(xi, Var::T) * ux.clone()
        + (d(phi, Var::U) - d(tau, Var::T)) * ut.clone()
        - d(xi, Var::U) * ux.clone() * ut.clone()
        - d(tau, Var::U) * ut.clone().powi(2);
    // Partials of Delta: d/du = k u^{k-1} u_x + lambda m u^{m-1}; d/du_x = u^k;
    // d/du_t = 1.
    let u = Expr::u();
    let k = params.k;
    let m = params.m;
    let ddu = c(k) * u.clone().pow(Num::Rat(k - ri(1))) * ux.clone()
        + Expr::real(params.lambda) * c(m) * u.clone().pow(Num::Rat(m - ri(1)));
    let ddux = u.clone().pow(Num::Rat(k));
    let res = phi.clone() * ddu + eta_x * ddux + eta_t;
    // On-shell elimination of u_t.
    let res = crate::exprcore::substitute(&fold(&res), Var::Ut, &ut_on_shell(params));
    let (sx, st, su, sux) = state;
    let b = state_bindings(params, sx, st, su).var(Var::Ux, sux);
    Ok(evaluate(&fold(&res), &b)?)
}

/// Scale 1 + max(|u_t|, |u^k u_x|, |lambda u^m|) for relative residual
/// comparison at a state.
pub fn residual_scale(params: &PdeParams, state: (f64, f64, f64, f64)) -> f64 {
    let (_, _, u, ux) = state;
    let adv = u.powf(params.k_f64()) * ux;
    let damp = params.lambda * u.powf(params.m_f64());
    let ut = -(adv + damp);
    1.0 + ut.abs().max(adv.abs()).max(damp.abs())
}

/// The two determining-equation values at a state (both vanish for true
/// ansatz symmetries).
pub fn determining_residuals(
    x_field: &VectorField,
    params: &PdeParams,
    state: (f64, f64, f64),
) -> Result<(f64, f64), SymmetryError> {
    if !x_field.is_ansatz() {
        return Err(SymmetryError::AnsatzViolation);
    }
    let (e36, e37) = determining_exprs(x_field, params);
    let b = state_bindings(params, state.0, state.1, state.2);
    Ok((evaluate(&e36, &b)?, evaluate(&e37, &b)?))
}

/// Symbolic forms of the two determining equations for an ansatz field.
pub fn determining_exprs(x_field: &VectorField, params: &PdeParams) -> (Expr, Expr) {
    let (xi, tau, phi) = (&x_field.xi, &x_field.tau, &x_field.phi);
    let u = Expr::u();
    let lam = Expr::real(params.lambda);
    let g = u.clone().pow(Num::Rat(params.k));
    let h = u.clone().pow(Num::Rat(params.m));
    let gp = differentiate(&g, Var::U);
    let hp = differentiate(&h, Var::U);
    let d = |f: &Expr, v: Var| differentiate(f, v);
    let e36 = lam.clone() * hp * phi.clone()
        + lam.clone() * h.clone() * d(tau, Var::T)
        + lam.clone() * g.clone() * h.clone() * d(tau, Var::X)
        - lam * h * d(phi, Var::U)
        + d(phi, Var::T)
        + g.clone() * d(phi, Var::X);
    let e37 = gp * phi.clone() - d(xi, Var::T) - g.clone() * d(xi, Var::X)
        + g.clone() * d(tau, Var::T)
        + g.clone().powi(2) * d(tau, Var::X);
    (fold(&e36), fold(&e37))
}

/// Decompose an ansatz field into its consistency data A = -tau_x,
/// B = xi_x - tau_t, C = xi_t, and check phi = (g^2 A + g B + C)/g' at a
/// small deterministic sample of states.
pub fn consistency_decompose(
    x_field: &VectorField,
    params: &PdeParams,
) -> Result<ConsistencyTriple, SymmetryError> {
    if !x_field.is_ansatz() {
        return Err(SymmetryError::AnsatzViolation);
    }
    let a = fold(&(-differentiate(&x_field.tau, Var::X)));
    let b = fold(
        &(differentiate(&x_field.xi, Var::X) - differentiate(&x_field.tau, Var::T)),
    );
    let cc = fold(&differentiate(&x_field.xi, Var::T));
    // Reconstruct phi from (38): phi = (g^2 A + g B + C)/g', g = u^k.
    let u = Expr::u();
    let g = u.clone().pow(Num::Rat(params.k));
    let gp = differentiate(&g, Var::U);
    let recon = fold(
        &((g.clone().powi(2) * a.clone() + g * b.clone() + cc.clone()) * gp.recip()),
    );
    let mut phi_dev: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..25 {
        let sx = rng.gen_range(0.1..2.0);
        let st = rng.gen_range(0.1..2.0);
        let su = rng.gen_range(0.5..2.0);
        let bind = state_bindings(params, sx, st, su);
        let want = evaluate(&recon, &bind)?;
        let got = evaluate(&x_field.phi, &bind)?;
        phi_dev = phi_dev.max((got - want).abs() / (1.0 + want.abs()));
    }
    Ok(ConsistencyTriple {
        a,
        b,
        c: cc,
        phi_dev,
    })
}

/// Componentwise Lie bracket [X, Y]_i = X(Y_i) - Y(X_i).
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField::new(
        x.apply(&y.xi) + (-y.apply(&x.xi)),
        x.apply(&y.tau) + (-y.apply(&x.tau)),
        x.apply(&y.phi) + (-y.apply(&x.phi)),
    )
}

/// One cell of the expected commutator table: [M_i, M_j] = sum coeff * M_idx.
#[derive(Clone, Debug)]
pub struct CellSpec {
    pub terms: Vec<(f64, usize)>,
    pub label: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableCell {
    pub i: usize,
    pub j: usize,
    pub expected: String,
    #[serde(rename = "match")]
    pub matched: bool,
    pub max_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub case: u8,
    pub params: TableParams,
    /// Meaning of the coefficient symbol "a" in the expected strings.
    pub a_def: String,
    pub cells: Vec<TableCell>,
    pub all_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableParams {
    pub lambda: f64,
    pub k: String,
    pub m: String,
}

fn coeff_label(cf: f64, a: f64) -> String {
    let close = |v: f64| (cf - v).abs() <= 1e-12 * (1.0 + v.abs());
    if close(1.0) {
        String::new()
    } else if close(-1.0) {
        "-".into()
    } else if close(2.0) {
        "2*".into()
    } else if close(-2.0) {
        "-2*".into()
    } else if close(a) {
        "a*".into()
    } else if close(-a) {
        "-a*".into()
    } else if close(2.0 * a) {
        "2*a*".into()
    } else if close(-2.0 * a) {
        "-2*a*".into()
    } else if close(a * a) {
        "a^2*".into()
    } else if close(-a * a) {
        "-a^2*".into()
    } else if close(1.0 / a) {
        "(1/a)*".into()
    } else if close(-1.0 / a) {
        "-(1/a)*".into()
    } else {
        format!("{}*", cf)
    }
}

fn render_label(terms: &[(f64, usize)], a: f64) -> String {
    let mut parts = Vec::new();
    for &(cf, idx) in terms {
        if cf == 0.0 {
            continue;
        }
        parts.push(format!("{}M{}", coeff_label(cf, a), idx));
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

/// The expected commutator table of Case 2 or Case 7 as an 8x8 grid of
/// linear combinations. With `as_printed` the single deviating Case 7 cell
/// ([M3, M5] and its antisymmetric partner) carries the tabulated
/// coefficient instead of the verified one.
pub fn commutator_table_spec(
    case: CaseId,
    params: &PdeParams,
    as_printed: bool,
) -> Result<(Vec<Vec<CellSpec>>, f64), SymmetryError> {
    let m = params.m;
    let k = params.k;
    let (a, upper): (f64, Vec<((usize, usize), Vec<(f64, usize)>)>) = match case {
        CaseId::Case2 => {
            let a = params.lambda * rat_f64(m - ri(1));
            (
                a,
                vec![
                    ((1, 4), vec![(-a, 4)]),
                    ((1, 5), vec![(a, 5)]),
                    ((1, 7), vec![(-a, 7)]),
                    ((1, 8), vec![(a, 8)]),
                    ((2, 3), vec![(1.0, 1), (-2.0 * a, 6)]),
                    ((2, 4), vec![(-a, 7)]),
                    ((2, 6), vec![(-1.0, 2)]),
                    ((2, 8), vec![(-a * a, 5)]),
                    ((3, 5), vec![(1.0 / a, 8)]),
                    ((3, 6), vec![(1.0, 3)]),
                    ((3, 7), vec![(1.0, 4)]),
                    ((4, 5), vec![(1.0 / a, 1), (1.0, 6)]),
                    ((4, 6), vec![(1.0, 4)]),
                    ((4, 8), vec![(a, 3)]),
                    ((5, 6), vec![(-1.0, 5)]),
                    ((5, 7), vec![(-1.0 / a, 2)]),
                    ((7, 8), vec![(a, 6), (-2.0, 1)]),
                ],
            )
        }
        CaseId::Case7 => {
            let a = params.lambda * rat_f64(k);
            let m3m5 = if as_printed {
                vec![(-1.0, 8)]
            } else {
                vec![(-1.0 / a, 8)]
            };
            (
                a,
                vec![
                    ((1, 3), vec![(-1.0, 2), (2.0 * a, 6)]),
                    ((1, 4), vec![(a, 7)]),
                    ((1, 6), vec![(1.0, 1)]),
                    ((1, 8), vec![(a * a, 5)]),
                    ((2, 4), vec![(a, 4)]),
                    ((2, 5), vec![(-a, 5)]),
                    ((2, 7), vec![(a, 7)]),
                    ((2, 8), vec![(-a, 8)]),
                    ((3, 5), m3m5),
                    ((3, 6), vec![(-1.0, 3)]),
                    ((3, 7), vec![(-1.0, 4)]),
                    ((4, 5), vec![(-1.0 / a, 2), (-1.0, 6)]),
                    ((4, 6), vec![(-1.0, 4)]),
                    ((4, 8), vec![(-a, 3)]),
                    ((5, 6), vec![(1.0, 5)]),
                    ((5, 7), vec![(1.0 / a, 1)]),
                    ((7, 8), vec![(2.0, 2), (-a, 6)]),
                ],
            )
        }
        _ => return Err(SymmetryError::NoTable),
    };
    let mut grid: Vec<Vec<CellSpec>> = (0..8)
        .map(|_| {
            (0..8)
                .map(|_| CellSpec {
                    terms: Vec::new(),
                    label: "0".into(),
                })
                .collect()
        })
        .collect();
    for ((i, j), terms) in upper {
        let neg: Vec<(f64, usize)> = terms.iter().map(|&(cf, idx)| (-cf, idx)).collect();
        grid[i - 1][j - 1] = CellSpec {
            label: render_label(&terms, a),
            terms,
        };
        grid[j - 1][i - 1] = CellSpec {
            label: render_label(&neg, a),
            terms: neg,
        };
    }
    Ok((grid, a))
}

/// Verify the printed 8x8 commutator table of Case 2 or Case 7 against
/// symbolically computed brackets, sampling coefficient functions at
/// `n_samples` (>= 50 recommended) random states. With `as_printed` the
/// tabulated Case 7 [M3, M5] cell is used instead of the verified one.
pub fn verify_commutator_table(
    case: CaseId,
    params: &PdeParams,
    tol: f64,
    n_samples: usize,
    seed: u64,
    as_printed: bool,
) -> Result<TableReport, SymmetryError> {
    let gens = generators(case, params)?;
    let (grid, _a) = commutator_table_spec(case, params, as_printed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64, f64)> = (0..n_samples.max(1))
        .map(|_| {
            (
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..2.0),
            )
        })
        .collect();
    let mut cells = Vec::with_capacity(64);
    let mut all_match = true;
    for i in 0..8 {
        for j in 0..8 {
            let br = lie_bracket(&gens.fields[i], &gens.fields[j]);
            let mut expected = VectorField::zero();
            for &(cf, idx) in &grid[i][j].terms {
                expected = expected.add(&gens.fields[idx - 1].scale(cf));
            }
            let mut max_dev: f64 = 0.0;
            for &(sx, st, su) in &points {
                let b = state_bindings(params, sx, st, su);
                let got = br.eval(&b)?;
                let want = expected.eval(&b)?;
                for c in 0..3 {
                    let dev = (got[c] - want[c]).abs() / (1.0 + want[c].abs());
                    max_dev = max_dev.max(dev);
                }
            }
            let matched = max_dev <= tol;
            all_match &= matched;
            cells.push(TableCell {
                i: i + 1,
                j: j + 1,
                expected: grid[i][j].label.clone(),
                matched,
                max_dev,
            });
        }
    }
    Ok(TableReport {
        case: case.number(),
        params: TableParams {
            lambda: params.lambda,
            k: params.k.to_string(),
            m: params.m.to_string(),
        },
        a_def: match case {
            CaseId::Case2 => "a = lambda*(m-1)".into(),
            _ => "a = lambda*k".into(),
        },
        cells,
        all_match,
    })
}

/// Max scaled deviation of the Jacobi identity [[X,Y],Z] + [[Y,Z],X] +
/// [[Z,X],Y] = 0 over sampled states.
pub fn jacobi_deviation(
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    params: &PdeParams,
    n_samples: usize,
    seed: u64,
) -> Result<f64, SymmetryError> {
    let s = lie_bracket(&lie_bracket(x, y), z)
        .add(&lie_bracket(&lie_bracket(y, z), x))
        .add(&lie_bracket(&lie_bracket(z, x), y));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..n_samples {
        let b = state_bindings(
            params,
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.5..2.0),
        );
        let v = s.eval(&b)?;
        for c in 0..3 {
            max_dev = max_dev.max(v[c].abs());
        }
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::classify;

    fn p(lambda: f64, k: (i64, i64), m: (i64, i64)) -> PdeParams {
        PdeParams::new(lambda, rat(k.0, k.1), rat(m.0, m.1)).unwrap()
    }

    fn all_case_params() -> Vec<(CaseId, PdeParams)> {
        vec![
            (CaseId::Case1, p(1.0, (5, 1), (2, 1))),
            (CaseId::Case1, p(0.7, (2, 1), (2, 1))),
            (CaseId::Case2, p(1.0, (1, 1), (2, 1))),
            (CaseId::Case2, p(1.3, (2, 1), (3, 1))),
            (CaseId::Case3, p(1.0, (-1, 1), (2, 1))),
            (CaseId::Case3, p(0.8, (1, 2), (1, 2))),
            (CaseId::Case4, p(1.0, (1, 1), (3, 1))),
            (CaseId::Case4, p(1.1, (-1, 1), (-1, 1))),
            (CaseId::Case5, p(1.0, (-1, 1), (3, 1))),
            (CaseId::Case5, p(0.9, (-1, 2), (2, 1))),
            (CaseId::Case6, p(1.0, (2, 3), (3, 1))),
            (CaseId::Case6, p(1.2, (1, 3), (2, 1))),
            (CaseId::Case7, p(1.0, (1, 1), (1, 1))),
            (CaseId::Case7, p(0.6, (2, 1), (1, 1))),
        ]
    }

    fn eval_field(f: &VectorField, x: f64, t: f64, u: f64) -> [f64; 3] {
        let b = Bindings::new().var(Var::X, x).var(Var::T, t).var(Var::U, u);
        f.eval(&b).unwrap()
    }

    #[test]
    fn pinned_generator_entries() {
        // Case 1, (lambda=1, k=5, m=2): M3 = ((4/5)x, (-1/5)t, (1/5)u).
        let g = generators(CaseId::Case1, &p(1.0, (5, 1), (2, 1))).unwrap();
        let v = eval_field(&g.fields[2], 1.0, 1.0, 1.0);
        assert!((v[0] - 0.8).abs() < 1e-14);
        assert!((v[1] + 0.2).abs() < 1e-14);
        assert!((v[2] - 0.2).abs() < 1e-14);
        // Case 7, (lambda=1, k=2, m=1): M6 = (x, 0, u/2).
        let g = generators(CaseId::Case7, &p(1.0, (2, 1), (1, 1))).unwrap();
        let v = eval_field(&g.fields[5], 1.5, 0.3, 2.0);
        assert!((v[0] - 1.5).abs() < 1e-14);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 1.0).abs() < 1e-14);
        // Case 2, (lambda=1, k=1, m=2): M6 = (0, -t, u).
        let g = generators(CaseId::Case2, &p(1.0, (1, 1), (2, 1))).unwrap();
        let v = eval_field(&g.fields[5], 0.4, 0.7, 1.3);
        assert_eq!(v[0], 0.0);
        assert!((v[1] + 0.7).abs() < 1e-14);
        assert!((v[2] - 1.3).abs() < 1e-14);
    }

    #[test]
    fn case_mismatch_is_rejected() {
        let err = generators(CaseId::Case2, &p(1.0, (5, 1), (2, 1))).unwrap_err();
        assert!(matches!(
            err,
            SymmetryError::Family(FamilyError::CaseMismatch { .. })
        ));
    }

    #[test]
    fn all_catalog_generators_are_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (case, params) in all_case_params() {
            assert_eq!(classify(params.k, params.m).unwrap(), case);
            let gens = generators(case, &params).unwrap();
            for (gi, f) in gens.fields.iter().enumerate() {
                assert!(f.is_ansatz());
                for _ in 0..40 {
                    let state = (
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.5..2.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    let r = prolongation_residual(f, &params, state).unwrap();
                    let s = residual_scale(&params, state);
                    assert!(
                        r.abs() <= 1e-9 * s,
                        "case {:?} M{} residual {} at {:?}",
                        case,
                        gi + 1,
                        r,
                        state
                    );
                    let (e36, e37) =
                        determining_residuals(f, &params, (state.0, state.1, state.2)).unwrap();
                    assert!(e36.abs() <= 1e-9 * s && e37.abs() <= 1e-9 * s);
                }
            }
        }
    }

    #[test]
    fn perturbed_field_fails_prolongation() {
        let params = p(1.0, (5, 1), (2, 1));
        let g = generators(CaseId::Case1, &params).unwrap();
        let m3 = &g.fields[2];
        let bad = VectorField::new(
            m3.xi.clone() + Expr::x().powi(2),
            m3.tau.clone(),
            m3.phi.clone(),
        );
        let r = prolongation_residual(&bad, &params, (0.7, 0.3, 1.4, 0.2)).unwrap();
        assert!(r.abs() > 1e-4);
        // (0,0,u) is not a symmetry for Case 1 parameters.
        let nonsym = VectorField::new(Expr::zero(), Expr::zero(), Expr::u());
        let (e36, e37) = determining_residuals(&nonsym, &params, (0.7, 0.3, 1.4)).unwrap();
        assert!(e36.abs() > 1e-4 || e37.abs() > 1e-4);
    }

    #[test]
    fn ansatz_violation_detected() {
        let bad = VectorField::new(Expr::u(), Expr::zero(), Expr::zero());
        let params = p(1.0, (5, 1), (2, 1));
        assert!(matches!(
            determining_residuals(&bad, &params, (1.0, 1.0, 1.0)),
            Err(SymmetryError::AnsatzViolation)
        ));
        assert!(matches!(
            consistency_decompose(&bad, &params),
            Err(SymmetryError::AnsatzViolation)
        ));
    }

    #[test]
    fn consistency_triples() {
        // Case 1 M3: A = 0, B = (k-m+1)/k - (1-m)/k = const, C = 0.
        let params = p(1.0, (5, 1), (2, 1));
        let g = generators(CaseId::Case1, &params).unwrap();
        let tr = consistency_decompose(&g.fields[2], &params).unwrap();
        assert!(tr.a.is_zero_expr());
        assert!(tr.c.is_zero_expr());
        let b = Bindings::new().var(Var::X, 1.0).var(Var::T, 1.0).var(Var::U, 1.0);
        assert!((evaluate(&tr.b, &b).unwrap() - (0.8 - (-0.2))).abs() < 1e-14);
        assert!(tr.phi_dev < 1e-10);
        // M1 -> (0, 0, 0).
        let tr = consistency_decompose(&g.fields[0], &params).unwrap();
        assert!(tr.a.is_zero_expr() && tr.b.is_zero_expr() && tr.c.is_zero_expr());
        // Case 7 M3 = (lambda k x^2, -x, ...): A = 1, B = 2 lambda k x, C = 0.
        let params = p(1.0, (2, 1), (1, 1));
        let g = generators(CaseId::Case7, &params).unwrap();
        let tr = consistency_decompose(&g.fields[2], &params).unwrap();
        let b = Bindings::new().var(Var::X, 0.9).var(Var::T, 0.4).var(Var::U, 1.0);
        assert!((evaluate(&tr.a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!((evaluate(&tr.b, &b).unwrap() - 2.0 * 2.0 * 0.9).abs() < 1e-14);
        assert!(evaluate(&tr.c, &b).unwrap().abs() < 1e-14);
        assert!(tr.phi_dev < 1e-10);
    }

    fn fields_close(a: &VectorField, b: &VectorField, params: &PdeParams) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let bind = state_bindings(
                params,
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..2.0),
            );
            let va = a.eval(&bind).unwrap();
            let vb = b.eval(&bind).unwrap();
            for c in 0..3 {
                if (va[c] - vb[c]).abs() > 1e-9 * (1.0 + vb[c].abs()) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn pinned_brackets() {
        for (case, params) in all_case_params() {
            let g = generators(case, &params).unwrap();
            // [M1, M2] = 0 in every case.
            let br = lie_bracket(&g.fields[0], &g.fields[1]);
            assert!(fields_close(&br, &VectorField::zero(), &params));
        }
        // Case 2: [M2, M6] = -M2.
        let params = p(1.0, (1, 1), (2, 1));
        let g = generators(CaseId::Case2, &params).unwrap();
        let br = lie_bracket(&g.fields[1], &g.fields[5]);
        assert!(fields_close(&br, &g.fields[1].neg(), &params));
        // Case 7: [M1, M3] = -(M2 - 2 lambda k M6).
        let params = p(1.0, (2, 1), (1, 1));
        let g = generators(CaseId::Case7, &params).unwrap();
        let br = lie_bracket(&g.fields[0], &g.fields[2]);
        let want = g.fields[1].neg().add(&g.fields[5].scale(2.0 * 2.0));
        assert!(fields_close(&br, &want, &params));
    }

    #[test]
    fn commutator_tables_verify() {
        for (case, params) in [
            (CaseId::Case2, p(1.0, (1, 1), (2, 1))),
            (CaseId::Case2, p(1.3, (2, 1), (3, 1))),
            (CaseId::Case7, p(1.0, (2, 1), (1, 1))),
            (CaseId::Case7, p(0.6, (1, 1), (1, 1))),
        ] {
            let rep = verify_commutator_table(case, &params, 1e-9, 50, 0, false).unwrap();
            assert_eq!(rep.cells.len(), 64);
            assert!(
                rep.all_match,
                "case {:?}: {:?}",
                case,
                rep.cells.iter().filter(|c| !c.matched).collect::<Vec<_>>()
            );
        }
        // The tabulated Case 7 [M3, M5] cell deviates from the computed bracket.
        let params = p(1.0, (2, 1), (1, 1));
        let rep = verify_commutator_table(CaseId::Case7, &params, 1e-9, 50, 0, true).unwrap();
        let bad: Vec<_> = rep.cells.iter().filter(|c| !c.matched).collect();
        assert_eq!(bad.len(), 2);
        assert!(bad.iter().all(|c| (c.i, c.j) == (3, 5) || (c.i, c.j) == (5, 3)));
    }

    #[test]
    fn table_antisymmetry_and_diagonal() {
        let params = p(1.0, (1, 1), (2, 1));
        let g = generators(CaseId::Case2, &params).unwrap();
        for i in 0..8 {
            let d = lie_bracket(&g.fields[i], &g.fields[i]);
            assert!(fields_close(&d, &VectorField::zero(), &params));
            for j in 0..8 {
                let a = lie_bracket(&g.fields[i], &g.fields[j]);
                let b = lie_bracket(&g.fields[j], &g.fields[i]).neg();
                assert!(fields_close(&a, &b, &params));
            }
        }
    }

    #[test]
    fn jacobi_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (case, params) in all_case_params() {
            let g = generators(case, &params).unwrap();
            let n = g.fields.len();
            for _ in 0..4 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let kk = rng.gen_range(0..n);
                let dev = jacobi_deviation(
                    &g.fields[i],
                    &g.fields[j],
                    &g.fields[kk],
                    &params,
                    20,
                    11,
                )
                .unwrap();
                assert!(dev <= 1e-8, "case {:?} ({},{},{}): {}", case, i, j, kk, dev);
            }
        }
    }

    #[test]
    fn bracket_closure_by_least_squares() {
        use crate::util::least_squares;
        // Every bracket of Case 7 generators lies in the span of M1..M8.
        let params = p(1.0, (2, 1), (1, 1));
        let g = generators(CaseId::Case7, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(f64, f64, f64)> = (0..40)
            .map(|_| {
                (
                    rng.gen_range(0.1..2.0),
                    rng.gen_range(0.1..2.0),
                    rng.gen_range(0.5..2.0),
                )
            })
            .collect();
        for i in 0..8 {
            for j in 0..8 {
                let br = lie_bracket(&g.fields[i], &g.fields[j]);
                let mut rows = Vec::new();
                let mut rhs = Vec::new();
                for &(sx, st, su) in &pts {
                    let b = state_bindings(&params, sx, st, su);
                    let bv = br.eval(&b).unwrap();
                    for c in 0..3 {
                        let mut row = Vec::with_capacity(8);
                        for f in &g.fields {
                            row.push(f.eval(&b).unwrap()[c]);
                        }
                        rows.push(row);
                        rhs.push(bv[c]);
                    }
                }
                let coeffs = least_squares(&rows, &rhs).unwrap();
                // Residual of the fit must be tiny.
                let mut max_res: f64 = 0.0;
                for (row, &y) in rows.iter().zip(rhs.iter()) {
                    let fit: f64 = row.iter().zip(coeffs.iter()).map(|(a, c)| a * c).sum();
                    max_res = max_res.max((fit - y).abs() / (1.0 + y.abs()));
                }
                assert!(max_res <= 1e-8, "[M{},M{}] span residual {}", i + 1, j + 1, max_res);
            }
        }
    }
}
