//! Independent oracle: semi-analytic method-of-characteristics solver for
//! the initial-value problem u_t + u^k u_x + lambda u^m = 0, u(x, 0) = u0(x).
//!
//! Along a characteristic curve dx/dt = u^k the PDE reduces to the ODE
//! du/dt = -lambda u^m, which has the closed form used throughout this
//! module; x(t) follows from an elementary antiderivative (with an adaptive
//! quadrature crosscheck).

use crate::exprcore::{evaluate, Bindings, Expr, Var};
use crate::family::PdeParams;
use crate::util::{adaptive_simpson, bracket_and_solve, NumericError};

#[derive(Debug, thiserror::Error)]
pub enum MocError {
    #[error("characteristic datum must be positive (u0 = {0})")]
    NonPositiveDatum(f64),
    #[error("characteristic reaches the domain boundary before t = {0}")]
    Extinction(f64),
    #[error("foot map loses monotonicity before requested time {0}")]
    ShockReached(f64),
    #[error("could not bracket the characteristic foot for query ({0}, {1})")]
    BracketFail(f64, f64),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("initial datum evaluation failed at x0 = {0}")]
    DatumEval(f64),
}

/// State of one characteristic: foot point and initial datum.
#[derive(Clone, Copy, Debug)]
pub struct CharacteristicState {
    pub x0: f64,
    pub u0: f64,
}

/// u(t) along the characteristic leaving (x0, 0) with u = u0.
///
/// For m != 1: u = (u0^{1-m} + lambda (m-1) t)^{1/(1-m)}; for m = 1 the
/// damping is linear and u = u0 e^{-lambda t}.
pub fn u_along_characteristic(u0: f64, params: &PdeParams, t: f64) -> Result<f64, MocError> {
    if !(u0 > 0.0) {
        return Err(MocError::NonPositiveDatum(u0));
    }
    let m = params.m_f64();
    if (m - 1.0).abs() < 1e-15 {
        return Ok(u0 * (-params.lambda * t).exp());
    }
    let base = u0.powf(1.0 - m) + params.lambda * (m - 1.0) * t;
    // The base is linear in t, so positivity at both ends covers [0, t].
    if base <= 0.0 {
        return Err(MocError::Extinction(t));
    }
    Ok(base.powf(1.0 / (1.0 - m)))
}

/// x(t) along the same characteristic: x0 + integral of u(s)^k ds, via the
/// closed-form antiderivative.
pub fn x_along_characteristic(
    x0: f64,
    u0: f64,
    params: &PdeParams,
    t: f64,
) -> Result<f64, MocError> {
    if !(u0 > 0.0) {
        return Err(MocError::NonPositiveDatum(u0));
    }
    let k = params.k_f64();
    let m = params.m_f64();
    let lam = params.lambda;
    if (m - 1.0).abs() < 1e-15 {
        // integral of u0^k e^{-lam k s} ds on [0, t].
        return Ok(x0 + u0.powf(k) * (1.0 - (-lam * k * t).exp()) / (lam * k));
    }
    let a = lam * (m - 1.0);
    let b = u0.powf(1.0 - m);
    // End-of-interval domain check (base is linear in s).
    if b + a * t <= 0.0 {
        return Err(MocError::Extinction(t));
    }
    let p = k / (1.0 - m);
    if a.abs() < 1e-300 {
        return Ok(x0 + t * b.powf(p));
    }
    if (p + 1.0).abs() < 1e-12 {
        // k = m - 1: logarithmic antiderivative.
        return Ok(x0 + ((b + a * t).ln() - b.ln()) / a);
    }
    Ok(x0 + ((b + a * t).powf(p + 1.0) - b.powf(p + 1.0)) / (a * (p + 1.0)))
}

/// Quadrature crosscheck of [`x_along_characteristic`] (tol 1e-10).
pub fn x_along_characteristic_quadrature(
    x0: f64,
    u0: f64,
    params: &PdeParams,
    t: f64,
) -> Result<f64, MocError> {
    let k = params.k_f64();
    let mut f = |s: f64| -> Result<f64, NumericError> {
        u_along_characteristic(u0, params, s)
            .map(|u| u.powf(k))
            .map_err(|e| NumericError::Domain(e.to_string()))
    };
    Ok(x0 + adaptive_simpson(&mut f, 0.0, t, 1e-10)?)
}

/// The quantity conserved along characteristics: u^{1-m} - lambda (m-1) t
/// for m != 1, and ln u + lambda t for the linear-damping regime.
pub fn conserved_quantity(u: f64, params: &PdeParams, t: f64) -> f64 {
    let m = params.m_f64();
    if (m - 1.0).abs() < 1e-15 {
        u.ln() + params.lambda * t
    } else {
        u.powf(1.0 - m) - params.lambda * (m - 1.0) * t
    }
}

/// Solution of the initial-value problem at the query points.
#[derive(Clone, Debug)]
pub struct IvpSolution {
    /// (x, t, u) at each query point, in query order.
    pub grid: Vec<(f64, f64, f64)>,
    /// Estimated pre-shock horizon on the sampled foot range.
    pub t_valid: f64,
    pub diagnostics: String,
}

fn datum(u0fn: &Expr, x0: f64) -> Result<f64, MocError> {
    let b = Bindings::new().var(Var::X, x0);
    match evaluate(u0fn, &b) {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(MocError::DatumEval(x0)),
    }
}

/// Solve the IVP with initial datum `u0fn` (an expression in x) at the given
/// query points: find the characteristic foot by bracketed root-finding,
/// then evaluate the closed form along that characteristic.
pub fn solve_ivp(
    u0fn: &Expr,
    params: &PdeParams,
    queries: &[(f64, f64)],
) -> Result<IvpSolution, MocError> {
    let t_max = queries.iter().map(|q| q.1).fold(0.0_f64, f64::max);
    let xs: Vec<f64> = queries.iter().map(|q| q.0).collect();
    let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Shock screening on a generous foot range.
    let foot_range = (x_lo - 5.0, x_hi + 1.0);
    let t_valid = shock_time(u0fn, params, foot_range, (2.0 * t_max).max(1.0))
        .unwrap_or(f64::INFINITY);
    if t_max >= t_valid {
        return Err(MocError::ShockReached(t_valid));
    }

    let mut grid = Vec::with_capacity(queries.len());
    for &(x, t) in queries {
        let mut gap = |x0: f64| -> Result<f64, NumericError> {
            let u0 = datum(u0fn, x0).map_err(|e| NumericError::Domain(e.to_string()))?;
            let xe = x_along_characteristic(x0, u0, params, t)
                .map_err(|e| NumericError::Domain(e.to_string()))?;
            Ok(xe - x)
        };
        // Characteristics move right for positive u, so the foot lies at or
        // left of the query; widen the bracket leftwards as needed.
        let mut lo = x - 1.0;
        let mut found = None;
        for _ in 0..8 {
            match bracket_and_solve(&mut gap, lo, x + 1e-9, 200, 1e-10) {
                Ok(r) => {
                    found = Some(r);
                    break;
                }
                Err(_) => {
                    lo = x - 2.0 * (x - lo);
                }
            }
        }
        let x0 = found.ok_or(MocError::BracketFail(x, t))?;
        let u0 = datum(u0fn, x0)?;
        let u = u_along_characteristic(u0, params, t)?;
        grid.push((x, t, u));
    }
    Ok(IvpSolution {
        grid,
        t_valid,
        diagnostics: format!(
            "{} queries, foot range [{:.3}, {:.3}], t_valid {:.6}",
            queries.len(),
            foot_range.0,
            foot_range.1,
            t_valid
        ),
    })
}

/// First time (on a refinement grid up to `horizon`) at which the foot map
/// x0 -> x(t; x0) stops being strictly increasing on `foot_range`; None when
/// no such time is found.
pub fn shock_time(
    u0fn: &Expr,
    params: &PdeParams,
    foot_range: (f64, f64),
    horizon: f64,
) -> Option<f64> {
    let n_foot = 80;
    let h = (foot_range.1 - foot_range.0) / n_foot as f64;
    let feet: Vec<f64> = (0..=n_foot)
        .map(|i| foot_range.0 + h * i as f64)
        .collect();
    let foot_map_monotone = |t: f64| -> Option<bool> {
        let mut prev: Option<f64> = None;
        for &x0 in &feet {
            let u0 = match datum(u0fn, x0) {
                Ok(v) => v,
                Err(_) => return None,
            };
            let xe = match x_along_characteristic(x0, u0, params, t) {
                Ok(v) => v,
                Err(_) => return None,
            };
            if let Some(p) = prev {
                if xe <= p {
                    return Some(false);
                }
            }
            prev = Some(xe);
        }
        Some(true)
    };
    // Coarse scan, then bisection refinement of the first crossing.
    let n_t = 64;
    let mut bad_t = None;
    for i in 1..=n_t {
        let t = horizon * i as f64 / n_t as f64;
        match foot_map_monotone(t) {
            Some(true) => {}
            Some(false) => {
                bad_t = Some((horizon * (i - 1) as f64 / n_t as f64, t));
                break;
            }
            None => return Some(horizon * (i - 1) as f64 / n_t as f64),
        }
    }
    let (mut lo, mut hi) = bad_t?;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match foot_map_monotone(mid) {
            Some(true) => lo = mid,
            _ => hi = mid,
        }
    }
    Some(0.5 * (lo + hi))
}
