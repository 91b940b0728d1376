//! PDE family u_t + u^k u_x + lambda u^m = 0 and the seven-case classification
//! of (k, m). Classification is exact rational arithmetic throughout.

use crate::exprcore::{rat, Expr, Num, Rat, Var};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeParams {
    pub lambda: f64,
    pub k: Rat,
    pub m: Rat,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FamilyError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("case mismatch: params classify as {actual:?}, not {requested:?}")]
    CaseMismatch { requested: CaseId, actual: CaseId },
}

impl PdeParams {
    pub fn new(lambda: f64, k: Rat, m: Rat) -> Result<Self, FamilyError> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(FamilyError::InvalidParams("lambda must be nonzero".into()));
        }
        if k == Rat::new(0, 1) {
            return Err(FamilyError::InvalidParams("k must be nonzero".into()));
        }
        Ok(PdeParams { lambda, k, m })
    }
    pub fn k_f64(&self) -> f64 {
        *self.k.numer() as f64 / *self.k.denom() as f64
    }
    pub fn m_f64(&self) -> f64 {
        *self.m.numer() as f64 / *self.m.denom() as f64
    }
    pub fn case(&self) -> CaseId {
        classify(self.k, self.m).expect("k != 0 enforced at construction")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum CaseId {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Case6,
    Case7,
}

impl CaseId {
    pub fn number(self) -> u8 {
        match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
            CaseId::Case3 => 3,
            CaseId::Case4 => 4,
            CaseId::Case5 => 5,
            CaseId::Case6 => 6,
            CaseId::Case7 => 7,
        }
    }
    pub fn from_number(n: u8) -> Option<CaseId> {
        Some(match n {
            1 => CaseId::Case1,
            2 => CaseId::Case2,
            3 => CaseId::Case3,
            4 => CaseId::Case4,
            5 => CaseId::Case5,
            6 => CaseId::Case6,
            7 => CaseId::Case7,
            _ => return None,
        })
    }
    /// Human-readable defining condition (the matched special relation).
    pub fn condition(self) -> &'static str {
        match self {
            CaseId::Case1 => "generic (no special relation)",
            CaseId::Case2 => "k=m-1",
            CaseId::Case3 => "k=1-m",
            CaseId::Case4 => "k=(m-1)/2",
            CaseId::Case5 => "k=(1-m)/2",
            CaseId::Case6 => "k=(m-1)/3",
            CaseId::Case7 => "m=1",
        }
    }
    /// Number of symmetry generators in the catalog for this case.
    pub fn algebra_dim(self) -> usize {
        match self {
            CaseId::Case1 | CaseId::Case5 | CaseId::Case6 => 3,
            _ => 8,
        }
    }
}

/// Exclusive classification of (k, m). m = 1 dominates (all special relations
/// can only meet at m = 1, which is its own case).
pub fn classify(k: Rat, m: Rat) -> Result<CaseId, FamilyError> {
    if k == rat(0, 1) {
        return Err(FamilyError::InvalidParams("k must be nonzero".into()));
    }
    let one = rat(1, 1);
    if m == one {
        return Ok(CaseId::Case7);
    }
    if k == m - one {
        return Ok(CaseId::Case2);
    }
    if k == one - m {
        return Ok(CaseId::Case3);
    }
    if k == (m - one) / rat(2, 1) {
        return Ok(CaseId::Case4);
    }
    if k == (one - m) / rat(2, 1) {
        return Ok(CaseId::Case5);
    }
    if k == (m - one) / rat(3, 1) {
        return Ok(CaseId::Case6);
    }
    Ok(CaseId::Case1)
}

/// Best rational approximation with denominator <= 10^6 (continued fractions).
/// Returns the snapped rational and whether any snapping occurred.
pub fn snap_to_rational(x: f64) -> Result<(Rat, bool), FamilyError> {
    if !x.is_finite() {
        return Err(FamilyError::InvalidParams(format!("non-finite value {x}")));
    }
    const MAX_DEN: i64 = 1_000_000;
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut h0, mut h1) = (1i64, v.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    v -= v.floor();
    for _ in 0..64 {
        if v < 1e-15 {
            break;
        }
        v = 1.0 / v;
        let a = v.floor() as i64;
        v -= v.floor();
        let h2 = match a.checked_mul(h1).and_then(|p| p.checked_add(h0)) {
            Some(h) => h,
            None => break,
        };
        let k2 = match a.checked_mul(k1).and_then(|p| p.checked_add(k0)) {
            Some(k) => k,
            None => break,
        };
        if k2 > MAX_DEN {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    let r = Rat::new(if neg { -h1 } else { h1 }, k1);
    let back = *r.numer() as f64 / *r.denom() as f64;
    Ok((r, (back - x).abs() > 0.0))
}

/// The jet-space residual Delta = u_t + u^k u_x + lambda u^m.
pub fn residual_form(params: &PdeParams) -> Expr {
    Expr::var(Var::Ut)
        + Expr::u().pow(Num::Rat(params.k)) * Expr::var(Var::Ux)
        + Expr::real(params.lambda) * Expr::u().pow(Num::Rat(params.m))
}

/// u_t expressed on-shell: u_t = -(u^k u_x + lambda u^m).
pub fn ut_on_shell(params: &PdeParams) -> Expr {
    -(Expr::u().pow(Num::Rat(params.k)) * Expr::var(Var::Ux)
        + Expr::real(params.lambda) * Expr::u().pow(Num::Rat(params.m)))
}
