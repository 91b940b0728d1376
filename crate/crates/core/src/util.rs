//! Numeric kernels shared across modules: adaptive RK45 integration, adaptive
//! Simpson quadrature, hybrid Newton/bisection root finding, and a small dense
//! linear solver for span-coefficient recovery.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum NumericError {
    #[error("integration blow-up: {0}")]
    BlowUp(String),
    #[error("root not bracketed on [{0}, {1}]")]
    RootNotBracketed(f64, f64),
    #[error("singular linear system")]
    Singular,
    #[error("{0}")]
    Domain(String),
}

/// Dormand–Prince 5(4) adaptive step integrator for small fixed-size systems.
/// `f(s, y, dy)` writes the derivative of `y` at flow parameter `s` into `dy`.
/// Returns `y` at `s = s_end`. `guard` is checked after every accepted step;
/// returning false aborts with BlowUp.
pub fn rk45<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N], &mut [f64; N]) -> Result<(), NumericError>,
    y0: [f64; N],
    s_end: f64,
    tol: f64,
    mut guard: impl FnMut(&[f64; N]) -> bool,
) -> Result<[f64; N], NumericError> {
    // Dormand-Prince coefficients
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    if s_end == 0.0 {
        return Ok(y0);
    }
    let dir = s_end.signum();
    let mut s = 0.0f64;
    let mut y = y0;
    let mut h = (s_end.abs() / 16.0).clamp(1e-8, 0.1) * dir;
    let mut k = [[0.0f64; N]; 7];
    let mut steps = 0usize;
    while (s - s_end) * dir < 0.0 {
        if (s + h - s_end) * dir > 0.0 {
            h = s_end - s;
        }
        f(s, &y, &mut k[0])?;
        let mut failed = false;
        for i in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                let a = A[i][j];
                if a != 0.0 {
                    for n in 0..N {
                        yi[n] += h * a * kj[n];
                    }
                }
            }
            let mut ki = [0.0f64; N];
            if f(s + C[i] * h, &yi, &mut ki).is_err() {
                failed = true;
                break;
            }
            k[i + 1] = ki;
        }
        let mut err = 0.0f64;
        let mut y5 = y;
        if !failed {
            for n in 0..N {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for j in 0..7 {
                    d5 += B5[j] * k[j][n];
                    d4 += B4[j] * k[j][n];
                }
                y5[n] += h * d5;
                let sc = 1.0 + y[n].abs().max(y5[n].abs());
                err = err.max((h * (d5 - d4)).abs() / (tol * sc));
            }
        }
        if failed || err > 1.0 {
            h *= if failed { 0.3 } else { (0.9 / err.powf(0.2)).clamp(0.1, 0.5) };
            if h.abs() < 1e-14 {
                return Err(NumericError::BlowUp("step size underflow".into()));
            }
            continue;
        }
        s += h;
        y = y5;
        if !guard(&y) || y.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::BlowUp(format!("guard crossed at s={s}")));
        }
        if err > 1e-30 {
            h *= (0.9 / err.powf(0.2)).clamp(0.2, 5.0);
        } else {
            h *= 5.0;
        }
        steps += 1;
        if steps > 1_000_000 {
            return Err(NumericError::BlowUp("step budget exhausted".into()));
        }
    }
    Ok(y)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(
    f: &mut impl FnMut(f64) -> Result<f64, NumericError>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, NumericError> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &mut impl FnMut(f64) -> Result<f64, NumericError>,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, NumericError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 {
            return Err(NumericError::Domain("quadrature depth exhausted".into()));
        }
        if (left + right - whole).abs() <= 15.0 * tol {
            Ok(left + right + (left + right - whole) / 15.0)
        } else {
            Ok(rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
        }
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let fm = f(0.5 * (a + b))?;
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Root of `f` on a bracketing interval [lo, hi]: bisection with Newton
/// acceleration when a derivative is supplied and the Newton step stays
/// inside the bracket. `f(lo)` and `f(hi)` must have opposite signs.
pub fn hybrid_root(
    f: &mut impl FnMut(f64) -> Result<f64, NumericError>,
    df: Option<&mut dyn FnMut(f64) -> Result<f64, NumericError>>,
    lo: f64,
    hi: f64,
    ftol: f64,
) -> Result<f64, NumericError> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(NumericError::RootNotBracketed(lo, hi));
    }
    let mut x = 0.5 * (lo + hi);
    let mut dfo = df;
    for _ in 0..200 {
        let fx = f(x)?;
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx * flo < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let mut next = 0.5 * (lo + hi);
        if let Some(ref mut d) = dfo {
            if let Ok(dv) = d(x) {
                if dv != 0.0 {
                    let nx = x - fx / dv;
                    if nx > lo && nx < hi {
                        next = nx;
                    }
                }
            }
        }
        if (hi - lo).abs() < 1e-16 * (1.0 + x.abs()) {
            return Ok(x);
        }
        x = next;
    }
    Ok(x)
}

/// Scan [lo, hi] on `n` subintervals for a sign change of `f`, skipping
/// domain-error points, then refine with `hybrid_root`.
pub fn bracket_and_solve(
    f: &mut impl FnMut(f64) -> Result<f64, NumericError>,
    lo: f64,
    hi: f64,
    n: usize,
    ftol: f64,
) -> Result<f64, NumericError> {
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        match f(x) {
            Ok(v) => {
                if v == 0.0 {
                    return Ok(x);
                }
                if let Some((px, pv)) = prev {
                    if pv * v < 0.0 {
                        return hybrid_root(f, None, px, x, ftol);
                    }
                }
                prev = Some((x, v));
            }
            Err(_) => prev = None,
        }
    }
    Err(NumericError::RootNotBracketed(lo, hi))
}

/// Solve the least-squares problem min ||A x - b|| via normal equations with
/// Gaussian elimination (systems here are tiny: <= 8 unknowns).
pub fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, NumericError> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut ata = vec![vec![0.0; cols]; cols];
    let mut atb = vec![0.0; cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut s = 0.0;
            for r in 0..rows {
                s += a[r][i] * a[r][j];
            }
            ata[i][j] = s;
        }
        let mut s = 0.0;
        for r in 0..rows {
            s += a[r][i] * b[r];
        }
        atb[i] = s;
    }
    gauss_solve(&mut ata, &mut atb)?;
    Ok(atb)
}

fn gauss_solve(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<(), NumericError> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() < 1e-12 {
            return Err(NumericError::Singular);
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            for c in col..n {
                m[row][c] -= factor * m[col][c];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for i in 0..n {
        rhs[i] /= m[i][i];
    }
    Ok(())
}
