//! Small numerical kernels: an embedded Runge–Kutta integrator for the
//! autonomous wave-curve ODEs, a bracketing root finder and Gauss–Legendre
//! rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec4 = [f64; 4];

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-12,
            rtol: 1e-12,
            max_steps: 100_000,
        }
    }
}

fn axpy(y: &Vec4, h: f64, ks: &[Vec4], coef: &[f64]) -> Vec4 {
    let mut out = *y;
    for (k, &a) in ks.iter().zip(coef) {
        if a != 0.0 {
            for i in 0..4 {
                out[i] += h * a * k[i];
            }
        }
    }
    out
}

/// Integrates the autonomous system `dy/dt = f(y)` from `t = 0` to
/// `t = t_end` (either sign) with adaptive Dormand–Prince steps.
pub fn dopri5<F>(mut f: F, y0: Vec4, t_end: f64, opts: OdeOptions) -> Result<Vec4>
where
    F: FnMut(&Vec4) -> Result<Vec4>,
{
    if t_end == 0.0 {
        return Ok(y0);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (span / 8.0).min(0.02);
    let mut k1 = f(&y)?;
    let mut steps = 0;
    while t < span {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Solver("ODE step limit reached".into()));
        }
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        let hs = dir * h;
        let mut ks = [[0.0; 4]; 7];
        ks[0] = k1;
        for s in 1..7 {
            let ys = axpy(&y, hs, &ks[..s], &A[s][..s]);
            ks[s] = f(&ys)?;
        }
        let y_new = axpy(&y, hs, &ks[..6], &A[6][..6]);
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let e: f64 = (0..7).map(|s| E[s] * ks[s][i]).sum::<f64>() * hs;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            t = if last { span } else { t + h };
            y = y_new;
            // FSAL: stage 7 is evaluated at the accepted point
            k1 = ks[6];
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-14 * span.max(1e-300) && t < span {
            return Err(Error::Solver("ODE step size underflow".into()));
        }
    }
    Ok(y)
}

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Solver(format!(
            "root not bracketed on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..max_iter {
        if fb == 0.0 || (b - a).abs() < xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let outside = !((s > q.min(b)) && (s < q.max(b)));
        if outside
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < xtol)
            || (!mflag && (c - d).abs() < xtol)
        {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(Error::Solver("Brent iteration limit".into()))
}

/// Finds a root of `f` near `x0` by stepping outwards until the sign
/// changes, then refining with [`brent`]. The search never leaves `[lo, hi]`.
pub fn bracket_and_solve<F>(mut f: F, x0: f64, step: f64, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(x0);
    }
    let mut h = step.abs().max(1e-14);
    for _ in 0..200 {
        let a = (x0 - h).max(lo);
        let b = (x0 + h).min(hi);
        // probe each side; a failed evaluation means that side is out of range
        if let Ok(fb) = f(b) {
            if fb.signum() != f0.signum() {
                return brent(&mut f, x0, b, xtol, 200);
            }
        }
        if let Ok(fa) = f(a) {
            if fa.signum() != f0.signum() {
                return brent(&mut f, a, x0, xtol, 200);
            }
        }
        if a <= lo && b >= hi {
            break;
        }
        h *= 1.6;
    }
    Err(Error::Solver(format!("no sign change found near {x0}")))
}

pub const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss–Legendre quadrature of `f` on `[a, b]` with
/// `panels` equal sub-intervals.
pub fn gauss5<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = panels.max(1);
    let w = (b - a) / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * w;
        for (x, wt) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
            sum += wt * f(mid + 0.5 * w * x);
        }
    }
    0.5 * w * sum
}

/// Adaptive five-point Gauss–Legendre quadrature: an interval is accepted
/// once halving it changes the estimate by less than `tol` (scaled to its
/// share of `[a, b]`).
pub fn adaptive_gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss5(f, a, m, 1);
        let right = gauss5(f, m, b, 1);
        if depth == 0 || (left + right - whole).abs() <= tol {
            return left + right;
        }
        rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, gauss5(f, a, b, 1), tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_gauss_on_bump() {
        // ∫ exp(−1/(1−t²)) over (−1, 1)
        let b = |t: f64| if t.abs() < 1.0 { (-1.0 / (1.0 - t * t)).exp() } else { 0.0 };
        let v = adaptive_gauss5(&b, -1.0, 1.0, 1e-15);
        assert!((v - 0.443_993_816_168_079_4).abs() < 1e-13, "{v}");
        assert!((adaptive_gauss5(&|x: f64| x * x, 0.0, 3.0, 1e-14) - 9.0).abs() < 1e-13);
    }

    #[test]
    fn dopri_matches_exponential() {
        let y = dopri5(
            |y| Ok([y[0], -y[1], 2.0 * y[2], 0.0]),
            [1.0, 1.0, 1.0, 3.0],
            0.7,
            OdeOptions::default(),
        )
        .unwrap();
        assert!((y[0] - 0.7f64.exp()).abs() < 1e-11);
        assert!((y[1] - (-0.7f64).exp()).abs() < 1e-11);
        assert!((y[2] - 1.4f64.exp()).abs() < 1e-11);
        assert_eq!(y[3], 3.0);
        let back = dopri5(
            |y| Ok([y[0], -y[1], 2.0 * y[2], 0.0]),
            y,
            -0.7,
            OdeOptions::default(),
        )
        .unwrap();
        assert!((back[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn bracketing_search() {
        let r = bracket_and_solve(|x| Ok((x - 0.3).tanh()), 0.0, 0.01, -1.0, 1.0, 1e-15).unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn gauss_exact_for_degree_nine() {
        let v = gauss5(|x| x.powi(9) + x.powi(8), -1.0, 1.0, 1);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let v = gauss5(f64::sin, 0.0, std::f64::consts::PI, 4);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
