//! Scalar root finding: Brent's method plus a scan-and-bracket driver for
//! functions whose first positive root is wanted.

use crate::error::{Error, Result};

/// Brent's method on a bracketing interval `[a, b]` with `f(a) f(b) <= 0`.
///
/// Converges to `rel_tol` on the root location (with a floor of a few ulp)
/// or errors after `max_iter` iterations.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Bracketing(format!(
            "no sign change on [{a}, {b}]: f = [{fa}, {fb}]"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs().max(1e-300);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation / secant
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol {
            b += d;
        } else {
            b += if xm > 0.0 { tol } else { -tol };
        }
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::NonConvergence(format!(
        "Brent: no convergence after {max_iter} iterations near {b}"
    )))
}

/// Find the first root of `f` on `[lo, hi]` by scanning `n_scan`
/// subintervals for a sign change, then polishing with Brent followed by a
/// few derivative-based Newton steps (finite-difference derivative).
///
/// If no sign change is found the interval is expanded geometrically up to
/// `max_expand` times.
pub fn first_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n_scan: usize,
    max_expand: usize,
    rel_tol: f64,
) -> Result<f64> {
    let mut hi = hi;
    for _ in 0..=max_expand {
        let mut x_prev = lo;
        let mut f_prev = f(x_prev);
        if f_prev == 0.0 {
            return Ok(x_prev);
        }
        for k in 1..=n_scan {
            let x = lo + (hi - lo) * k as f64 / n_scan as f64;
            let fx = f(x);
            if fx == 0.0 {
                return Ok(x);
            }
            if f_prev * fx < 0.0 {
                let root = brent(&mut f, x_prev, x, rel_tol * 1e-2, 200)?;
                return Ok(newton_polish(&mut f, root, rel_tol));
            }
            x_prev = x;
            f_prev = fx;
        }
        hi *= 10.0;
    }
    Err(Error::Bracketing(format!(
        "no sign change on [{lo}, {hi}] after {max_expand} expansions"
    )))
}

/// A few Newton steps with a central finite-difference derivative; returns
/// the refined root (or the input if the derivative degenerates).
fn newton_polish<F: FnMut(f64) -> f64>(f: &mut F, x0: f64, rel_tol: f64) -> f64 {
    let mut x = x0;
    for _ in 0..8 {
        let h = 1e-7 * x.abs().max(1e-12);
        let df = (f(x + h) - f(x - h)) / (2.0 * h);
        if !df.is_finite() || df == 0.0 {
            return x;
        }
        let step = f(x) / df;
        let x_new = x - step;
        if !x_new.is_finite() {
            return x;
        }
        x = x_new;
        if step.abs() <= rel_tol * x.abs().max(1e-300) {
            break;
        }
    }
    x
}
