//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Find the root of `f` in [a, b] where f(a) and f(b) have opposite signs.
/// Based on the classical Brent scheme from Numerical Recipes.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
    what: &str,
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
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoRoot {
            what: what.to_string(),
            lo: a,
            hi: b,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let eps = f64::EPSILON;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * eps * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
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
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
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
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Err(Error::NoConvergence {
        what: what.to_string(),
        iters: max_iter,
    })
}

/// Expand `hi` geometrically until `f` changes sign, then run Brent.
pub fn brent_expanding<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi0: f64,
    grow: f64,
    max_expand: usize,
    xtol: f64,
    what: &str,
) -> Result<f64> {
    let flo = f(lo);
    if flo.is_nan() {
        return Err(Error::NoRoot {
            what: what.to_string(),
            lo,
            hi: hi0,
        });
    }
    let mut hi = hi0.max(lo * (1.0 + 1e-9));
    for _ in 0..max_expand {
        let fhi = f(hi);
        if !fhi.is_nan() && fhi.signum() != flo.signum() {
            return brent(f, lo, hi, xtol, 200, what);
        }
        hi *= grow;
    }
    Err(Error::NoRoot {
        what: what.to_string(),
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 100, "cbrt2").unwrap();
        assert_relative_eq!(r, 2f64.powf(1.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn no_bracket_is_error() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100, "none").is_err());
    }
}
