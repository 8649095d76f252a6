//! Bracketed scalar root finding (Brent's method).

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop when the bracket is narrower than this.
    pub x_tol: f64,
    /// Stop when |f| falls below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

/// Brent's method on a sign-changing bracket [a, b] with known end values.
/// `f` may fail; the error is propagated.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    debug_assert!(fa.signum() != fb.signum(), "brent needs a sign change");
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= opts.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let opts = RootOptions {
            x_tol: 1e-14,
            f_tol: 0.0,
            max_iter: 200,
        };
        let f = |x: f64| x * x * x - 2.0;
        let r = brent(|x| Ok(f(x)), 0.0, 2.0, f(0.0), f(2.0), opts).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn decreasing_map() {
        let opts = RootOptions {
            x_tol: 1e-15,
            f_tol: 1e-14,
            max_iter: 200,
        };
        let f = |x: f64| (-x).exp() - 0.5;
        let r = brent(|x| Ok(f(x)), 0.0, 5.0, f(0.0), f(5.0), opts).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-12);
    }
}
