//! Dormand-Prince 5(4) integrator with continuous output and a terminal event.

use crate::error::{Error, Result};
use crate::roots::{brent, RootOptions};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step.
    pub h_init: f64,
    /// Largest allowed step.
    pub h_max: f64,
    /// Step size below which integration is abandoned.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            h_min: 1e-15,
            max_steps: 2_000_000,
        }
    }
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct Dense<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.rc;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Outcome<const N: usize> {
    /// The event function changed sign; the located root.
    Event { t: f64, y: [f64; N] },
    /// The end of the interval was reached without an event.
    Reached { t: f64, y: [f64; N] },
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (k, c) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// Integrate y' = f(t, y) from t0 towards t_end > t0.
///
/// `rhs` returns `None` where the field is undefined; such trial steps are rejected and shrunk.
/// Integration stops at the first sign change of `event` (root located on the continuous
/// extension) or at `t_end`. `observer` sees each accepted step together with the time at
/// which that step is cut off; it may abort by returning an error.
pub fn integrate<const N: usize, F, E, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut event: E,
    mut observer: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    E: FnMut(f64, &[f64; N]) -> f64,
    O: FnMut(&Dense<N>, f64) -> Result<()>,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y).ok_or(Error::SingularPoint { q: t, n: f64::NAN })?;
    let mut g_prev = event(t, &y);
    let mut h = opts.h_init.min(t_end - t0).min(opts.h_max);
    let mut steps = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StiffnessFailure(t));
        }
        if h < opts.h_min {
            return Err(Error::StiffnessFailure(t));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let stages = (|| {
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(&k1, A21)]))?;
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(&k1, A31), (&k2, A32)]))?;
            let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(&k1, A41), (&k2, A42), (&k3, A43)]))?;
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]),
            )?;
            let k6 = rhs(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)],
                ),
            )?;
            let y1 = axpy(
                &y,
                h,
                &[(&k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)],
            );
            let k7 = rhs(t + h, &y1)?;
            Some((k2, k3, k4, k5, k6, k7, y1))
        })();
        let Some((_k2, k3, k4, k5, k6, k7, y1)) = stages else {
            h *= 0.25;
            last_rejected = true;
            continue;
        };
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if err > 1.0 {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
            continue;
        }

        let mut rc = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y1[i] - y[i];
            let bspl = h * k1[i] - dy;
            rc[0][i] = y[i];
            rc[1][i] = dy;
            rc[2][i] = bspl;
            rc[3][i] = dy - h * k7[i] - bspl;
            rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = Dense { t0: t, h, rc };
        let t1 = if last { t_end } else { t + h };
        let g1 = event(t1, &y1);
        if g_prev != 0.0 && (g1 == 0.0 || g1.signum() != g_prev.signum()) {
            let te = if g1 == 0.0 {
                t1
            } else {
                let ro = RootOptions {
                    x_tol: 4.0 * f64::EPSILON * t1.abs().max(1.0),
                    f_tol: 0.0,
                    max_iter: 200,
                };
                brent(|s| Ok(event(s, &dense.eval(s))), t, t1, g_prev, g1, ro)?
            };
            let ye = if te == t1 { y1 } else { dense.eval(te) };
            observer(&dense, te)?;
            return Ok(Outcome::Event { t: te, y: ye });
        }
        observer(&dense, t1)?;
        t = t1;
        y = y1;
        k1 = k7;
        g_prev = g1;

        let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
        fac = fac.clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(opts.h_max);
    }
    Ok(Outcome::Reached { t, y })
}
