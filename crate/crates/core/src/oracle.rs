//! Brute-force reference solver for the free boundary when 0 < q_M < 1.
//!
//! Fixed-step classical RK4 on n itself (no change of state, no series, no adaptivity)
//! with trapezoidal accumulation of log Sigma, and plain bisection on the start point.
//! Shares nothing with the adaptive solver beyond the model quadratics.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Coordinates in which the n-equation is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    /// The consumption-wealth ratio n.
    Original,
    /// nbar = (S/(1-S)) (n - delta/S).
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleShot {
    pub zeta: f64,
    pub log_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSolution {
    pub q_star: f64,
    pub q_upper: f64,
    pub log_sigma: f64,
    pub shots: usize,
}

struct Frame<'a> {
    p: &'a ModelParams,
    coords: Coordinates,
    scale: f64,
    shift: f64,
}

impl Frame<'_> {
    fn new(p: &ModelParams, coords: Coordinates) -> Frame<'_> {
        let s = p.eic();
        let (scale, shift) = match coords {
            Coordinates::Original => (1.0, 0.0),
            Coordinates::Affine => (s / (1.0 - s), p.delta() / s),
        };
        Frame {
            p,
            coords,
            scale,
            shift,
        }
    }

    fn to_frame(&self, n: f64) -> f64 {
        match self.coords {
            Coordinates::Original => n,
            Coordinates::Affine => self.scale * (n - self.shift),
        }
    }

    fn unframe(&self, u: f64) -> f64 {
        match self.coords {
            Coordinates::Original => u,
            Coordinates::Affine => u / self.scale + self.shift,
        }
    }

    /// du/dq from (1-q)(ell-n) n' = ((1-S)/S) n (m-n), written in the frame variable.
    fn rhs(&self, q: f64, u: f64) -> f64 {
        let p = self.p;
        let (m, l) = (self.to_frame(p.m(q)), self.to_frame(p.ell(q)));
        let n = self.unframe(u);
        // (m - n)/(ell - n) is frame-invariant; u' = scale n'
        self.scale * p.k_coef() * n * (m - u) / ((1.0 - q) * (l - u))
    }

    fn gap(&self, q: f64, u: f64) -> f64 {
        self.to_frame(self.p.m(q)) - u
    }

    fn integrand(&self, q: f64, u: f64) -> f64 {
        let (m, l) = (self.to_frame(self.p.m(q)), self.to_frame(self.p.ell(q)));
        -(m - u) / ((l - u) * q * (1.0 - q))
    }
}

/// Integrate from (z, m(z)) with step `h` to the next crossing with m.
pub fn shoot(p: &ModelParams, z: f64, h: f64, coords: Coordinates) -> Result<OracleShot> {
    let f = Frame::new(p, coords);
    let mut q = z;
    let mut u = f.to_frame(p.m(z));
    let mut integ = 0.0;
    let mut prev_i = 0.0;
    let mut prev_gap: f64 = 0.0;
    let mut steps = 0usize;
    loop {
        let k1 = f.rhs(q, u);
        let k2 = f.rhs(q + 0.5 * h, u + 0.5 * h * k1);
        let k3 = f.rhs(q + 0.5 * h, u + 0.5 * h * k2);
        let k4 = f.rhs(q + h, u + h * k3);
        let un = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let qn = q + h;
        if !un.is_finite() || qn >= 1.0 {
            return Err(Error::NoCrossing {
                z,
                reason: format!("reached q = {qn} without crossing"),
            });
        }
        let gap = f.gap(qn, un);
        let cur_i = f.integrand(qn, un);
        steps += 1;
        if steps > 1 && gap.signum() != prev_gap.signum() && gap != 0.0 {
            // linear interpolation of the crossing inside the last step
            let s = prev_gap / (prev_gap - gap);
            let zeta = q + s * h;
            let i_end = 0.0;
            integ += 0.5 * (prev_i + i_end) * s * h;
            return Ok(OracleShot {
                zeta,
                log_sigma: integ,
            });
        }
        integ += 0.5 * (prev_i + cur_i) * h;
        prev_i = cur_i;
        prev_gap = gap;
        q = qn;
        u = un;
    }
}

fn log_sigma_or_inf(p: &ModelParams, z: f64, h: f64, coords: Coordinates) -> f64 {
    shoot(p, z, h, coords).map_or(f64::INFINITY, |s| s.log_sigma)
}

/// Boundaries at round-trip cost `xi` by bisection on the start point.
///
/// A coarse pass at step max(h, 1e-5) locates the start to 1e-7; the final bisection
/// runs at step `h` inside a bracket widened around the coarse estimate.
pub fn solve(p: &ModelParams, xi: f64, h: f64, coords: Coordinates) -> Result<OracleSolution> {
    let qm = p.q_merton();
    if !(qm > 0.0 && qm < 1.0) {
        return Err(Error::DegenerateMertonRatio(qm));
    }
    // starts must lie below the smaller root of m when m_M < 0
    let top = if p.m_merton() < 0.0 {
        let [c0, c1, c2] = p.m_coefficients();
        let disc = (c1 * c1 - 4.0 * c0 * c2).sqrt();
        let r1 = (-c1 - disc) / (2.0 * c2);
        let r2 = (-c1 + disc) / (2.0 * c2);
        r1.min(r2) - 1e-9
    } else {
        // a start this close to q_M re-crosses m within a fraction of a coarse step
        qm - 1e-3
    };
    let target = xi.ln();
    let mut shots = 0usize;
    let bisect = |lo: f64, hi: f64, step: f64, width: f64, shots: &mut usize| -> Result<(f64, f64)> {
        // log Sigma decreases in the start point: +inf far from q_M, 0 at q_M
        let (mut a, mut b) = (lo, hi);
        let fa = log_sigma_or_inf(p, a, step, coords) - target;
        let fb = log_sigma_or_inf(p, b, step, coords) - target;
        *shots += 2;
        if !(fa > 0.0 && fb < 0.0) {
            return Err(Error::BracketFailure(xi));
        }
        while b - a > width {
            let mid = 0.5 * (a + b);
            *shots += 1;
            if log_sigma_or_inf(p, mid, step, coords) > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok((a, b))
    };
    let coarse = h.max(1e-5);
    // starts within a few steps of 0 re-cross m spuriously
    let bottom = 100.0 * coarse;
    let (a, b) = bisect(bottom, top, coarse, 1e-7, &mut shots)?;
    let pad = 1e-5;
    let (a, b) = bisect((a - pad).max(bottom), (b + pad).min(top), h, 1e-12, &mut shots)?;
    let z = 0.5 * (a + b);
    let shot = shoot(p, z, h, coords)?;
    Ok(OracleSolution {
        q_star: z,
        q_upper: shot.zeta,
        log_sigma: shot.log_sigma,
        shots: shots + 1,
    })
}
