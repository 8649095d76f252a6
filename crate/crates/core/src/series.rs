//! Formal power series of the n-ODE solution through the singular point q = 1.
//!
//! Every solution reaching q = 1 does so with n(1) = m(1), n'(1) = m'(1), and the
//! continuation past 1 is unique. Writing h = q - 1 and w = n - m, the solution is
//! asymptotic to w(h) = sum_{j>=2} b_j h^j, with coefficients fixed by the polynomial
//! form (1-q)(ell-n)n' = ((1-S)/S) n (m-n) of the equation.

use crate::model::ModelParams;

const MAX_TERMS: usize = 48;

/// Distance from q = 1 at which integration hands over to the series.
///
/// Perturbations of the solution near 1 decay like exp(-A/|h|) with A = 2 m(1)/sigma^2,
/// and the series terms grow like j!/A^j, so |h| = A/40 keeps both effects near 1e-17.
pub fn switch_radius(p: &ModelParams) -> f64 {
    let a = 2.0 * p.m(1.0) / (p.sigma() * p.sigma());
    (a / 40.0).min(0.02)
}

#[derive(Debug, Clone)]
pub struct SingularSeries {
    /// b[j] multiplies h^j in w = n - m; b[0] = b[1] = 0.
    b: Vec<f64>,
    m_at_one: [f64; 3],
    d_coef: f64,
}

impl SingularSeries {
    pub fn new(p: &ModelParams) -> Self {
        let [c0, c1, c2] = p.m_coefficients();
        let d = p.d_coef();
        let k = p.k_coef();
        // m and ell re-expanded about q = 1
        let mm = [c0 + c1 + c2, c1 + 2.0 * c2, c2];
        let ll = [mm[0], mm[1] - d, mm[2] - d];
        let mc = |j: usize| if j < 3 { mm[j] } else { 0.0 };
        let lc = |j: usize| if j < 3 { ll[j] } else { 0.0 };
        let mut a = vec![0.0; MAX_TERMS];
        a[0] = mm[0];
        a[1] = mm[1];
        for n in 2..MAX_TERMS {
            // coefficient of h^n in -h (ell - n) n'
            let mut lhs = 0.0;
            for i in 1..n {
                let j = n - 1 - i;
                lhs -= (lc(i) - a[i]) * (j as f64 + 1.0) * a[j + 1];
            }
            let mut known = 0.0;
            for j in 2..n {
                known += a[n - j] * (mc(j) - a[j]);
            }
            a[n] = mc(n) - (lhs - k * known) / (k * a[0]);
        }
        let b = (0..MAX_TERMS)
            .map(|j| if j < 2 { 0.0 } else { a[j] - mc(j) })
            .collect();
        Self {
            b,
            m_at_one: mm,
            d_coef: d,
        }
    }

    /// Number of terms kept at offset h (optimal truncation of an asymptotic series).
    fn cutoff(&self, h: f64) -> usize {
        let mut best = f64::INFINITY;
        let mut n = 3;
        let mut hp = h.abs().powi(2);
        for j in 2..MAX_TERMS {
            let t = (self.b[j] * hp).abs();
            if t > best && j > 4 {
                break;
            }
            best = best.min(t);
            n = j + 1;
            if t == 0.0 && j > 4 {
                break;
            }
            hp *= h.abs();
        }
        n
    }

    pub fn coefficient(&self, j: usize) -> f64 {
        self.b[j]
    }

    /// W(h) = w(h)/h^2.
    pub fn w_scaled(&self, h: f64) -> f64 {
        let n = self.cutoff(h);
        let mut s = 0.0;
        for j in (2..n).rev() {
            s = s * h + self.b[j];
        }
        s
    }

    /// w(h) = n - m at q = 1 + h.
    pub fn w(&self, h: f64) -> f64 {
        h * h * self.w_scaled(h)
    }

    /// dw/dh.
    pub fn dw(&self, h: f64) -> f64 {
        let n = self.cutoff(h);
        let mut s = 0.0;
        for j in (2..n).rev() {
            s = s * h + j as f64 * self.b[j];
        }
        s * h
    }

    pub fn m(&self, h: f64) -> f64 {
        let c = &self.m_at_one;
        c[0] + h * (c[1] + h * c[2])
    }

    pub fn n(&self, h: f64) -> f64 {
        self.m(h) + self.w(h)
    }

    pub fn dn(&self, h: f64) -> f64 {
        self.m_at_one[1] + 2.0 * self.m_at_one[2] * h + self.dw(h)
    }

    /// (m - n)/(ell - n), vanishing at h = 0.
    pub fn ratio(&self, h: f64) -> f64 {
        let ws = self.w_scaled(h);
        h * ws / (self.d_coef * (1.0 + h) + h * ws)
    }

    /// The cost-map integrand -(1/(q(1-q))) (m-n)/(ell-n), smooth through h = 0.
    pub fn integrand(&self, h: f64) -> f64 {
        let ws = self.w_scaled(h);
        ws / ((1.0 + h) * (self.d_coef * (1.0 + h) + h * ws))
    }
}
