//! Small-cost expansions of the shadow and real boundaries and of optimal consumption.
//!
//! With eps the total proportional cost (xi = 1 + eps), the no-trade wedge in shadow
//! coordinates has half-width (Delta eps)^(1/3), is shifted by -Sigma (Delta eps)^(2/3) and
//! widened by Psi Delta eps, with error O(eps^(4/3)).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Degenerate zone around q_M = 1, where the wedge scales like eps^(1/2) instead.
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoeffs {
    pub delta_coef: f64,
    pub sigma_coef: f64,
    pub psi_coef: f64,
    pub q_hat: f64,
    pub m_hat: f64,
    risk_aversion: f64,
    eic: f64,
    sigma: f64,
}

/// h_3(v) = (1 + v)^2 (2 - v) = 3 int_{-1}^v (1 - w^2) dw.
pub fn h3(v: f64) -> f64 {
    (1.0 + v) * (1.0 + v) * (2.0 - v)
}

/// Expansion coefficients; requires the problem to be well-posed for all small costs.
pub fn coeffs(p: &ModelParams) -> Result<AsymptoticCoeffs> {
    let q = p.q_merton();
    if (q - 1.0).abs() < UNIT_TOL || q == 0.0 {
        return Err(Error::DegenerateMertonRatio(q));
    }
    let (r, s, m) = (p.risk_aversion(), p.eic(), p.m_merton());
    let ok = (r < 1.0 && s < 1.0 && m >= 0.0) || (r > 1.0 && s > 1.0 && m > 0.0);
    if !ok {
        return Err(Error::HypothesisFail(format!(
            "need R, S < 1 with m(q_M) >= 0 or R, S > 1 with m(q_M) > 0; got R = {r}, S = {s}, m(q_M) = {m}"
        )));
    }
    let sig = p.sigma();
    let g = q * (1.0 - q);
    let delta_coef = 3.0 * g * g / (4.0 * r);
    let sigma_coef = 2.0 * m / (3.0 * sig * sig * q * (1.0 - q) * (1.0 - q));
    let psi_coef = sigma_coef * sigma_coef / 5.0 + (5.0 * q - 3.0) * sigma_coef / (5.0 * g)
        - ((3.0 - 10.0 * q + 10.0 * q * q) + 4.0 * r * g) / (15.0 * g * g);
    Ok(AsymptoticCoeffs {
        delta_coef,
        sigma_coef,
        psi_coef,
        q_hat: q,
        m_hat: m,
        risk_aversion: r,
        eic: s,
        sigma: sig,
    })
}

impl AsymptoticCoeffs {
    /// Second closed form of Sigma, m q/(2 R sigma^2 Delta).
    pub fn sigma_alt(&self) -> f64 {
        self.m_hat * self.q_hat / (2.0 * self.risk_aversion * self.sigma * self.sigma * self.delta_coef)
    }

    /// First-order coefficient of the crossing point in the scaled wedge; Sigma = zeta_1/2.
    pub fn zeta_one(&self) -> f64 {
        let q = self.q_hat;
        4.0 * self.m_hat / (3.0 * self.sigma * self.sigma * q * (1.0 - q) * (1.0 - q))
    }

    fn terms(&self, eps: f64) -> (f64, f64, f64) {
        let de = self.delta_coef * eps;
        (
            de.cbrt(),
            self.sigma_coef * de.powf(2.0 / 3.0),
            self.psi_coef * de,
        )
    }

    /// (q_*, q^*) at round-trip cost 1 + eps.
    pub fn shadow_boundary_expansion(&self, eps: f64) -> (f64, f64) {
        let (a, b, c) = self.terms(eps);
        (self.q_hat - a - b - c, self.q_hat + a - b + c)
    }

    /// (p_*, p^*) at gamma_up = 1 + eps_up, gamma_down = 1 + eps_down.
    pub fn real_boundary_expansion(&self, eps_up: f64, eps_down: f64) -> (f64, f64) {
        let (lo, hi) = self.shadow_boundary_expansion(eps_up + eps_down);
        let g = self.q_hat * (1.0 - self.q_hat);
        (lo - eps_up * g, hi + eps_down * g)
    }

    /// Relative consumption correction of order eps^(2/3); independent of the position.
    pub fn consumption_two_thirds_term(&self, eps: f64) -> f64 {
        let (r, s, sig) = (self.risk_aversion, self.eic, self.sigma);
        r * (1.0 - s) / s * sig * sig / (2.0 * self.m_hat) * (self.delta_coef * eps).powf(2.0 / 3.0)
    }

    /// Expanded optimal consumption at cash x, price y and phi shares.
    pub fn consumption_expansion(&self, eps_up: f64, eps_down: f64, x: f64, y: f64, phi: f64) -> f64 {
        let eps = eps_up + eps_down;
        let wealth = x + y * phi;
        let base = wealth * self.m_hat;
        if eps == 0.0 {
            return base;
        }
        let p = y * phi / wealth;
        let v = (p - self.q_hat) / (self.delta_coef * eps).cbrt();
        let q = self.q_hat;
        base * (1.0
            + self.consumption_two_thirds_term(eps)
            + q / (2.0 * self.eic) * (1.0 - 0.5 * h3(v)) * eps
            + 0.5 * q * (eps_up - eps_down))
    }
}

/// Least-squares fit of log y = intercept + slope log x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// n log-spaced points from a to b inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_one, example_two};
    use proptest::prelude::*;

    #[test]
    fn h3_end_values() {
        assert_eq!(h3(-1.0), 0.0);
        assert_eq!(h3(1.0), 4.0);
    }

    #[test]
    fn rational_delta() {
        // q_M = 1/2 and R = 3/4: lambda = q_M sigma R
        let sigma = 0.4;
        let p = ModelParams::new(0.0, 0.5 * sigma * 0.75 * sigma, sigma, 0.75, 0.5, 0.2).unwrap();
        let c = coeffs(&p).unwrap();
        assert!((c.delta_coef - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn hypothesis_checks() {
        assert!(matches!(coeffs(&example_one()), Err(Error::HypothesisFail(_))));
        let c = coeffs(&example_two()).unwrap();
        assert!((c.sigma_coef - c.zeta_one() / 2.0).abs() < 1e-12);
        let unit = ModelParams::new(0.0, 0.08, 0.2, 2.0, 4.0, 0.1).unwrap();
        assert!(matches!(coeffs(&unit), Err(Error::DegenerateMertonRatio(_))));
    }

    #[test]
    fn zero_cost_limits() {
        let c = coeffs(&example_two()).unwrap();
        assert_eq!(c.shadow_boundary_expansion(0.0), (c.q_hat, c.q_hat));
        assert_eq!(c.real_boundary_expansion(0.0, 0.0), (c.q_hat, c.q_hat));
        assert_eq!(c.consumption_expansion(0.0, 0.0, 0.7, 1.0, 0.3), c.m_hat);
    }

    #[test]
    fn individual_costs_enter_linearly() {
        let c = coeffs(&example_two()).unwrap();
        let (a0, b0) = c.real_boundary_expansion(1e-3, 2e-3);
        let (a1, b1) = c.real_boundary_expansion(2e-3, 1e-3);
        let g = c.q_hat * (1.0 - c.q_hat);
        assert!(((a0 - a1) - 1e-3 * g).abs() < 1e-15);
        assert!(((b0 - b1) - 1e-3 * g).abs() < 1e-15);
    }

    #[test]
    fn midpoint_shift() {
        let c = coeffs(&example_two()).unwrap();
        let eps = 1e-6;
        let (lo, hi) = c.shadow_boundary_expansion(eps);
        let shift = 0.5 * (lo + hi) - c.q_hat;
        assert!((shift + c.sigma_coef * (c.delta_coef * eps).powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = log_space(1e-4, 1e-2, 8);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(4.0 / 3.0)).collect();
        let (s, i) = fit_loglog_slope(&xs, &ys);
        assert!((s - 4.0 / 3.0).abs() < 1e-12 && (i - 3f64.ln()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn sigma_forms_agree(q in 0.05f64..0.95, r in 0.2f64..0.9, s in 0.2f64..0.9, sig in 0.1f64..0.5, delta in 0.05f64..0.3) {
            let mu = q * sig * r * sig;
            let p = ModelParams::new(0.0, mu, sig, r, s, delta).unwrap();
            if let Ok(c) = coeffs(&p) {
                prop_assert!((c.sigma_coef - c.sigma_alt()).abs() <= 1e-12 * c.sigma_coef.abs().max(1.0));
            }
        }

        #[test]
        fn two_thirds_sign_follows_s(s in 0.2f64..0.9) {
            let p = ModelParams::new(0.0, 0.06, 0.3, 0.5, s, 0.1).unwrap();
            if let Ok(c) = coeffs(&p) {
                prop_assert!(c.consumption_two_thirds_term(1e-3) > 0.0);
            }
        }
    }
}
