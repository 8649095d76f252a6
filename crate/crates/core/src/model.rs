//! Market and preference parameters, and the quadratics `m`, `ell` and the
//! frictionless fixed-point map `H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from 1 below which R or S is treated as logarithmic utility and rejected.
const UNIT_EXCLUSION: f64 = 1e-9;

/// Raw parameter record, as read from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    #[serde(rename = "R")]
    pub risk_aversion: f64,
    #[serde(rename = "S")]
    pub eic: f64,
    pub delta: f64,
}

/// Validated model parameters with all derived constants cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    raw: RawParams,
    lambda: f64,
    theta: f64,
    rho: f64,
    alpha: f64,
    q_merton: f64,
    m_merton: f64,
    d_coef: f64,
    /// Coefficients of m(q) = c0 + c1 q + c2 q^2.
    m_coef: [f64; 3],
    /// Coefficients of ell(q).
    l_coef: [f64; 3],
}

impl RawParams {
    /// Every violated constraint, in a human-readable form.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let vals = [
            ("r", self.r),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("R", self.risk_aversion),
            ("S", self.eic),
            ("delta", self.delta),
        ];
        for (name, v) in vals {
            if !v.is_finite() {
                out.push(format!("{name} must be finite"));
            }
        }
        if !(self.sigma > 0.0) {
            out.push("sigma must be > 0".into());
        }
        if !(self.risk_aversion > 0.0) {
            out.push("R must be > 0".into());
        }
        if !(self.eic > 0.0) {
            out.push("S must be > 0".into());
        }
        if (self.risk_aversion - 1.0).abs() < UNIT_EXCLUSION {
            out.push("R = 1 (logarithmic utility) is excluded".into());
        }
        if (self.eic - 1.0).abs() < UNIT_EXCLUSION {
            out.push("S = 1 (logarithmic utility) is excluded".into());
        }
        if self.sigma > 0.0 && self.mu == self.r {
            out.push("market price of risk (mu - r)/sigma must be nonzero".into());
        }
        let theta = (1.0 - self.risk_aversion) / (1.0 - self.eic);
        if (self.risk_aversion - 1.0).abs() >= UNIT_EXCLUSION
            && (self.eic - 1.0).abs() >= UNIT_EXCLUSION
            && !(theta > 0.0)
        {
            out.push(format!(
                "theta = (1-R)/(1-S) must be > 0 (R and S on the same side of 1), got {theta}"
            ));
        }
        out
    }
}

impl ModelParams {
    pub fn new(r: f64, mu: f64, sigma: f64, risk_aversion: f64, eic: f64, delta: f64) -> Result<Self> {
        Self::from_raw(RawParams {
            r,
            mu,
            sigma,
            risk_aversion,
            eic,
            delta,
        })
    }

    pub fn from_raw(raw: RawParams) -> Result<Self> {
        let v = raw.violations();
        if !v.is_empty() {
            return Err(Error::InvalidParams(v));
        }
        let (rr, s, sigma) = (raw.risk_aversion, raw.eic, raw.sigma);
        let lambda = (raw.mu - raw.r) / sigma;
        let theta = (1.0 - rr) / (1.0 - s);
        let rho = (s - rr) / (1.0 - rr);
        let alpha = raw.delta - raw.r * (1.0 - s);
        let k = (1.0 - s) / s;
        let half_var = 0.5 * sigma * sigma;
        let d_coef = k * half_var;
        let m_coef = [alpha / s, -k * lambda * sigma, rr * k * half_var];
        let l_coef = [m_coef[0], m_coef[1] + d_coef, m_coef[2] - d_coef];
        let q_merton = lambda / (sigma * rr);
        let m_merton = m_coef[0] + q_merton * (m_coef[1] + q_merton * m_coef[2]);
        Ok(Self {
            raw,
            lambda,
            theta,
            rho,
            alpha,
            q_merton,
            m_merton,
            d_coef,
            m_coef,
            l_coef,
        })
    }

    pub fn raw(&self) -> RawParams {
        self.raw
    }
    pub fn r(&self) -> f64 {
        self.raw.r
    }
    pub fn mu(&self) -> f64 {
        self.raw.mu
    }
    pub fn sigma(&self) -> f64 {
        self.raw.sigma
    }
    /// Relative risk aversion R.
    pub fn risk_aversion(&self) -> f64 {
        self.raw.risk_aversion
    }
    /// Elasticity of intertemporal complementarity S.
    pub fn eic(&self) -> f64 {
        self.raw.eic
    }
    pub fn delta(&self) -> f64 {
        self.raw.delta
    }
    /// Market price of risk (mu - r)/sigma.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Merton fraction lambda/(sigma R).
    pub fn q_merton(&self) -> f64 {
        self.q_merton
    }
    /// m evaluated at the Merton fraction.
    pub fn m_merton(&self) -> f64 {
        self.m_merton
    }
    /// D = ((1-S)/S) sigma^2/2, so that ell - m = D q (1-q).
    pub fn d_coef(&self) -> f64 {
        self.d_coef
    }
    /// (1-S)/S.
    pub fn k_coef(&self) -> f64 {
        (1.0 - self.raw.eic) / self.raw.eic
    }
    pub fn m_coefficients(&self) -> [f64; 3] {
        self.m_coef
    }
    pub fn ell_coefficients(&self) -> [f64; 3] {
        self.l_coef
    }

    pub fn m(&self, q: f64) -> f64 {
        let c = &self.m_coef;
        c[0] + q * (c[1] + q * c[2])
    }

    pub fn m_prime(&self, q: f64) -> f64 {
        self.m_coef[1] + 2.0 * self.m_coef[2] * q
    }

    pub fn ell(&self, q: f64) -> f64 {
        let c = &self.l_coef;
        c[0] + q * (c[1] + q * c[2])
    }

    pub fn ell_prime(&self, q: f64) -> f64 {
        self.l_coef[1] + 2.0 * self.l_coef[2] * q
    }

    /// Frictionless fixed-point map; `m(q)` is its unique fixed point in the second argument.
    pub fn big_h(&self, q: f64, m_val: f64) -> f64 {
        let sigma = self.raw.sigma;
        self.raw.delta
            + (self.raw.eic - 1.0)
                * (self.raw.r + self.lambda * sigma * q
                    - m_val
                    - 0.5 * q * q * sigma * sigma * self.raw.risk_aversion)
    }

    /// Merton fraction, m at it, and the factor m_M^(-theta S) of the frictionless value
    /// V0 = z^(1-R)/(1-R) * factor.
    pub fn frictionless_solution(&self) -> Result<Frictionless> {
        if !(self.m_merton > 0.0) {
            return Err(Error::IllPosedFrictionless(self.m_merton));
        }
        Ok(Frictionless {
            q_merton: self.q_merton,
            m_merton: self.m_merton,
            value_factor: self.m_merton.powf(-self.theta * self.raw.eic),
        })
    }

    /// Frictionless value of wealth `z`.
    pub fn frictionless_value(&self, z: f64) -> Result<f64> {
        let f = self.frictionless_solution()?;
        let one_r = 1.0 - self.raw.risk_aversion;
        Ok(z.powf(one_r) / one_r * f.value_factor)
    }

    /// Copy with one named parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut raw = self.raw;
        match name {
            "r" => raw.r = value,
            "mu" => raw.mu = value,
            "sigma" => raw.sigma = value,
            "R" => raw.risk_aversion = value,
            "S" => raw.eic = value,
            "delta" => raw.delta = value,
            other => {
                return Err(Error::InvalidParams(vec![format!(
                    "unknown parameter name {other:?}"
                )]))
            }
        }
        Self::from_raw(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frictionless {
    pub q_merton: f64,
    pub m_merton: f64,
    pub value_factor: f64,
}

/// Proportional transaction costs: buying one share costs `gamma_up` times the price,
/// selling one share returns the price divided by `gamma_down`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub gamma_up: f64,
    pub gamma_down: f64,
}

impl CostParams {
    pub fn new(gamma_up: f64, gamma_down: f64) -> Result<Self> {
        let mut v = Vec::new();
        if !(gamma_up >= 1.0) || !gamma_up.is_finite() {
            v.push(format!("gamma_up must be finite and >= 1, got {gamma_up}"));
        }
        if !(gamma_down >= 1.0) || !gamma_down.is_finite() {
            v.push(format!("gamma_down must be finite and >= 1, got {gamma_down}"));
        }
        if v.is_empty() {
            Ok(Self { gamma_up, gamma_down })
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Equal split of a round-trip cost: gamma_up = gamma_down = sqrt(xi).
    pub fn symmetric(xi: f64) -> Result<Self> {
        let g = xi.sqrt();
        Self::new(g, g)
    }

    /// Round-trip cost gamma_up * gamma_down.
    pub fn xi(&self) -> f64 {
        self.gamma_up * self.gamma_down
    }
}

/// Parameter set with R=2/3, S=1/3, delta=0.045, r=0, mu=0.2, sigma=0.65.
pub fn example_one() -> ModelParams {
    ModelParams::new(0.0, 0.2, 0.65, 2.0 / 3.0, 1.0 / 3.0, 0.045).expect("valid parameters")
}

/// Parameter set with R=2, S=4, delta=0.1, r=0, mu=0.1, sigma=0.2.
pub fn example_two() -> ModelParams {
    ModelParams::new(0.0, 0.1, 0.2, 2.0, 4.0, 0.1).expect("valid parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_one_constants() {
        let p = example_one();
        assert!((p.m(0.0) - 0.135).abs() < 1e-15);
        assert!((p.lambda() - 0.2 / 0.65).abs() < 1e-15);
        assert!((p.q_merton() - 0.710059171597633).abs() < 1e-12);
        assert!(p.m_merton() < 0.0);
        assert!(p.frictionless_solution().is_err());
    }

    #[test]
    fn example_two_constants() {
        let p = example_two();
        assert!((p.lambda() - 0.5).abs() < 1e-15);
        assert!((p.q_merton() - 1.25).abs() < 1e-15);
        let f = p.frictionless_solution().unwrap();
        assert!(f.m_merton > 0.0);
        // m_M = r + lambda^2/(2R) + (delta - r - lambda^2/(2R))/S
        let alt = 0.25 / 4.0 + (0.1 - 0.25 / 4.0) / 4.0;
        assert!((f.m_merton - alt).abs() < 1e-15);
        // ell(q_M) = m(q_M) + D q_M (1 - q_M)
        let lq = p.ell(1.25);
        assert!((lq - (f.m_merton + p.d_coef() * 1.25 * (1.0 - 1.25))).abs() < 1e-15);
    }

    #[test]
    fn vertex_and_fixed_point() {
        let p = example_one();
        assert!(p.m_prime(p.q_merton()).abs() < 1e-15);
        assert!((p.big_h(p.q_merton(), p.m_merton()) - p.m_merton()).abs() < 1e-15);
        let h = p.big_h(0.5, p.m(0.5));
        assert!((h - p.m(0.5)).abs() < 1e-15);
    }

    #[test]
    fn ell_matches_m_at_zero_and_one() {
        let p = example_two();
        assert_eq!(p.ell(0.0), p.m(0.0));
        assert!((p.ell(1.0) - p.m(1.0)).abs() < 1e-16);
    }

    #[test]
    fn rejects_excluded_parameters() {
        assert!(ModelParams::new(0.0, 0.1, 0.2, 1.0, 0.5, 0.1).is_err());
        assert!(ModelParams::new(0.0, 0.1, 0.2, 0.5, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.0, 0.1, 0.2, 2.0, 0.5, 0.1).is_err());
        assert!(ModelParams::new(0.0, 0.1, 0.0, 2.0, 3.0, 0.1).is_err());
        assert!(ModelParams::new(0.1, 0.1, 0.2, 2.0, 3.0, 0.1).is_err());
        match ModelParams::new(0.0, 0.1, -1.0, 1.0, 1.0, 0.1) {
            Err(Error::InvalidParams(v)) => assert!(v.len() >= 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn additive_case_has_unit_theta() {
        let p = ModelParams::new(0.01, 0.08, 0.2, 3.0, 3.0, 0.05).unwrap();
        assert_eq!(p.theta(), 1.0);
        assert_eq!(p.rho(), 0.0);
        let f = p.frictionless_solution().unwrap();
        assert!((f.value_factor - f.m_merton.powf(-3.0)).abs() < 1e-12 * f.value_factor);
    }

    proptest! {
        #[test]
        fn ell_minus_m_identity(q in -3.0f64..3.0, s in 0.1f64..0.9, rr in 0.1f64..0.9, sigma in 0.1f64..1.0) {
            let p = ModelParams::new(0.02, 0.1, sigma, rr, s, 0.05).unwrap();
            let lhs = p.ell(q) - p.m(q);
            let rhs = p.d_coef() * q * (1.0 - q);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + p.m(q).abs()));
        }

        #[test]
        fn m_extremum_at_merton(q in -3.0f64..3.0, s in 1.1f64..5.0, rr in 1.1f64..5.0) {
            let p = ModelParams::new(0.0, 0.1, 0.25, rr, s, 0.05).unwrap();
            prop_assert!((1.0 - s) * (p.m(q) - p.m_merton()) >= -1e-14);
        }
    }
}
