//! Shadow-price multiplier kappa, real no-trade boundaries, and the policy and value
//! function built from a solved free-boundary problem.

use crate::error::{Error, Result};
use crate::fbsolver::ShadowSolution;
use crate::interp::Hermite;
use crate::model::CostParams;
use crate::quadrature::gauss_legendre8;

/// Real Moebius map tau_c(q) = c q / (1 + (c - 1) q).
///
/// Infinite q maps to c/(c-1) (and to infinity when c = 1); the pole q = 1/(1-c) is an error.
pub fn mobius(c: f64, q: f64) -> Result<f64> {
    if q.is_infinite() {
        return Ok(if c == 1.0 { q } else { c / (c - 1.0) });
    }
    let den = 1.0 + (c - 1.0) * q;
    if den == 0.0 {
        return Err(Error::PoleHit { c, q });
    }
    Ok(c * q / den)
}

fn check_costs(sol: &ShadowSolution, costs: &CostParams) -> Result<()> {
    if (costs.xi() - sol.xi()).abs() > 1e-12 * sol.xi() {
        return Err(Error::CostMismatch);
    }
    Ok(())
}

/// kappa(q) = gamma_up exp((S/(1-S)) int_{q_*}^q n'/(v n) dv), through the accumulated
/// log-Sigma integral of the solution.
pub fn kappa(sol: &ShadowSolution, costs: &CostParams, q: f64) -> Result<f64> {
    check_costs(sol, costs)?;
    Ok(costs.gamma_up * (-sol.acc_at(q)?).exp())
}

/// The same function anchored at the upper boundary and computed by direct quadrature
/// of n'/(v n) over the solution grid.
pub fn kappa_right(sol: &ShadowSolution, costs: &CostParams, q: f64) -> Result<f64> {
    check_costs(sol, costs)?;
    sol.n_at(q)?;
    let s = sol.params().eic();
    let f = |v: f64| {
        let n = sol.n_at(v).unwrap_or(f64::NAN);
        sol.slope_at(v).unwrap_or(f64::NAN) / (v * n)
    };
    let mut total = 0.0;
    let mut a = q;
    for smp in sol.samples().iter().filter(|smp| smp.q > q) {
        total += gauss_legendre8(f, a, smp.q);
        a = smp.q;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "right-anchored kappa at q = {q}"
        )));
    }
    Ok((-(s / (1.0 - s)) * total).exp() / costs.gamma_down)
}

/// (p_*, p^*) = (tau_{1/gamma_up}(q_*), tau_{gamma_down}(q^*)).
pub fn real_boundaries(sol: &ShadowSolution, costs: &CostParams) -> Result<(f64, f64)> {
    check_costs(sol, costs)?;
    Ok((
        mobius(1.0 / costs.gamma_up, sol.q_star())?,
        mobius(costs.gamma_down, sol.q_upper())?,
    ))
}

/// Extended policy at a real fraction p: shadow fraction, multiplier and consumption ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extended {
    pub q_bar: f64,
    pub kappa_bar: f64,
    pub n_bar: f64,
}

/// Tabulated policy for one solved instance and one split of the round-trip cost.
#[derive(Debug, Clone)]
pub struct PolicyTables {
    sol: ShadowSolution,
    costs: CostParams,
    p_star: f64,
    p_upper: f64,
    /// (q, kappa(q), p(q)) on the solution grid.
    table: Vec<[f64; 3]>,
    q_of_p: Hermite,
}

impl PolicyTables {
    pub fn new(sol: ShadowSolution, costs: CostParams) -> Result<Self> {
        check_costs(&sol, &costs)?;
        let (p_star, p_upper) = real_boundaries(&sol, &costs)?;
        let mut table = Vec::with_capacity(sol.samples().len());
        let (mut ps, mut qs, mut dq) = (Vec::new(), Vec::new(), Vec::new());
        for smp in sol.samples() {
            let q = smp.q;
            let k = costs.gamma_up * (-smp.acc).exp();
            let den = k + (1.0 - k) * q;
            let p = q / den;
            table.push([q, k, p]);
            // dp/dq = kappa (1 - (m-n)/(ell-n)) / den^2
            let dpdq = k * (1.0 - sol.ratio_at(q)?) / (den * den);
            if ps.last().is_none_or(|&last| p > last) {
                ps.push(p);
                qs.push(q);
                dq.push(1.0 / dpdq);
            }
        }
        // pin the end points to the closed-form boundaries
        let last = ps.len() - 1;
        ps[0] = p_star;
        ps[last] = p_upper;
        let q_of_p = Hermite::new(ps, qs, dq);
        Ok(Self {
            sol,
            costs,
            p_star,
            p_upper,
            table,
            q_of_p,
        })
    }

    pub fn solution(&self) -> &ShadowSolution {
        &self.sol
    }
    pub fn costs(&self) -> &CostParams {
        &self.costs
    }
    pub fn p_star(&self) -> f64 {
        self.p_star
    }
    pub fn p_upper(&self) -> f64 {
        self.p_upper
    }
    /// (q, kappa(q), p(q)) on the solution grid.
    pub fn table(&self) -> &[[f64; 3]] {
        &self.table
    }

    pub fn kappa(&self, q: f64) -> Result<f64> {
        Ok(self.costs.gamma_up * (-self.sol.acc_at(q)?).exp())
    }

    /// Real fraction p(q) = tau_{1/kappa(q)}(q).
    pub fn p_of_q(&self, q: f64) -> Result<f64> {
        let k = self.kappa(q)?;
        Ok(q / (k + (1.0 - k) * q))
    }

    /// Inverse of `p_of_q` on [p_*, p^*].
    pub fn q_of_p(&self, p: f64) -> Result<f64> {
        let tol = 1e-12 * (1.0 + p.abs());
        if !(p >= self.p_star - tol && p <= self.p_upper + tol) {
            return Err(Error::OutOfRange {
                what: "p",
                value: p,
                lo: self.p_star,
                hi: self.p_upper,
            });
        }
        let p = p.clamp(self.p_star, self.p_upper);
        if p == self.p_star {
            return Ok(self.sol.q_star());
        }
        if p == self.p_upper {
            return Ok(self.sol.q_upper());
        }
        Ok(self.q_of_p.eval_unchecked(p))
    }

    /// Open interval of real fractions compatible with solvency.
    pub fn extended_domain(&self) -> (f64, f64) {
        let lo = if self.costs.gamma_up > 1.0 {
            -1.0 / (self.costs.gamma_up - 1.0)
        } else {
            f64::NEG_INFINITY
        };
        let hi = if self.costs.gamma_down > 1.0 {
            self.costs.gamma_down / (self.costs.gamma_down - 1.0)
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    /// Policy functions extended as constants outside the no-trade region.
    pub fn extended_policy(&self, p: f64) -> Result<Extended> {
        let (lo, hi) = self.extended_domain();
        if !(p > lo && p < hi) {
            return Err(Error::OutOfDomain { p, lo, hi });
        }
        let m = |q: f64| self.sol.params().m(q);
        Ok(if p < self.p_star {
            let q = self.sol.q_star();
            Extended {
                q_bar: mobius(self.costs.gamma_up, p)?,
                kappa_bar: self.costs.gamma_up,
                n_bar: m(q),
            }
        } else if p > self.p_upper {
            let q = self.sol.q_upper();
            Extended {
                q_bar: mobius(1.0 / self.costs.gamma_down, p)?,
                kappa_bar: 1.0 / self.costs.gamma_down,
                n_bar: m(q),
            }
        } else {
            let q = self.q_of_p(p)?;
            Extended {
                q_bar: q,
                kappa_bar: self.kappa(q)?,
                n_bar: self.sol.n_at(q)?,
            }
        })
    }

    /// Liquidation value of the position, which must be positive.
    pub fn liquidation_value(&self, x: f64, y: f64, phi: f64) -> f64 {
        x + phi.max(0.0) * y / self.costs.gamma_down - (-phi).max(0.0) * y * self.costs.gamma_up
    }

    fn state(&self, x: f64, y: f64, phi: f64) -> Result<(f64, Extended)> {
        if !(self.liquidation_value(x, y, phi) > 0.0) || !(y > 0.0) {
            return Err(Error::InsolventState);
        }
        let p = phi * y / (x + phi * y);
        let e = self.extended_policy(p)?;
        Ok((x + phi * y * e.kappa_bar, e))
    }

    /// Candidate value function at time t for cash x, price y and phi shares.
    pub fn value_function(&self, t: f64, x: f64, y: f64, phi: f64) -> Result<f64> {
        let p = self.sol.params();
        let (w, e) = self.state(x, y, phi)?;
        let r = p.risk_aversion();
        let th = p.theta();
        Ok((-p.delta() * th * t).exp() * w.powf(1.0 - r) / (1.0 - r) * e.n_bar.powf(-th * p.eic()))
    }

    /// Optimal consumption rate (x + phi y kappa) n at the extended shadow fraction.
    pub fn optimal_consumption(&self, x: f64, y: f64, phi: f64) -> Result<f64> {
        let (w, e) = self.state(x, y, phi)?;
        Ok(w * e.n_bar)
    }
}

/// Certainty equivalent ((1-R) V)^(1/(1-R)).
pub fn certainty_equivalent(value: f64, risk_aversion: f64) -> f64 {
    ((1.0 - risk_aversion) * value).powf(1.0 / (1.0 - risk_aversion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbsolver::solve_free_boundary;
    use crate::model::{example_one, example_two};
    use proptest::prelude::*;

    fn tables(p: &crate::ModelParams, gu: f64, gd: f64) -> PolicyTables {
        let c = CostParams::new(gu, gd).unwrap();
        PolicyTables::new(solve_free_boundary(p, c.xi()).unwrap(), c).unwrap()
    }

    #[test]
    fn mobius_examples() {
        assert!((mobius(1.3, 0.5).unwrap() - 0.65 / 1.15).abs() < 1e-15);
        assert_eq!(mobius(2.7, 1.0).unwrap(), 1.0);
        assert!(matches!(mobius(2.0, -1.0), Err(Error::PoleHit { .. })));
        assert_eq!(mobius(2.0, f64::INFINITY).unwrap(), 2.0);
    }

    proptest! {
        #[test]
        fn mobius_group_law(c in 0.5f64..3.0, d in 0.5f64..3.0, q in -2.0f64..3.0) {
            let inner = 1.0 + (d - 1.0) * q;
            let outer = 1.0 + (c * d - 1.0) * q;
            prop_assume!(inner.abs() > 1e-3 && outer.abs() > 1e-3);
            let a = mobius(c, mobius(d, q).unwrap()).unwrap();
            let b = mobius(c * d, q).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn kappa_boundary_values() {
        let t = tables(&example_one(), 1.3, 1.3);
        let s = t.solution();
        assert!((t.kappa(s.q_star()).unwrap() - 1.3).abs() < 1e-12);
        assert!((t.kappa(s.q_upper()).unwrap() - 1.0 / 1.3).abs() < 1e-9);
        let kr = kappa_right(s, t.costs(), 0.6).unwrap();
        assert!((kr - t.kappa(0.6).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn rescaled_costs_scale_kappa() {
        let p = example_one();
        let sol = solve_free_boundary(&p, 1.69).unwrap();
        let a = CostParams::new(1.3, 1.3).unwrap();
        let b = CostParams::new(1.625, 1.04).unwrap();
        for q in [0.45, 0.6, 0.9] {
            let ka = kappa(&sol, &a, q).unwrap();
            let kb = kappa(&sol, &b, q).unwrap();
            assert!((kb - ka * 1.625 / 1.3).abs() < 1e-12);
        }
        assert!(matches!(
            kappa(&sol, &CostParams::new(1.2, 1.2).unwrap(), 0.5),
            Err(Error::CostMismatch)
        ));
    }

    #[test]
    fn set_one_boundaries_exceed_set_three() {
        let p = example_one();
        let a = tables(&p, 1.3, 1.3);
        let b = tables(&p, 1.625, 1.04);
        assert!(a.p_star() > b.p_star() && a.p_upper() > b.p_upper());
        assert_eq!(a.solution().q_star(), b.solution().q_star());
    }

    #[test]
    fn q_of_p_ends_and_unit_point() {
        let t = tables(&example_two(), 1.3, 1.3);
        let s = t.solution();
        assert_eq!(t.q_of_p(t.p_star()).unwrap(), s.q_star());
        assert_eq!(t.q_of_p(t.p_upper()).unwrap(), s.q_upper());
        assert!((t.q_of_p(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((t.p_of_q(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(t.q_of_p(t.p_upper() + 0.01).is_err());
    }

    #[test]
    fn q_of_p_solves_its_equation() {
        let t = tables(&example_one(), 1.3, 1.3);
        let p = t.solution().params();
        let h = 1e-6;
        for j in 1..50 {
            let x = t.p_star() + (t.p_upper() - t.p_star()) * j as f64 / 50.0;
            let q = t.q_of_p(x).unwrap();
            let fd = (t.q_of_p(x + h).unwrap() - t.q_of_p(x - h).unwrap()) / (2.0 * h);
            let rhs = (p.ell(q) - t.solution().n_at(q).unwrap()) / (p.ell(x) - p.m(x));
            assert!((fd - rhs).abs() < 1e-6 * rhs.abs().max(1.0), "{fd} vs {rhs}");
        }
    }

    #[test]
    fn extended_policy_is_constant_outside() {
        let t = tables(&example_one(), 1.3, 1.3);
        let s = t.solution();
        let p = s.params();
        let below = t.extended_policy(t.p_star() - 0.05).unwrap();
        assert_eq!(below.kappa_bar, 1.3);
        assert_eq!(below.n_bar, p.m(s.q_star()));
        let above = t.extended_policy(t.p_upper() + 0.02).unwrap();
        assert_eq!(above.kappa_bar, 1.0 / 1.3);
        assert_eq!(above.n_bar, p.m(s.q_upper()));
        assert!(t.extended_policy(-10.0).is_err());
    }

    #[test]
    fn value_function_properties() {
        let t = tables(&example_one(), 1.3, 1.3);
        let (x, y, phi) = (1.0, 1.0, 0.2);
        let v = t.value_function(0.0, x, y, phi).unwrap();
        assert!(v > 0.0);
        // scale invariance
        let v2 = t.value_function(0.0, 2.0 * x, y, 2.0 * phi).unwrap();
        let r = t.solution().params().risk_aversion();
        assert!((v2 - 2f64.powf(1.0 - r) * v).abs() < 1e-12 * v2.abs());
        // bulk purchase up to p_* leaves the value unchanged
        let (x0, phi0) = (1.0, 0.05);
        assert!(phi0 / (x0 + phi0) < t.p_star());
        let ps = t.p_star();
        // solve for shares bought so that (phi0+d)/(x0 - 1.3 d + phi0 + d) = p_*
        let d = (ps * (x0 + phi0) - phi0) / (1.0 + ps * 0.3);
        let before = t.value_function(0.0, x0, 1.0, phi0).unwrap();
        let after = t.value_function(0.0, x0 - 1.3 * d, 1.0, phi0 + d).unwrap();
        assert!(((before - after) / before).abs() < 1e-12);
        // adding a solvent position never lowers the value
        let more = t.value_function(0.0, x0 + 0.1, 1.0, phi0 + 0.05).unwrap();
        assert!(more >= before);
        assert!(matches!(
            t.value_function(0.0, -1.0, 1.0, 0.5),
            Err(Error::InsolventState)
        ));
    }

    #[test]
    fn consumption_at_lower_boundary() {
        let t = tables(&example_one(), 1.3, 1.3);
        let s = t.solution();
        let ps = t.p_star();
        let (x, phi) = (1.0 - ps, ps);
        let c = t.optimal_consumption(x, 1.0, phi).unwrap();
        let expect = (x + phi * 1.3) * s.params().m(s.q_star());
        assert!((c - expect).abs() < 1e-12);
    }
}
