//! Free-boundary problem for the consumption ratio n(q).
//!
//! A member of the shooting family starts on m at z, leaves it tangentially and runs
//! until it meets m again at zeta(z). Along the way the integral
//! `log Sigma(z) = int -(1/(q(1-q))) (m-n)/(ell-n) dq` is carried as a second state
//! component. The shadow boundaries are z and zeta(z) for the z with Sigma(z) = xi.
//!
//! The state integrated is w = n - m(q) rather than n. When the Merton fraction lies
//! beyond 1 the branch passes the singular point q = 1; there the equation is very stiff
//! and the solver hands over to the power series in [`crate::series`].

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::model::ModelParams;
use crate::ode::{integrate, OdeOptions, Outcome};
use crate::quadrature::gauss_legendre8;
use crate::roots::{brent, RootOptions};
use crate::series::{switch_radius, SingularSeries};
use crate::wellposed::{classify, m_roots};

/// |q_M - 1| below which the upper boundary is pinned at 1.
pub const UNIT_MERTON_TOL: f64 = 1e-9;

const SERIES_PANELS: usize = 8;
const SAMPLES_PER_STEP: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub ode: OdeOptions,
    /// Bracket width at which the root find on z stops.
    pub x_tol: f64,
    /// Tolerance on |log Sigma - log xi|, relative to min(1, log xi).
    pub f_rel_tol: f64,
    /// Length of the seed step off the start point, in units of max(1, |q_M|).
    pub seed_scale: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            x_tol: 1e-13,
            f_rel_tol: 1e-10,
            seed_scale: 1e-6,
            max_iter: 200,
        }
    }
}

impl SolverOptions {
    /// Default options with the integrator tolerances scaled by `factor`.
    pub fn scaled_tolerance(factor: f64) -> Self {
        let mut o = Self::default();
        o.ode.rtol *= factor;
        o.ode.atol *= factor;
        o
    }
}

/// One point of a solved branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub q: f64,
    pub n: f64,
    /// dn/dq.
    pub dn: f64,
    /// Integral of the log-Sigma integrand from the lower boundary to q.
    pub acc: f64,
    /// The integrand itself at q.
    pub dacc: f64,
}

/// Right-hand side n' = ((1-S)/S) (n/(1-q)) (m-n)/(ell-n).
pub fn ode_rhs(p: &ModelParams, q: f64, n: f64) -> Result<f64> {
    let den = p.ell(q) - n;
    if (1.0 - q).abs() < 1e-12 || den.abs() < 1e-14 * (1.0 + n.abs()) {
        return Err(Error::SingularPoint { q, n });
    }
    Ok(p.k_coef() * n / (1.0 - q) * (p.m(q) - n) / den)
}

/// (n', log-Sigma integrand) in terms of w = n - m(q).
fn field(p: &ModelParams, q: f64, w: f64) -> Option<(f64, f64)> {
    let g = q * (1.0 - q);
    let den = p.d_coef() * g - w;
    if den == 0.0 || g == 0.0 {
        return None;
    }
    let n = w + p.m(q);
    let o = -p.k_coef() * n * w / ((1.0 - q) * den);
    let i = w / (g * den);
    (o.is_finite() && i.is_finite()).then_some((o, i))
}

fn no_crossing(z: f64, reason: &str) -> Error {
    Error::NoCrossing {
        z,
        reason: reason.to_string(),
    }
}

/// Result of shooting from one start point.
#[derive(Debug, Clone)]
pub struct Shot {
    pub z: f64,
    pub zeta: f64,
    pub log_sigma: f64,
    /// Samples in increasing q, with `acc` measured from the lower end.
    pub samples: Vec<Sample>,
    pub crossed_one: bool,
    /// Interval around 1 on which the series represents the branch.
    series_span: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct RightBranch {
    zeta: f64,
    /// Integral from q = 1 to zeta.
    log_sigma: f64,
    /// Samples on (1, zeta] with `acc` measured from q = 1.
    samples: Vec<Sample>,
    hi: f64,
}

/// Shooting family for fixed parameters. The branch beyond q = 1 does not depend on the
/// start point and is computed at most once.
#[derive(Debug)]
pub struct Shooter {
    p: ModelParams,
    opts: SolverOptions,
    dir: f64,
    series: Option<(SingularSeries, f64)>,
    right: OnceLock<Result<RightBranch>>,
}

impl Shooter {
    pub fn new(p: &ModelParams, opts: SolverOptions) -> Self {
        let qm = p.q_merton();
        let dir = if qm > 0.0 { 1.0 } else { -1.0 };
        let series = (qm > 1.0 - UNIT_MERTON_TOL && p.m(1.0) > 0.0)
            .then(|| (SingularSeries::new(p), switch_radius(p)));
        Self {
            p: *p,
            opts,
            dir,
            series,
            right: OnceLock::new(),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    /// Start-point interval as (near, far): log Sigma tends to its smallest value at
    /// `near` and grows toward `far`.
    pub fn domain(&self) -> Result<(f64, f64)> {
        let p = &self.p;
        let qm = p.q_merton();
        let mm = p.m_merton();
        let s_lt_one = p.eic() < 1.0;
        let roots = m_roots(p);
        let dom = if self.dir > 0.0 {
            if mm > 0.0 {
                let far = match (s_lt_one, roots) {
                    (false, Some((a, _))) => a.max(0.0),
                    _ => 0.0,
                };
                (qm, far)
            } else {
                let (a, _) = roots.ok_or(Error::IllPosedFrictionless(mm))?;
                (qm.min(a), 0.0)
            }
        } else if mm > 0.0 {
            let far = match (s_lt_one, roots) {
                (false, Some((_, b))) => b.min(0.0),
                _ => 0.0,
            };
            (qm, far)
        } else {
            let (_, b) = roots.ok_or(Error::IllPosedFrictionless(mm))?;
            (qm.max(b), 0.0)
        };
        if (dom.1 - dom.0) * self.dir >= 0.0 {
            return Err(Error::IllPosedFrictionless(mm));
        }
        Ok(dom)
    }

    /// Integrate (w, log Sigma) from q0 toward `limit` in the shooting direction, recording
    /// samples and enforcing n > 0 and ell - n of constant sign.
    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        z: f64,
        q0: f64,
        w0: f64,
        l0: f64,
        limit: f64,
        dir: f64,
        samples: &mut Vec<Sample>,
    ) -> Result<Outcome<2>> {
        let p = &self.p;
        let d = p.d_coef();
        let den_sign = (d * q0 * (1.0 - q0) - w0).signum();
        let span = (limit - q0) * dir;
        if !(span > 0.0) {
            return Err(no_crossing(z, "start point beyond the integration limit"));
        }
        let rhs = |s: f64, y: &[f64; 2]| {
            let q = q0 + dir * s;
            let (o, i) = field(p, q, y[0])?;
            Some([dir * (o - p.m_prime(q)), i])
        };
        let observer = |dense: &crate::ode::Dense<2>, t_cut: f64| -> Result<()> {
            for j in 1..=SAMPLES_PER_STEP {
                let s = dense.t0 + (t_cut - dense.t0) * j as f64 / SAMPLES_PER_STEP as f64;
                let y = if j == SAMPLES_PER_STEP && t_cut == dense.t1() {
                    dense.eval(dense.t1())
                } else {
                    dense.eval(s)
                };
                let q = q0 + dir * s;
                let w = y[0];
                let n = w + p.m(q);
                if !(n > 0.0) {
                    return Err(no_crossing(z, "consumption ratio reached zero"));
                }
                let den = d * q * (1.0 - q) - w;
                if den.signum() != den_sign {
                    return Err(no_crossing(z, "branch reached ell"));
                }
                let (o, i) = field(p, q, w).ok_or(Error::SingularPoint { q, n })?;
                samples.push(Sample {
                    q,
                    n,
                    dn: o,
                    acc: y[1],
                    dacc: i,
                });
            }
            Ok(())
        };
        integrate(rhs, 0.0, [w0, l0], span, &self.opts.ode, |_, y| y[0], observer)
    }

    fn right_branch(&self) -> Result<&RightBranch> {
        self.right
            .get_or_init(|| self.compute_right())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compute_right(&self) -> Result<RightBranch> {
        let (series, hs) = self.series.as_ref().expect("series available");
        let qm = self.p.q_merton();
        let hr = hs.min(0.25 * (qm - 1.0));
        let mut samples = Vec::new();
        let mut acc = 0.0;
        for j in 1..=SERIES_PANELS {
            let a = hr * (j - 1) as f64 / SERIES_PANELS as f64;
            let b = hr * j as f64 / SERIES_PANELS as f64;
            acc += gauss_legendre8(|h| series.integrand(h), a, b);
            samples.push(Sample {
                q: 1.0 + b,
                n: series.n(b),
                dn: series.dn(b),
                acc,
                dacc: series.integrand(b),
            });
        }
        let q0 = 1.0 + hr;
        let out = self.run(1.0, q0, series.w(hr), acc, 3.0 * qm - 2.0, 1.0, &mut samples)?;
        match out {
            Outcome::Event { t, y } => Ok(RightBranch {
                zeta: q0 + t,
                log_sigma: y[1],
                samples,
                hi: q0,
            }),
            Outcome::Reached { .. } => Err(no_crossing(1.0, "no crossing beyond the singular point")),
        }
    }

    /// Shoot from (z, m(z)) to the next crossing with m.
    pub fn shoot(&self, z: f64) -> Result<Shot> {
        let p = &self.p;
        let dir = self.dir;
        let qm = p.q_merton();
        if !(p.m(z) > 0.0) {
            return Err(no_crossing(z, "m(z) <= 0"));
        }
        if !((qm - z) * dir > 0.0) {
            return Err(no_crossing(z, "start point not before the Merton fraction"));
        }
        let singular = self.series.is_some() && z < 1.0;
        if z > 1.0 - UNIT_MERTON_TOL && z < 1.0 + UNIT_MERTON_TOL {
            return Err(Error::SingularPoint { q: z, n: p.m(z) });
        }
        let h_left = self
            .series
            .as_ref()
            .map(|(_, hs)| hs.min(0.25 * (1.0 - z)))
            .unwrap_or(0.0);

        // seed step off the double contact with m: n = m(z) + c2 (q - z)^2
        let mut step = (self.opts.seed_scale * qm.abs().max(1.0)).min(0.01 * (qm - z).abs());
        if singular {
            step = step.min(0.01 * h_left);
        }
        let delta = dir * step;
        let sig2 = p.sigma() * p.sigma();
        let (mz, dmz) = (p.m(z), p.m_prime(z));
        let c2 = mz * dmz / (sig2 * z * (1.0 - z) * (1.0 - z));
        let q1 = z + delta;
        let w1 = -dmz * delta + (c2 - p.m_coefficients()[2]) * delta * delta;
        let (o1, i1) = field(p, q1, w1).ok_or(Error::SingularPoint {
            q: q1,
            n: w1 + p.m(q1),
        })?;
        let l1 = 0.5 * step * i1;
        let mut samples = vec![
            Sample {
                q: z,
                n: mz,
                dn: 0.0,
                acc: 0.0,
                dacc: 0.0,
            },
            Sample {
                q: q1,
                n: w1 + p.m(q1),
                dn: o1,
                acc: l1,
                dacc: i1,
            },
        ];

        let limit = if singular {
            1.0 - h_left
        } else if dir < 0.0 {
            3.0 * qm
        } else if qm < 1.0 {
            1.0 - 1e-12
        } else {
            3.0 * qm - 2.0
        };
        let out = self.run(z, q1, w1, l1, limit, dir, &mut samples)?;
        let (zeta, log_sigma, crossed_one, series_span) = match out {
            Outcome::Event { t, y } => (q1 + dir * t, y[1], false, None),
            Outcome::Reached { .. } if !singular => {
                return Err(no_crossing(z, "no crossing before the integration limit"))
            }
            Outcome::Reached { y, .. } => {
                let (series, _) = self.series.as_ref().expect("singular branch has a series");
                let mut acc = y[1];
                for j in 1..=SERIES_PANELS {
                    let a = -h_left * (SERIES_PANELS - j + 1) as f64 / SERIES_PANELS as f64;
                    let b = -h_left * (SERIES_PANELS - j) as f64 / SERIES_PANELS as f64;
                    acc += gauss_legendre8(|h| series.integrand(h), a, b);
                    samples.push(Sample {
                        q: 1.0 + b,
                        n: series.n(b),
                        dn: series.dn(b),
                        acc,
                        dacc: series.integrand(b),
                    });
                }
                if (qm - 1.0).abs() < UNIT_MERTON_TOL {
                    (1.0, acc, true, Some((1.0 - h_left, 1.0)))
                } else {
                    let right = self.right_branch()?;
                    samples.extend(right.samples.iter().map(|s| Sample {
                        acc: s.acc + acc,
                        ..*s
                    }));
                    (
                        right.zeta,
                        acc + right.log_sigma,
                        true,
                        Some((1.0 - h_left, right.hi)),
                    )
                }
            }
        };

        if dir < 0.0 {
            // acc held the integral from q down to z; measure from the lower end instead
            for s in samples.iter_mut() {
                s.acc = log_sigma - s.acc;
            }
            samples.reverse();
        }
        // drop repeated abscissae (event at a step end, series hand-over)
        let mut clean: Vec<Sample> = Vec::with_capacity(samples.len());
        for s in samples {
            if clean.last().is_none_or(|l| s.q > l.q) {
                clean.push(s);
            }
        }
        Ok(Shot {
            z,
            zeta,
            log_sigma,
            samples: clean,
            crossed_one,
            series_span,
        })
    }
}

/// Solved free-boundary problem at round-trip cost xi.
#[derive(Debug, Clone)]
pub struct ShadowSolution {
    params: ModelParams,
    xi: f64,
    q_star: f64,
    q_upper: f64,
    log_sigma: f64,
    crossed_one: bool,
    samples: Vec<Sample>,
    n_interp: Hermite,
    acc_interp: Hermite,
    series: Option<(SingularSeries, (f64, f64))>,
}

impl ShadowSolution {
    fn from_shot(p: &ModelParams, xi: f64, shot: Shot) -> Self {
        let xs: Vec<f64> = shot.samples.iter().map(|s| s.q).collect();
        let n_interp = Hermite::new(
            xs.clone(),
            shot.samples.iter().map(|s| s.n).collect(),
            shot.samples.iter().map(|s| s.dn).collect(),
        );
        let acc_interp = Hermite::new(
            xs,
            shot.samples.iter().map(|s| s.acc).collect(),
            shot.samples.iter().map(|s| s.dacc).collect(),
        );
        let series = shot.series_span.map(|span| (SingularSeries::new(p), span));
        Self {
            params: *p,
            xi,
            q_star: shot.z.min(shot.zeta),
            q_upper: shot.z.max(shot.zeta),
            log_sigma: shot.log_sigma,
            crossed_one: shot.crossed_one,
            samples: shot.samples,
            n_interp,
            acc_interp,
            series,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    /// Lower shadow boundary.
    pub fn q_star(&self) -> f64 {
        self.q_star
    }
    /// Upper shadow boundary.
    pub fn q_upper(&self) -> f64 {
        self.q_upper
    }
    /// log Sigma over the solved branch; equals log xi up to solver tolerance.
    pub fn log_sigma(&self) -> f64 {
        self.log_sigma
    }
    pub fn crossed_one(&self) -> bool {
        self.crossed_one
    }
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// (q, n, accumulated log integrand) triples in increasing q.
    pub fn grid(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| [s.q, s.n, s.acc]).collect()
    }

    fn check(&self, q: f64) -> Result<f64> {
        let tol = 1e-12 * (1.0 + q.abs());
        if q < self.q_star - tol || q > self.q_upper + tol || q.is_nan() {
            return Err(Error::OutOfRange {
                what: "q",
                value: q,
                lo: self.q_star,
                hi: self.q_upper,
            });
        }
        Ok(q.clamp(self.q_star, self.q_upper))
    }

    fn series_at(&self, q: f64) -> Option<&SingularSeries> {
        match &self.series {
            Some((s, (lo, hi))) if q >= *lo && q <= *hi => Some(s),
            _ => None,
        }
    }

    pub fn n_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        Ok(match self.series_at(q) {
            Some(s) => s.n(q - 1.0),
            None => self.n_interp.eval_unchecked(q),
        })
    }

    pub fn dn_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        match self.series_at(q) {
            Some(s) => Ok(s.dn(q - 1.0)),
            None => self.n_interp.deriv(q),
        }
    }

    /// n'(q) evaluated from the equation at the interpolated n (series near q = 1).
    pub fn slope_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        match self.series_at(q) {
            Some(s) => Ok(s.dn(q - 1.0)),
            None => ode_rhs(&self.params, q, self.n_interp.eval_unchecked(q)),
        }
    }

    /// Integral of the log-Sigma integrand from the lower boundary to q.
    pub fn acc_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        Ok(self.acc_interp.eval_unchecked(q))
    }

    /// (m - n)/(ell - n) at q, continuous through q = 1.
    pub fn ratio_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        if let Some(s) = self.series_at(q) {
            return Ok(s.ratio(q - 1.0));
        }
        let p = &self.params;
        let w = self.n_interp.eval_unchecked(q) - p.m(q);
        Ok(-w / (p.d_coef() * q * (1.0 - q) - w))
    }

    /// The log-Sigma integrand -(1/(q(1-q))) (m - n)/(ell - n) at q.
    pub fn integrand_at(&self, q: f64) -> Result<f64> {
        let q = self.check(q)?;
        if let Some(s) = self.series_at(q) {
            return Ok(s.integrand(q - 1.0));
        }
        Ok(-self.ratio_at(q)? / (q * (1.0 - q)))
    }

    /// |n - m| at the lower and upper boundary.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let p = &self.params;
        let first = self.samples[0];
        let last = self.samples[self.samples.len() - 1];
        ((first.n - p.m(first.q)).abs(), (last.n - p.m(last.q)).abs())
    }

    /// Both a priori bounds on the boundaries in terms of xi.
    pub fn satisfies_bounds(&self) -> bool {
        let (lo, hi, xi) = (self.q_star, self.q_upper, self.xi);
        lo < xi * hi / (1.0 + (xi - 1.0) * hi) && hi > lo / (xi - lo * (xi - 1.0))
    }
}

/// Solve for the shadow boundaries at round-trip cost `xi`.
pub fn solve_free_boundary(p: &ModelParams, xi: f64) -> Result<ShadowSolution> {
    solve_free_boundary_with(p, xi, SolverOptions::default())
}

pub fn solve_free_boundary_with(p: &ModelParams, xi: f64, opts: SolverOptions) -> Result<ShadowSolution> {
    if !(xi > 1.0) || !xi.is_finite() {
        return Err(Error::OutOfRange {
            what: "xi",
            value: xi,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let wp = classify(p, xi)?;
    if !wp.is_well_posed() {
        return Err(Error::NotWellPosed {
            xi,
            xi_bar: wp.xi_bar,
        });
    }
    let shooter = Shooter::new(p, opts);
    let z = find_start(&shooter, xi, &opts)?;
    let shot = shooter.shoot(z)?;
    Ok(ShadowSolution::from_shot(p, xi, shot))
}

/// Root of log Sigma(z) = log xi on the shooting domain.
fn find_start(shooter: &Shooter, xi: f64, opts: &SolverOptions) -> Result<f64> {
    let target = xi.ln();
    let (near, far) = shooter.domain()?;
    // branches that fail to re-cross behave as if Sigma were infinite
    let eval = |z: f64| match shooter.shoot(z) {
        Ok(s) => Ok(s.log_sigma - target),
        Err(Error::NoCrossing { .. }) | Err(Error::StiffnessFailure(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let (mut lo, mut hi) = ((near, None::<f64>), (far, None::<f64>));
    let mut bracketed = false;
    for _ in 0..opts.max_iter {
        let mut mid = 0.5 * (lo.0 + hi.0);
        if shooter.series.is_some() && (mid - 1.0).abs() < 1e-7 {
            // a start exactly at the singular point is degenerate; any interior point will do
            mid = 1.0 - 1e-7;
        }
        if mid == lo.0 || mid == hi.0 {
            break;
        }
        let f = eval(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = (mid, Some(f));
        } else {
            hi = (mid, Some(f));
        }
        if lo.1.is_some() && hi.1.is_some_and(f64::is_finite) {
            bracketed = true;
            break;
        }
    }
    if !bracketed {
        return Err(Error::BracketFailure(xi));
    }
    let ro = RootOptions {
        x_tol: opts.x_tol,
        f_tol: opts.f_rel_tol * target.min(1.0),
        max_iter: opts.max_iter,
    };
    brent(
        |z| shooter.shoot(z).map(|s| s.log_sigma - target),
        lo.0,
        hi.0,
        lo.1.unwrap(),
        hi.1.unwrap(),
        ro,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_one, example_two};

    #[test]
    fn rhs_vanishes_on_m() {
        let p = example_one();
        for q in [0.1, 0.4, 0.9, 1.3] {
            assert_eq!(ode_rhs(&p, q, p.m(q)).unwrap(), 0.0);
        }
        assert!(matches!(ode_rhs(&p, 1.0, 0.1), Err(Error::SingularPoint { .. })));
        let q = 0.3;
        assert!(matches!(
            ode_rhs(&p, q, p.ell(q)),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn example_one_solution() {
        let p = example_one();
        let sol = solve_free_boundary(&p, 1.69).unwrap();
        let (r0, r1) = sol.boundary_residuals();
        assert!(r0 < 1e-12 && r1 < 1e-9, "{r0} {r1}");
        assert!(sol.q_star() < p.q_merton() && p.q_merton() < sol.q_upper());
        assert!(((sol.log_sigma() - 1.69f64.ln()) / 1.69f64.ln()).abs() < 1e-8);
        assert!(sol.satisfies_bounds());
        assert!(!sol.crossed_one());
        // n decreasing when R < 1
        assert!(sol.samples().windows(2).all(|w| w[1].n <= w[0].n + 1e-15));
    }

    #[test]
    fn wedges_are_nested() {
        let p = example_one();
        let a = solve_free_boundary(&p, 1.69).unwrap();
        let b = solve_free_boundary(&p, 2.1125).unwrap();
        assert!(b.q_star() < a.q_star() && b.q_upper() > a.q_upper());
    }

    #[test]
    fn example_two_crosses_one() {
        let p = example_two();
        let a = solve_free_boundary(&p, 1.69).unwrap();
        let b = solve_free_boundary(&p, 2.1125).unwrap();
        assert!(a.q_star() < 1.0 && b.q_star() < 1.0);
        assert!(a.crossed_one() && b.crossed_one());
        assert!((a.q_upper() - b.q_upper()).abs() < 1e-12);
        assert!((a.n_at(1.0).unwrap() - p.m(1.0)).abs() < 1e-15);
        // n increasing when R > 1
        assert!(a.samples().windows(2).all(|w| w[1].n >= w[0].n - 1e-15));
    }

    #[test]
    fn branch_through_one_matches_direct_integration() {
        // Integrating straight through q = 1 with tight tolerances must land on the
        // same crossing as the series hand-over.
        let p = example_two();
        let shooter = Shooter::new(&p, SolverOptions::default());
        let shot = shooter.shoot(0.8).unwrap();
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-15,
            ..Default::default()
        };
        // start just right of 1 from the left-branch value at the series edge
        let (series, _) = shooter.series.as_ref().unwrap();
        let h = 0.05;
        let w0 = series.w(h);
        let out = integrate(
            |s, y: &[f64; 1]| {
                let q = 1.0 + h + s;
                let (o, _) = field(&p, q, y[0])?;
                Some([o - p.m_prime(q)])
            },
            0.0,
            [w0],
            2.0,
            &opts,
            |_, y| y[0],
            |_, _| Ok(()),
        )
        .unwrap();
        let Outcome::Event { t, .. } = out else {
            panic!("no crossing")
        };
        assert!(
            (1.0 + h + t - shot.zeta).abs() < 1e-8,
            "{} vs {}",
            1.0 + h + t,
            shot.zeta
        );
    }

    #[test]
    fn branches_do_not_cross() {
        let p = example_one();
        let sh = Shooter::new(&p, SolverOptions::default());
        let a = ShadowSolution::from_shot(&p, 0.0, sh.shoot(0.2).unwrap());
        let b = ShadowSolution::from_shot(&p, 0.0, sh.shoot(0.25).unwrap());
        let lo = a.q_star().max(b.q_star());
        let hi = a.q_upper().min(b.q_upper());
        let sign = (a.n_at(lo + 1e-3).unwrap() - b.n_at(lo + 1e-3).unwrap()).signum();
        for j in 1..100 {
            let q = lo + (hi - lo) * j as f64 / 100.0;
            let d = a.n_at(q).unwrap() - b.n_at(q).unwrap();
            assert_eq!(d.signum(), sign);
        }
    }

    #[test]
    fn cost_map_decreasing() {
        let p = example_one();
        let sh = Shooter::new(&p, SolverOptions::default());
        let (near, far) = sh.domain().unwrap();
        let mut prev = f64::INFINITY;
        for j in 1..10 {
            let z = far + (near - far) * j as f64 / 10.0;
            let l = sh.shoot(z).unwrap().log_sigma;
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn ill_posed_is_rejected() {
        let p = example_one();
        assert!(matches!(
            solve_free_boundary(&p, 1.05),
            Err(Error::NotWellPosed { .. })
        ));
    }
}
