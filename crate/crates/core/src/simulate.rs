//! Monte Carlo simulation of the optimal policy.
//!
//! The shadow fraction Q is a diffusion on [q_*, q^*] reflected at both boundaries; the
//! push at q_* (G_up) is a purchase and the push at q^* (G_down) a sale. Share holdings,
//! cash and consumption are read off Q, the price Y and the accumulated pushes.
//! The scheme is projection Euler: propose an Euler step, project onto the wedge and
//! book the projected distance as local time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::policy::PolicyTables;

/// Minimum number of paths for a Monte Carlo mean to be reported.
pub const MIN_MARTINGALE_PATHS: usize = 1000;

const TABLE_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub initial_state: InitialState,
    /// Keep every `record_every`-th step in the stored path (the last step is always kept).
    pub record_every: usize,
    /// Brownian increments are sums of this many finer normals, so that a run at dt with
    /// 2 substeps shares its Brownian path with a run at dt/2 and the same seed.
    pub brownian_substeps: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: 1.0,
            n_paths: 10_000,
            seed: 0,
            initial_state: InitialState {
                x: 0.5,
                y: 1.0,
                phi: 0.5,
            },
            record_every: 100,
            brownian_substeps: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            v.push(format!("horizon {} must be at least dt", self.horizon));
        }
        if self.n_paths == 0 {
            v.push("n_paths must be positive".into());
        }
        if self.record_every == 0 {
            v.push("record_every must be positive".into());
        }
        if self.brownian_substeps == 0 {
            v.push("brownian_substeps must be positive".into());
        }
        let s = self.initial_state;
        if !(s.y > 0.0 && s.y.is_finite() && s.x.is_finite() && s.phi.is_finite()) {
            v.push("initial state must be finite with y > 0".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v.join("; ")))
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// Trade executed at time zero to move the position into the no-trade region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BulkTrade {
    None,
    Buy { shares: f64 },
    Sell { shares: f64 },
}

/// State immediately after the initial bulk trade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartState {
    pub q0: f64,
    pub phi0: f64,
    pub x0: f64,
    pub trade: BulkTrade,
}

/// Per-step diagnostics accumulated at full time resolution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub steps: usize,
    /// Largest distance of Q from the wedge after projection.
    pub max_confinement_gap: f64,
    /// Steps with a negative push, both pushes active, or a push away from its boundary.
    pub push_violations: usize,
    pub lower_pushes: usize,
    pub upper_pushes: usize,
    /// max |Q - Y kappa Phi / (X + Y kappa Phi)|.
    pub max_self_consistency: f64,
    /// Sum over steps of the squared cash-dynamics residual relative to shadow wealth.
    pub cash_sq_sum: f64,
    pub cash_abs_max: f64,
    pub solvency_violations: usize,
    pub phi_sign_changes: usize,
    /// Whether Q reached 1 from below.
    pub crossed_one: bool,
    /// Smallest Q after the first time Q reached 1 (only meaningful if `crossed_one`).
    pub min_after_crossing: f64,
    /// |V_closed / V_direct - 1| at the horizon.
    pub closed_form_gap: f64,
}

/// Thinned path of the optimally controlled state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPath {
    pub start: StartState,
    pub times: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub g_up: Vec<f64>,
    pub g_down: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub y: Vec<f64>,
    /// Candidate value function along the path.
    pub value: Vec<f64>,
    /// Aggregator integral plus value; a martingale under the optimal policy.
    pub m_hat: Vec<f64>,
    pub stats: StepStats,
}

impl SimPath {
    fn with_capacity(start: StartState, n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            start,
            times: v(),
            q_hat: v(),
            g_up: v(),
            g_down: v(),
            phi_hat: v(),
            x_hat: v(),
            c_hat: v(),
            y: v(),
            value: v(),
            m_hat: v(),
            stats: StepStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Cubic Hermite tables of n and kappa on a uniform grid over the wedge.
#[derive(Debug, Clone)]
pub struct PolicyGrid {
    lo: f64,
    hi: f64,
    inv_h: f64,
    /// Per cell: cubic coefficients in the local variable s in [0, 1] for n and kappa.
    cells: Vec<[[f64; 4]; 2]>,
}

impl PolicyGrid {
    pub fn new(tables: &PolicyTables) -> Result<Self> {
        let sol = tables.solution();
        let p = sol.params();
        let k = p.eic() / (1.0 - p.eic());
        let (lo, hi) = (sol.q_star(), sol.q_upper());
        let h = (hi - lo) / TABLE_CELLS as f64;
        let mut nodes = Vec::with_capacity(TABLE_CELLS + 1);
        for i in 0..=TABLE_CELLS {
            let q = if i == TABLE_CELLS { hi } else { lo + h * i as f64 };
            let n = sol.n_at(q)?;
            let dn = sol.dn_at(q)?;
            let kap = tables.kappa(q)?;
            let dkap = kap * k * sol.slope_at(q)? / (q * n);
            nodes.push([n, dn, kap, dkap]);
        }
        let cubic = |y0: f64, d0: f64, y1: f64, d1: f64| {
            let (d0, d1) = (d0 * h, d1 * h);
            [y0, d0, 3.0 * (y1 - y0) - 2.0 * d0 - d1, 2.0 * (y0 - y1) + d0 + d1]
        };
        let cells = nodes
            .windows(2)
            .map(|w| {
                [
                    cubic(w[0][0], w[0][1], w[1][0], w[1][1]),
                    cubic(w[0][2], w[0][3], w[1][2], w[1][3]),
                ]
            })
            .collect();
        Ok(Self {
            lo,
            hi,
            inv_h: 1.0 / h,
            cells,
        })
    }

    /// (n(q), kappa(q)) for q in the wedge (clamped).
    #[inline]
    pub fn eval(&self, q: f64) -> (f64, f64) {
        let u = ((q - self.lo) * self.inv_h).max(0.0);
        let i = (u as usize).min(TABLE_CELLS - 1);
        let s = (u - i as f64).min(1.0);
        let [a, b] = &self.cells[i];
        (
            a[0] + s * (a[1] + s * (a[2] + s * a[3])),
            b[0] + s * (b[1] + s * (b[2] + s * b[3])),
        )
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Diffusion and drift coefficients of the reflected shadow fraction at q.
pub fn drift_diffusion(tables: &PolicyTables, q: f64) -> Result<(f64, f64)> {
    let n = tables.solution().n_at(q)?;
    Ok(coefficients(tables.solution().params(), q, n))
}

#[inline]
fn coefficients(p: &ModelParams, q: f64, n: f64) -> (f64, f64) {
    let gap = p.ell(q) - n;
    let a = p.sigma() * gap / p.d_coef();
    let b = q * (n - 2.0 * p.theta() * p.eic() * gap);
    (a, b)
}

/// One projection Euler step on [lo, hi]: returns (new q, push up, push down).
#[inline]
pub fn reflect_step(q: f64, a: f64, b: f64, db: f64, dt: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let prop = q + a * db + b * dt;
    if prop < lo {
        (lo, lo - prop, 0.0)
    } else if prop > hi {
        (hi, 0.0, prop - hi)
    } else {
        (prop, 0.0, 0.0)
    }
}

/// Initial bulk trade into the no-trade region.
pub fn initial_trade(tables: &PolicyTables, state: InitialState) -> Result<StartState> {
    let InitialState { x, y, phi } = state;
    if !(tables.liquidation_value(x, y, phi) > 0.0) || !(y > 0.0) {
        return Err(Error::InsolventState);
    }
    let sol = tables.solution();
    let (gu, gd) = (tables.costs().gamma_up, tables.costs().gamma_down);
    let (qs, qu) = (sol.q_star(), sol.q_upper());
    // shadow fractions if the whole position were valued at the buying or selling price
    if phi * y * gu * (1.0 - qs) < qs * x {
        let w = x + phi * y * gu;
        let phi0 = qs * w / (y * gu);
        return Ok(StartState {
            q0: qs,
            phi0,
            x0: x - (phi0 - phi) * y * gu,
            trade: BulkTrade::Buy { shares: phi0 - phi },
        });
    }
    if phi * y * (1.0 - qu) > qu * x * gd {
        let w = x + phi * y / gd;
        let phi0 = qu * w * gd / y;
        return Ok(StartState {
            q0: qu,
            phi0,
            x0: x + (phi - phi0) * y / gd,
            trade: BulkTrade::Sell { shares: phi - phi0 },
        });
    }
    let p = phi * y / (x + phi * y);
    Ok(StartState {
        q0: tables.q_of_p(p)?,
        phi0: phi,
        x0: x,
        trade: BulkTrade::None,
    })
}

/// Signed value from its logarithm: sign * exp(log_abs).
#[inline]
fn signed_exp(sign: f64, log_abs: f64) -> f64 {
    sign * log_abs.exp()
}

struct PathRunner<'a> {
    p: &'a ModelParams,
    grid: &'a PolicyGrid,
    cfg: &'a SimConfig,
    start: StartState,
    /// (gamma_up, gamma_down).
    costs: (f64, f64),
}

impl PathRunner<'_> {
    fn run(&self, index: u64) -> SimPath {
        let p = self.p;
        let cfg = self.cfg;
        let (lo, hi) = self.grid.bounds();
        let steps = cfg.steps();
        let dt = cfg.dt;
        let sub = cfg.brownian_substeps;
        let sub_scale = (dt / sub as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);

        let (r, s, rr) = (p.r(), p.eic(), p.risk_aversion());
        let (sigma, delta, theta, rho) = (p.sigma(), p.delta(), p.theta(), p.rho());
        let y_drift = (p.mu() - 0.5 * sigma * sigma) * dt;
        let (gu, gd) = self.costs;
        let v_sign = (1.0 - rr).signum();
        let g_sign = (1.0 - s).signum();
        let log_v_den = (1.0 - rr).abs().ln();
        let log_g_den = (1.0 - s).abs().ln();
        let mut stats = StepStats {
            min_after_crossing: f64::INFINITY,
            ..StepStats::default()
        };

        let mut t = 0.0;
        let mut q = self.start.q0;
        let mut y = cfg.initial_state.y;
        let mut phi = self.start.phi0;
        let (mut g_up, mut g_down) = (0.0, 0.0);
        let (mut n, kap) = self.grid.eval(q);
        let mut x = (1.0 - q) / q * y * kap * phi;
        // log of |V| = -delta theta t + (1-R) ln W - theta S ln n - ln|1-R|
        let log_abs_v = |t: f64, w: f64, n: f64| {
            -delta * theta * t + (1.0 - rr) * w.ln() - theta * s * n.ln() - log_v_den
        };
        let aggregator = |t: f64, c: f64, v: f64| {
            // e^{-delta t} C^{1-S}/(1-S) ((1-R) V)^rho
            signed_exp(
                g_sign,
                -delta * t + (1.0 - s) * c.ln() - log_g_den + rho * ((1.0 - rr) * v).ln(),
            )
        };
        let mut w = y * kap * phi / q;
        let mut v = signed_exp(v_sign, log_abs_v(0.0, w, n));
        let mut c = w * n;
        let mut g_val = aggregator(0.0, c, v);
        let mut integral = 0.0;
        let log_v0 = v.abs().ln();
        let mut log_closed = 0.0;
        let mut phi_sign = phi.signum();

        let cap = steps / cfg.record_every + 2;
        let mut path = SimPath::with_capacity(self.start, cap);
        let record = |path: &mut SimPath, t, q, gu_, gd_, phi, x, c, y, v, m| {
            path.times.push(t);
            path.q_hat.push(q);
            path.g_up.push(gu_);
            path.g_down.push(gd_);
            path.phi_hat.push(phi);
            path.x_hat.push(x);
            path.c_hat.push(c);
            path.y.push(y);
            path.value.push(v);
            path.m_hat.push(m);
        };
        record(&mut path, t, q, g_up, g_down, phi, x, c, y, v, v);
        if q >= 1.0 && lo < 1.0 {
            stats.crossed_one = true;
            stats.min_after_crossing = q;
        }

        for k in 1..=steps {
            let mut zsum = 0.0;
            for _ in 0..sub {
                let z: f64 = rng.sample(StandardNormal);
                zsum += z;
            }
            let db = sub_scale * zsum;
            let (a, b) = coefficients(p, q, n);
            let (q_new, du, dd) = reflect_step(q, a, b, db, dt, lo, hi);
            let y_new = y * (y_drift + sigma * db).exp();
            let phi_new = phi * (du / lo - dd / hi).exp();
            let t_new = k as f64 * dt;
            let (n_new, kap_new) = self.grid.eval(q_new);
            let x_new = (1.0 - q_new) / q_new * y_new * kap_new * phi_new;

            // cash dynamics dX = (rX - C) dt - Y kappa dPhi, relative to shadow wealth
            let cash = (x_new - x) - (r * x - c) * dt + y_new * kap_new * (phi_new - phi);
            let rel = cash / w;
            stats.cash_sq_sum += rel * rel;
            stats.cash_abs_max = stats.cash_abs_max.max(rel.abs());

            // closed form: stochastic exponential of sigma (1-R) Q dB times exp(-theta int n)
            let vol = sigma * (1.0 - rr) * q;
            log_closed += vol * db - 0.5 * vol * vol * dt - theta * n * dt;

            let w_new = y_new * kap_new * phi_new / q_new;
            let v_new = signed_exp(v_sign, log_abs_v(t_new, w_new, n_new));
            let c_new = w_new * n_new;
            let g_new = aggregator(t_new, c_new, v_new);
            integral += 0.5 * (g_val + g_new) * dt;

            // diagnostics
            let gap = (lo - q_new).max(q_new - hi).max(0.0);
            stats.max_confinement_gap = stats.max_confinement_gap.max(gap);
            if du < 0.0 || dd < 0.0 || (du > 0.0 && (dd > 0.0 || q_new != lo)) || (dd > 0.0 && q_new != hi) {
                stats.push_violations += 1;
            }
            stats.lower_pushes += (du > 0.0) as usize;
            stats.upper_pushes += (dd > 0.0) as usize;
            let yk = y_new * kap_new * phi_new;
            let sc = (q_new - yk / (x_new + yk)).abs();
            stats.max_self_consistency = stats.max_self_consistency.max(sc);
            let liq = x_new + phi_new.max(0.0) * y_new / gd - (-phi_new).max(0.0) * y_new * gu;
            if !(liq > 0.0) {
                stats.solvency_violations += 1;
            }
            if phi_new.signum() != phi_sign {
                stats.phi_sign_changes += 1;
                phi_sign = phi_new.signum();
            }
            if lo < 1.0 {
                if stats.crossed_one {
                    stats.min_after_crossing = stats.min_after_crossing.min(q_new);
                } else if q_new >= 1.0 {
                    stats.crossed_one = true;
                    stats.min_after_crossing = q_new;
                }
            }

            (t, q, y, phi, n, x, w, v, c, g_val) = (
                t_new, q_new, y_new, phi_new, n_new, x_new, w_new, v_new, c_new, g_new,
            );
            g_up += du;
            g_down += dd;
            if k % cfg.record_every == 0 || k == steps {
                record(&mut path, t, q, g_up, g_down, phi, x, c, y, v, integral + v);
            }
        }
        let v_closed = signed_exp(v_sign, log_v0 + log_closed);
        stats.closed_form_gap = (v_closed / v - 1.0).abs();
        stats.steps = steps;
        path.stats = stats;
        path
    }
}

/// Simulate `cfg.n_paths` independent paths of the optimal policy.
///
/// Path i draws from the ChaCha8 stream i of `cfg.seed`, so results do not depend on
/// thread scheduling.
pub fn simulate_paths(tables: &PolicyTables, cfg: &SimConfig) -> Result<Vec<SimPath>> {
    cfg.validate()?;
    let start = initial_trade(tables, cfg.initial_state)?;
    let grid = PolicyGrid::new(tables)?;
    let runner = PathRunner {
        p: tables.solution().params(),
        grid: &grid,
        cfg,
        start,
        costs: (tables.costs().gamma_up, tables.costs().gamma_down),
    };
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| runner.run(i))
        .collect())
}

/// Residual checks for one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathReport {
    /// Largest self-consistency residual over all steps and, independently, over the
    /// stored samples with kappa from the policy tables.
    pub self_consistency: f64,
    /// Root mean square of the per-step cash-dynamics residual relative to wealth.
    pub cash_residual_rms: f64,
    pub cash_residual_max: f64,
    pub confinement_gap: f64,
    /// Push increments that were negative or occurred away from their boundary.
    pub push_violations: usize,
    pub pushes_monotone: bool,
    pub phi_one_signed: bool,
    pub solvency_violations: usize,
}

pub fn path_diagnostics(path: &SimPath, tables: &PolicyTables) -> Result<PathReport> {
    let st = &path.stats;
    let mut sc = st.max_self_consistency;
    let mut gap = st.max_confinement_gap;
    let sol = tables.solution();
    for i in 0..path.len() {
        let q = path.q_hat[i];
        gap = gap.max((sol.q_star() - q).max(q - sol.q_upper()).max(0.0));
        let yk = path.y[i] * tables.kappa(q)? * path.phi_hat[i];
        let x = (1.0 - q) / q * yk;
        sc = sc.max((q - yk / (x + yk)).abs());
    }
    let monotone = |g: &[f64]| g.first() == Some(&0.0) && g.windows(2).all(|w| w[1] >= w[0]);
    let sign = path.start.phi0.signum();
    Ok(PathReport {
        self_consistency: sc,
        cash_residual_rms: (st.cash_sq_sum / st.steps.max(1) as f64).sqrt(),
        cash_residual_max: st.cash_abs_max,
        confinement_gap: gap,
        push_violations: st.push_violations,
        pushes_monotone: monotone(&path.g_up) && monotone(&path.g_down),
        phi_one_signed: st.phi_sign_changes == 0 && path.phi_hat.iter().all(|p| p.signum() == sign),
        solvency_violations: st.solvency_violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub t_check: f64,
    /// Monte Carlo mean of M at `t_check`.
    pub mean: f64,
    pub std_err: f64,
    /// M at time zero (the value function after the bulk trade).
    pub m0: f64,
    /// Mean of |V_closed / V_direct - 1| at the horizon.
    pub closed_form_gap: f64,
}

impl MartingaleReport {
    /// |mean - M_0| in units of the standard error.
    pub fn z_score(&self) -> f64 {
        if self.std_err > 0.0 {
            (self.mean - self.m0).abs() / self.std_err
        } else if self.mean == self.m0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Monte Carlo mean and standard error of M at a stored time.
pub fn martingale_check(paths: &[SimPath], t_check: f64) -> Result<MartingaleReport> {
    if paths.len() < MIN_MARTINGALE_PATHS {
        return Err(Error::TooFewPaths {
            need: MIN_MARTINGALE_PATHS,
            got: paths.len(),
        });
    }
    let times = &paths[0].times;
    let horizon = times[times.len() - 1];
    let tol = 1e-9 * (1.0 + horizon);
    let idx = times
        .iter()
        .position(|&t| (t - t_check).abs() <= tol)
        .ok_or(Error::OutOfRange {
            what: "t_check (must be a stored time)",
            value: t_check,
            lo: 0.0,
            hi: horizon,
        })?;
    let n = paths.len() as f64;
    let (sum, sum_sq) = paths
        .par_iter()
        .map(|p| (p.m_hat[idx], p.m_hat[idx] * p.m_hat[idx]))
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let gap = paths.iter().map(|p| p.stats.closed_form_gap).sum::<f64>() / n;
    Ok(MartingaleReport {
        t_check,
        mean,
        std_err: (var / n).sqrt(),
        m0: paths[0].m_hat[0],
        closed_form_gap: gap,
    })
}

/// Aggregate diagnostics over a set of paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    pub n_paths: usize,
    pub steps: usize,
    pub q_star: f64,
    pub q_upper: f64,
    pub start: StartState,
    pub confinement_gap: f64,
    pub push_violations: usize,
    pub pushes_monotone: bool,
    pub self_consistency: f64,
    pub cash_residual_rms: f64,
    pub cash_residual_max: f64,
    /// Fraction of steps with a push at the lower and the upper boundary.
    pub lower_push_fraction: f64,
    pub upper_push_fraction: f64,
    pub solvency_violations: usize,
    pub phi_one_signed: bool,
    /// Paths on which Q reached 1 from below, and the deepest return below 1 afterwards
    /// in units of sqrt(dt).
    pub crossed_one: usize,
    pub return_depth_over_sqrt_dt: f64,
    pub martingale: Option<MartingaleReport>,
}

pub fn summarize(paths: &[SimPath], tables: &PolicyTables, cfg: &SimConfig) -> Result<SimSummary> {
    let reports = paths
        .par_iter()
        .map(|p| path_diagnostics(p, tables))
        .collect::<Result<Vec<_>>>()?;
    let steps: usize = paths.iter().map(|p| p.stats.steps).sum();
    let sq: f64 = paths.iter().map(|p| p.stats.cash_sq_sum).sum();
    let crossed: Vec<&SimPath> = paths.iter().filter(|p| p.stats.crossed_one).collect();
    let depth = crossed
        .iter()
        .map(|p| (1.0 - p.stats.min_after_crossing).max(0.0))
        .fold(0.0, f64::max);
    let sol = tables.solution();
    let martingale = if paths.len() >= MIN_MARTINGALE_PATHS {
        let t = paths[0].times[paths[0].len() - 1];
        Some(martingale_check(paths, t)?)
    } else {
        None
    };
    let fmax = |f: fn(&PathReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    Ok(SimSummary {
        n_paths: paths.len(),
        steps: cfg.steps(),
        q_star: sol.q_star(),
        q_upper: sol.q_upper(),
        start: paths[0].start,
        confinement_gap: fmax(|r| r.confinement_gap),
        push_violations: reports.iter().map(|r| r.push_violations).sum(),
        pushes_monotone: reports.iter().all(|r| r.pushes_monotone),
        self_consistency: fmax(|r| r.self_consistency),
        cash_residual_rms: (sq / steps.max(1) as f64).sqrt(),
        cash_residual_max: fmax(|r| r.cash_residual_max),
        lower_push_fraction: paths.iter().map(|p| p.stats.lower_pushes).sum::<usize>() as f64
            / steps.max(1) as f64,
        upper_push_fraction: paths.iter().map(|p| p.stats.upper_pushes).sum::<usize>() as f64
            / steps.max(1) as f64,
        solvency_violations: reports.iter().map(|r| r.solvency_violations).sum(),
        phi_one_signed: reports.iter().all(|r| r.phi_one_signed),
        crossed_one: crossed.len(),
        return_depth_over_sqrt_dt: depth / cfg.dt.sqrt(),
        martingale,
    })
}
