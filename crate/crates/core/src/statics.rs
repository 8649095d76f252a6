//! Parameter sweeps and comparative statics of the no-trade boundaries in S and R.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbsolver::{solve_free_boundary, ShadowSolution};
use crate::model::{CostParams, ModelParams};
use crate::oracle::{self, Coordinates};
use crate::policy::real_boundaries;
use crate::wellposed::classify;

/// Boundaries at one grid point. Ill-posed points and solver failures carry no boundaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub well_posed: bool,
    pub xi_bar: f64,
    pub q_star: Option<f64>,
    pub q_upper: Option<f64>,
    pub p_star: Option<f64>,
    pub p_upper: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn column(&self, f: fn(&SweepRow) -> Option<f64>) -> Vec<Option<f64>> {
        self.rows.iter().map(f).collect()
    }

    pub fn p_star(&self) -> Vec<Option<f64>> {
        self.column(|r| r.p_star)
    }

    pub fn p_upper(&self) -> Vec<Option<f64>> {
        self.column(|r| r.p_upper)
    }

    /// Whether every consecutive pair of solved points satisfies `a <= b + slack`
    /// (or `a >= b - slack` when `increasing` is false).
    pub fn is_monotone(column: &[Option<f64>], increasing: bool, slack: f64) -> bool {
        let solved: Vec<f64> = column.iter().flatten().copied().collect();
        solved.windows(2).all(|w| {
            if increasing {
                w[1] >= w[0] - slack
            } else {
                w[1] <= w[0] + slack
            }
        })
    }
}

fn sweep_point(base: &ModelParams, costs: &CostParams, param: &str, value: f64) -> Result<SweepRow> {
    let p = base.with_param(param, value)?;
    let verdict = classify(&p, costs.xi())?;
    let mut row = SweepRow {
        value,
        well_posed: verdict.is_well_posed(),
        xi_bar: verdict.xi_bar,
        q_star: None,
        q_upper: None,
        p_star: None,
        p_upper: None,
        error: None,
    };
    if !row.well_posed {
        return Ok(row);
    }
    match solve_free_boundary(&p, costs.xi()).and_then(|sol| {
        let (ps, pu) = real_boundaries(&sol, costs)?;
        Ok((sol.q_star(), sol.q_upper(), ps, pu))
    }) {
        Ok((qs, qu, ps, pu)) => {
            row.q_star = Some(qs);
            row.q_upper = Some(qu);
            row.p_star = Some(ps);
            row.p_upper = Some(pu);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    Ok(row)
}

/// Solve the free boundary at every grid value of one parameter, in parallel.
///
/// Invalid parameter values are an error; ill-posed points and solver failures are
/// reported in their rows.
pub fn sweep(param: &str, grid: &[f64], base: &ModelParams, costs: &CostParams) -> Result<SweepResult> {
    let rows = grid
        .par_iter()
        .map(|&v| sweep_point(base, costs, param, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: param.to_string(),
        values: grid.to_vec(),
        rows,
    })
}

/// Pole of the auxiliary function c, at 2S/(S+1).
pub fn aux_c_pole(p: &ModelParams) -> f64 {
    let s = p.eic();
    2.0 * s / (s + 1.0)
}

/// c(q) = ell(q) + (S-1) q/(2S - (S+1) q) (m(q) - ell(q)), separating the regions where
/// solutions of the n-equation lie above or below the ray of slope 2n/q.
pub fn aux_c(p: &ModelParams, q: f64) -> Result<f64> {
    let s = p.eic();
    let den = 2.0 * s - (s + 1.0) * q;
    if den == 0.0 {
        return Err(Error::PoleHit { c: aux_c_pole(p), q });
    }
    Ok(p.ell(q) + (s - 1.0) * q / den * (p.m(q) - p.ell(q)))
}

pub fn aux_c_prime(p: &ModelParams, q: f64) -> Result<f64> {
    let s = p.eic();
    let den = 2.0 * s - (s + 1.0) * q;
    if den == 0.0 {
        return Err(Error::PoleHit { c: aux_c_pole(p), q });
    }
    let u = (s - 1.0) * q / den;
    let du = 2.0 * s * (s - 1.0) / (den * den);
    let gap = p.m(q) - p.ell(q);
    Ok(p.ell_prime(q) + du * gap + u * (p.m_prime(q) - p.ell_prime(q)))
}

/// Which sufficient conditions for 2n - q n' > 0 on the wedge hold, and a direct test
/// on the solved grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// S < 1.
    pub eic_below_one: bool,
    pub m_zero_positive: bool,
    /// 2c - q c' > 0 on (0, 1) if q_M < 1, on (0, 2S/(S+1)) if q_M > 1 (S > 1 only).
    pub c_condition: bool,
    /// ell'(0) >= 0, which implies `c_condition`.
    pub ell_slope_shortcut: bool,
    /// R >= 2.
    pub risk_aversion_at_least_two: bool,
    /// Any of the sufficient conditions.
    pub sufficient: bool,
    /// min over the solution grid of 2n - q n'.
    pub grid_min: f64,
}

pub fn check_monotonicity_conditions(sol: &ShadowSolution) -> Result<MonotonicityReport> {
    let p = sol.params();
    let s = p.eic();
    let m0 = p.m(0.0) > 0.0;
    let shortcut = p.ell_prime(0.0) >= 0.0;
    let c_condition = if s > 1.0 {
        let top = if p.q_merton() < 1.0 { 1.0 } else { aux_c_pole(p) };
        let n = 2000;
        let mut ok = true;
        for j in 1..n {
            let q = top * j as f64 / n as f64;
            ok &= 2.0 * aux_c(p, q)? - q * aux_c_prime(p, q)? > 0.0;
        }
        ok
    } else {
        false
    };
    let r2 = p.risk_aversion() >= 2.0;
    let mut grid_min = f64::INFINITY;
    for smp in sol.samples() {
        grid_min = grid_min.min(2.0 * smp.n - smp.q * smp.dn);
    }
    Ok(MonotonicityReport {
        eic_below_one: s < 1.0,
        m_zero_positive: m0,
        c_condition,
        ell_slope_shortcut: shortcut,
        risk_aversion_at_least_two: r2,
        sufficient: s < 1.0 || (s > 1.0 && m0 && (c_condition || r2)),
        grid_min,
    })
}

/// Consumption rule c = D^(1-1/S) x of the one-period recursive-utility argument.
pub fn one_period_consumption(x: f64, d: f64, s: f64) -> f64 {
    d.powf(1.0 - 1.0 / s) * x
}

/// Exact maximiser of c^(1-S)/(1-S) + (D(x-c))^(1-S)/(1-S) over c in (0, x).
pub fn one_period_consumption_exact(x: f64, d: f64, s: f64) -> f64 {
    x / (1.0 + d.powf(1.0 / s - 1.0))
}

/// |q_* - q_*'| and |q^* - q^*'| between the adaptive solver and the brute-force
/// solver run on nbar = (S/(1-S))(n - delta/S).
pub fn affine_invariance_gap(p: &ModelParams, xi: f64, step: f64) -> Result<(f64, f64)> {
    let sol = solve_free_boundary(p, xi)?;
    let o = oracle::solve(p, xi, step, Coordinates::Affine)?;
    Ok(((sol.q_star() - o.q_star).abs(), (sol.q_upper() - o.q_upper).abs()))
}

/// `n` evenly spaced points strictly inside (a, b).
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| a + (b - a) * i as f64 / (n + 1) as f64).collect()
}

/// `n` evenly spaced points from a to b inclusive.
pub fn closed_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Base parameters of the S-sweep with R < 1 (R = 2/3, r = 0, mu = 0.2, sigma = 0.6).
pub fn eic_sweep_base(delta: f64) -> ModelParams {
    ModelParams::new(0.0, 0.2, 0.6, 2.0 / 3.0, 0.5, delta).expect("valid parameters")
}

/// Base parameters of the R-sweep with S = 1/3, delta = 0.1, r = 0, mu = 0.2, sigma = 0.6.
pub fn risk_sweep_base() -> ModelParams {
    ModelParams::new(0.0, 0.2, 0.6, 0.5, 1.0 / 3.0, 0.1).expect("valid parameters")
}

/// Parameters for which no sufficient condition holds and p_* increases in R:
/// S = 2, r = 0, delta = -0.11, mu = 0.2, sigma = 0.3, costs (1.7, 3.33).
pub fn counterexample_base() -> (ModelParams, CostParams) {
    (
        ModelParams::new(0.0, 0.2, 0.3, 1.5, 2.0, -0.11).expect("valid parameters"),
        CostParams::new(1.7, 3.33).expect("valid costs"),
    )
}
