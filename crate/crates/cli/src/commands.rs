//! Subcommand implementations. Each returns a JSON summary and an exit status.

use std::path::Path;

use serde_json::{json, Value};

use eztc_core::asymptotics::{coeffs, fit_loglog_slope, log_space};
use eztc_core::fbsolver::solve_free_boundary;
use eztc_core::model::CostParams;
use eztc_core::policy::PolicyTables;
use eztc_core::simulate::{simulate_paths, summarize};
use eztc_core::statics::sweep;
use eztc_core::wellposed::{classify, WellPosedness};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{f17, opt17, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    IllPosed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::IllPosed => 2,
        }
    }
}

pub type Outcome = Result<(Value, Status), CliError>;

fn verdict_json(cfg: &Resolved, w: &WellPosedness) -> Value {
    json!({
        "config": cfg.raw,
        "xi": cfg.costs.xi(),
        "verdict": w.verdict,
        "reason": w.reason,
        "xi_bar": w.xi_bar,
    })
}

/// Verdict JSON with exit status 2 when the cost lies outside the well-posed range.
fn gate(cfg: &Resolved) -> Result<Option<Value>, CliError> {
    let w = classify(&cfg.params, cfg.costs.xi())?;
    Ok((!w.is_well_posed()).then(|| verdict_json(cfg, &w)))
}

fn solved_tables(cfg: &Resolved) -> Result<PolicyTables, CliError> {
    let sol = solve_free_boundary(&cfg.params, cfg.costs.xi())?;
    Ok(PolicyTables::new(sol, cfg.costs)?)
}

pub fn wellposed(cfg: &Resolved) -> Outcome {
    let w = classify(&cfg.params, cfg.costs.xi())?;
    let status = if w.is_well_posed() {
        Status::Success
    } else {
        Status::IllPosed
    };
    Ok((verdict_json(cfg, &w), status))
}

pub fn solve(cfg: &Resolved, out: Option<&Path>) -> Outcome {
    if let Some(v) = gate(cfg)? {
        return Ok((v, Status::IllPosed));
    }
    let t = solved_tables(cfg)?;
    let sol = t.solution();
    let p = &cfg.params;
    let grid: Vec<[f64; 2]> = sol.grid().iter().map(|g| [g[0], g[1]]).collect();
    let mut files = Vec::new();
    if let Some(dir) = out {
        let rows = sol
            .grid()
            .into_iter()
            .map(|[q, n, acc]| vec![f17(q), f17(n), f17(p.m(q)), f17(acc)]);
        write_csv(dir, "n_curve.csv", &["q", "n", "m", "log_sigma_acc"], rows)?;
        files.push("n_curve.csv");
    }
    let v = json!({
        "config": cfg.raw,
        "xi": sol.xi(),
        "q_merton": p.q_merton(),
        "m_merton": p.m_merton(),
        "q_star": sol.q_star(),
        "q_upper": sol.q_upper(),
        "p_star": t.p_star(),
        "p_upper": t.p_upper(),
        "log_sigma": sol.log_sigma(),
        "crossed_one": sol.crossed_one(),
        "grid": grid,
        "files": files,
    });
    Ok((v, Status::Success))
}

pub fn policy(cfg: &Resolved, out: Option<&Path>) -> Outcome {
    if let Some(v) = gate(cfg)? {
        return Ok((v, Status::IllPosed));
    }
    let t = solved_tables(cfg)?;
    let sol = t.solution();
    let mut files = Vec::new();
    if let Some(dir) = out {
        let rows = t.table().iter().map(|r| r.iter().map(|&x| f17(x)).collect());
        write_csv(dir, "policy.csv", &["q", "kappa", "p"], rows)?;
        files.push("policy.csv");
    }
    let v = json!({
        "config": cfg.raw,
        "xi": sol.xi(),
        "q_star": sol.q_star(),
        "q_upper": sol.q_upper(),
        "p_star": t.p_star(),
        "p_upper": t.p_upper(),
        "kappa_at_q_star": t.kappa(sol.q_star())?,
        "kappa_at_q_upper": t.kappa(sol.q_upper())?,
        "files": files,
    });
    Ok((v, Status::Success))
}

/// Residuals of the small-cost expansions against the full solver, with the cost split
/// evenly between buying and selling.
pub fn asymptotics(cfg: &Resolved, out: Option<&Path>) -> Outcome {
    let c = coeffs(&cfg.params)?;
    let a = cfg.raw.asymptotics;
    let eps = log_space(a.eps_min, a.eps_max, a.points);
    let mut rows = Vec::with_capacity(eps.len());
    let mut res: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for &e in &eps {
        let costs = CostParams::symmetric(1.0 + e)?;
        let sol = solve_free_boundary(&cfg.params, costs.xi())?;
        let t = PolicyTables::new(sol, costs)?;
        let (qs, qu) = c.shadow_boundary_expansion(e);
        let (ps, pu) = c.real_boundary_expansion(costs.gamma_up - 1.0, costs.gamma_down - 1.0);
        let pairs = [
            (t.solution().q_star(), qs),
            (t.solution().q_upper(), qu),
            (t.p_star(), ps),
            (t.p_upper(), pu),
        ];
        let mut row = vec![f17(e)];
        for (i, (full, exp)) in pairs.into_iter().enumerate() {
            res[i].push((full - exp).abs());
            row.extend([f17(full), f17(exp), f17((full - exp).abs())]);
        }
        rows.push(row);
    }
    let names = ["q_star", "q_upper", "p_star", "p_upper"];
    let mut files = Vec::new();
    if let Some(dir) = out {
        let mut header = vec!["eps".to_string()];
        for n in names {
            header.extend([n.to_string(), format!("{n}_expansion"), format!("{n}_residual")]);
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(dir, "asymptotics.csv", &header, rows)?;
        files.push("asymptotics.csv");
    }
    let slopes: serde_json::Map<String, Value> = names
        .iter()
        .zip(&res)
        .map(|(n, r)| (n.to_string(), json!(fit_loglog_slope(&eps, r).0)))
        .collect();
    let v = json!({
        "config": cfg.raw,
        "coefficients": c,
        "sigma_alt": c.sigma_alt(),
        "zeta_one": c.zeta_one(),
        "loglog_slopes": slopes,
        "files": files,
    });
    Ok((v, Status::Success))
}

pub fn sweep_cmd(cfg: &Resolved, out: Option<&Path>) -> Outcome {
    let s = sweep(&cfg.raw.sweep.param, &cfg.grid, &cfg.params, &cfg.costs)?;
    let mut files = Vec::new();
    if let Some(dir) = out {
        let rows = s.rows.iter().map(|r| {
            vec![
                f17(r.value),
                opt17(r.p_star),
                opt17(r.p_upper),
                opt17(r.q_star),
                opt17(r.q_upper),
                r.well_posed.to_string(),
                f17(r.xi_bar),
            ]
        });
        let header = [
            s.axis.as_str(),
            "p_star",
            "p_upper",
            "q_star",
            "q_upper",
            "well_posed",
            "xi_bar",
        ];
        write_csv(dir, "sweep.csv", &header, rows)?;
        files.push("sweep.csv");
    }
    let v = json!({
        "config": cfg.raw,
        "axis": s.axis,
        "rows": s.rows,
        "files": files,
    });
    Ok((v, Status::Success))
}

pub fn simulate(cfg: &Resolved, out: Option<&Path>) -> Outcome {
    if let Some(v) = gate(cfg)? {
        return Ok((v, Status::IllPosed));
    }
    let t = solved_tables(cfg)?;
    let sim = &cfg.raw.simulation;
    let paths = simulate_paths(&t, sim)?;
    let summary = summarize(&paths, &t, sim)?;
    let mut files = Vec::new();
    if let Some(dir) = out {
        let keep = cfg.raw.export.csv_paths.min(paths.len());
        let rows = paths.iter().take(keep).enumerate().flat_map(|(i, p)| {
            (0..p.len()).map(move |k| {
                let mut r = vec![i.to_string()];
                r.extend(
                    [
                        p.times[k],
                        p.q_hat[k],
                        p.g_up[k],
                        p.g_down[k],
                        p.phi_hat[k],
                        p.x_hat[k],
                        p.c_hat[k],
                        p.y[k],
                        p.value[k],
                        p.m_hat[k],
                    ]
                    .map(f17),
                );
                r
            })
        });
        let header = [
            "path", "t", "q", "g_up", "g_down", "phi", "x", "c", "y", "value", "m",
        ];
        write_csv(dir, "paths.csv", &header, rows)?;
        files.push("paths.csv");
    }
    let v = json!({
        "config": cfg.raw,
        "summary": summary,
        "files": files,
    });
    Ok((v, Status::Success))
}
