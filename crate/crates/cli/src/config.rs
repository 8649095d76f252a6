//! Run configuration: JSON file, command-line overrides, and validation.
//!
//! Precedence is defaults < config file < flags. A JSON summary written by any
//! subcommand carries its effective configuration under `config` and can be fed back
//! through `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use eztc_core::model::{example_one, CostParams, ModelParams, RawParams};
use eztc_core::simulate::SimConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub gamma_up: f64,
    pub gamma_down: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            gamma_up: 1.3,
            gamma_down: 1.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// One of r, mu, sigma, R, S, delta.
    pub param: String,
    /// Closed grid `a:b:n`.
    pub grid: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            param: "S".into(),
            grid: "0.1:0.9:9".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            eps_min: 1e-4,
            eps_max: 1e-2,
            points: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    /// Number of simulated paths written to the path CSV.
    pub csv_paths: usize,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self { csv_paths: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: RawParams,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default)]
    pub simulation: SimConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
    #[serde(default)]
    pub export: ExportConfig,
}

fn default_model() -> RawParams {
    example_one().raw()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            costs: CostConfig::default(),
            simulation: SimConfig::default(),
            sweep: SweepConfig::default(),
            asymptotics: AsymptoticsConfig::default(),
            export: ExportConfig::default(),
        }
    }
}

/// A summary document; only its `config` member is read back.
#[derive(Deserialize)]
struct Envelope {
    config: RunConfig,
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub xi: Option<f64>,
    pub gamma_up: Option<f64>,
    pub gamma_down: Option<f64>,
    pub param: Option<String>,
    pub grid: Option<String>,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub horizon: Option<f64>,
}

/// Validated configuration ready for dispatch.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub params: ModelParams,
    pub costs: CostParams,
    pub grid: Vec<f64>,
}

pub fn parse_str(text: &str, origin: &Path) -> Result<RunConfig, CliError> {
    let parse_err = |source| CliError::Parse {
        path: origin.to_path_buf(),
        source,
    };
    let is_summary = serde_json::from_str::<serde_json::Value>(text)
        .map_err(parse_err)?
        .get("config")
        .is_some();
    if is_summary {
        serde_json::from_str::<Envelope>(text)
            .map(|e| e.config)
            .map_err(parse_err)
    } else {
        serde_json::from_str(text).map_err(parse_err)
    }
}

pub fn load(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.clone(),
                source,
            })?;
            parse_str(&text, p)
        }
    }
}

pub fn apply(cfg: &mut RunConfig, o: &Overrides) {
    if let Some(s) = o.seed {
        cfg.simulation.seed = s;
    }
    match (o.xi, o.gamma_up, o.gamma_down) {
        (Some(xi), Some(gu), _) => {
            cfg.costs.gamma_up = gu;
            cfg.costs.gamma_down = xi / gu;
        }
        (Some(xi), None, Some(gd)) => {
            cfg.costs.gamma_up = xi / gd;
            cfg.costs.gamma_down = gd;
        }
        (Some(xi), None, None) => {
            cfg.costs.gamma_up = xi.sqrt();
            cfg.costs.gamma_down = xi.sqrt();
        }
        (None, gu, gd) => {
            if let Some(g) = gu {
                cfg.costs.gamma_up = g;
            }
            if let Some(g) = gd {
                cfg.costs.gamma_down = g;
            }
        }
    }
    if let Some(p) = &o.param {
        cfg.sweep.param = p.clone();
    }
    if let Some(g) = &o.grid {
        cfg.sweep.grid = g.clone();
    }
    if let Some(dt) = o.dt {
        cfg.simulation.dt = dt;
    }
    if let Some(n) = o.paths {
        cfg.simulation.n_paths = n;
    }
    if let Some(h) = o.horizon {
        cfg.simulation.horizon = h;
    }
}

/// Parse `a:b:n` into n equally spaced points from a to b inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("grid {text:?} must have the form a:b:n");
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || n == 0 {
        return Err(format!("grid {text:?} needs finite ends and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

const SWEEP_PARAMS: [&str; 6] = ["r", "mu", "sigma", "R", "S", "delta"];

/// Check every section and report all violations at once.
pub fn validate(cfg: RunConfig) -> Result<Resolved, CliError> {
    let mut v = cfg.model.violations();
    let costs = CostParams::new(cfg.costs.gamma_up, cfg.costs.gamma_down);
    if let Err(eztc_core::Error::InvalidParams(c)) = &costs {
        v.extend(c.iter().cloned());
    }
    if let Err(e) = cfg.simulation.validate() {
        v.push(e.to_string());
    }
    if !SWEEP_PARAMS.contains(&cfg.sweep.param.as_str()) {
        v.push(format!(
            "sweep parameter {:?} is not one of {}",
            cfg.sweep.param,
            SWEEP_PARAMS.join(", ")
        ));
    }
    let grid = parse_grid(&cfg.sweep.grid).unwrap_or_else(|e| {
        v.push(e);
        Vec::new()
    });
    let a = cfg.asymptotics;
    if !(a.eps_min > 0.0 && a.eps_max > a.eps_min && a.eps_max.is_finite() && a.points >= 2) {
        v.push("asymptotics needs 0 < eps_min < eps_max and points >= 2".into());
    }
    if !v.is_empty() {
        return Err(CliError::Validation(v));
    }
    let params = ModelParams::from_raw(cfg.model)?;
    Ok(Resolved {
        params,
        costs: costs?,
        grid,
        raw: cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let text = r#"{"model": {"r": 0, "mu": 0.2, "sigma": 0.65, "R": 0.6666666666666666,
            "S": 0.3333333333333333, "delta": 0.045},
            "costs": {"gamma_up": 1.3, "gamma_down": 1.3}}"#;
        let cfg = parse_str(text, Path::new("t.json")).unwrap();
        assert_eq!(cfg.simulation, SimConfig::default());
        assert_eq!(cfg.sweep, SweepConfig::default());
        assert!(validate(cfg).is_ok());
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = "{\n  \"modle\": {}\n}";
        let err = parse_str(text, Path::new("t.json")).unwrap_err().to_string();
        assert!(err.contains("modle") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn all_violations_are_listed() {
        let mut cfg = RunConfig::default();
        cfg.model.risk_aversion = 1.0;
        cfg.costs.gamma_up = 0.5;
        cfg.sweep.grid = "1:2".into();
        match validate(cfg) {
            Err(CliError::Validation(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = RunConfig::default();
        let o = Overrides {
            xi: Some(2.0),
            gamma_up: Some(1.6),
            seed: Some(7),
            ..Default::default()
        };
        apply(&mut cfg, &o);
        assert_eq!(cfg.costs.gamma_up, 1.6);
        assert_eq!(cfg.costs.gamma_down, 2.0 / 1.6);
        assert_eq!(cfg.simulation.seed, 7);
    }

    #[test]
    fn summary_envelope_round_trips() {
        let cfg = RunConfig::default();
        let doc = serde_json::json!({"config": cfg, "q_star": 0.4});
        let back = parse_str(&doc.to_string(), Path::new("s.json")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:3:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
