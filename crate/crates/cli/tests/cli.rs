use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use eztc_core::model::example_one;
use eztc_core::oracle::{self, Coordinates};

fn eztc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eztc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn solve_example_one_matches_reference_solver() {
    let o = eztc(&["solve", "--xi", "1.69"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let r = oracle::solve(&example_one(), 1.69, 1e-5, Coordinates::Original).unwrap();
    let qs = v["q_star"].as_f64().unwrap();
    let qu = v["q_upper"].as_f64().unwrap();
    assert!((qs - r.q_star).abs() < 1e-6, "{qs} vs {}", r.q_star);
    assert!((qu - r.q_upper).abs() < 1e-6, "{qu} vs {}", r.q_upper);
    let (ps, pu) = (v["p_star"].as_f64().unwrap(), v["p_upper"].as_f64().unwrap());
    assert!(ps < qs && qu < pu);
    assert!(v["grid"].as_array().unwrap().len() > 10);
}

#[test]
fn wellposed_below_threshold_exits_two() {
    let o = eztc(&["wellposed", "--xi", "1.05"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["verdict"], "IllPosed");
    assert!((v["xi_bar"].as_f64().unwrap() - 1.1057).abs() < 1e-3);
    let o = eztc(&["wellposed", "--xi", "1.69"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "WellPosed");
}

#[test]
fn solve_on_ill_posed_input_reports_verdict() {
    let o = eztc(&["solve", "--xi", "1.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["verdict"], "IllPosed");
}

#[test]
fn sweep_over_s_writes_boundary_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = eztc(&["sweep", "--param", "S", "--grid", "0.3:0.9:4", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..5], ["S", "p_star", "p_upper", "q_star", "q_upper"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let ps: f64 = r[1].parse().unwrap();
        let pu: f64 = r[2].parse().unwrap();
        assert!(ps < pu);
        // 17 significant digits
        assert_eq!(r[1].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |dir: &Path| {
        eztc(&[
            "simulate",
            "--paths",
            "50",
            "--dt",
            "1e-3",
            "--horizon",
            "0.5",
            "--seed",
            "11",
            "--out",
            dir.to_str().unwrap(),
        ])
    };
    let (oa, ob) = (run(a.path()), run(b.path()));
    assert_eq!(
        oa.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&oa.stderr)
    );
    assert_eq!(oa.stdout, ob.stdout);
    let fa = std::fs::read(a.path().join("paths.csv")).unwrap();
    let fb = std::fs::read(b.path().join("paths.csv")).unwrap();
    assert_eq!(fa, fb);
    let v = json(&oa);
    assert_eq!(v["summary"]["confinement_gap"].as_f64(), Some(0.0));
    let oc = eztc(&[
        "simulate",
        "--paths",
        "50",
        "--dt",
        "1e-3",
        "--horizon",
        "0.5",
        "--seed",
        "12",
    ]);
    assert_ne!(oa.stdout, oc.stdout);
}

#[test]
fn unit_risk_aversion_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"r": 0, "mu": 0.2, "sigma": 0.65, "R": 1, "S": 0.5, "delta": 0.045},
            "costs": {"gamma_up": 1.3, "gamma_down": 1.3}}"#,
    );
    let o = eztc(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("R = 1"), "{err}");
}

#[test]
fn unknown_config_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        "{\n  \"costs\": {\"gamma_up\": 1.3, \"gamma_dn\": 1.3}\n}",
    );
    let o = eztc(&["wellposed", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma_dn") && err.contains("line 2"), "{err}");
}

#[test]
fn flags_override_config_and_summary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"costs": {"gamma_up": 1.01, "gamma_down": 1.01}}"#,
    );
    let o = eztc(&[
        "policy",
        "--config",
        &cfg,
        "--gamma-up",
        "1.3",
        "--gamma-down",
        "1.3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["config"]["costs"]["gamma_up"].as_f64(), Some(1.3));
    let summary = write(dir.path(), "s.json", &String::from_utf8_lossy(&o.stdout));
    let again = eztc(&["policy", "--config", &summary]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn usage_errors_do_not_look_ill_posed() {
    let o = eztc(&["solve", "--xi", "abc"]);
    assert_eq!(o.status.code(), Some(1));
    let o = eztc(&["bogus"]);
    assert_eq!(o.status.code(), Some(1));
}
