use proptest::prelude::*;

use eztc_core::fbsolver::solve_free_boundary;
use eztc_core::model::{example_one, example_two, CostParams, ModelParams};
use eztc_core::policy::{mobius, PolicyTables};
use eztc_core::simulate::{initial_trade, simulate_paths, InitialState, SimConfig};
use eztc_core::wellposed::classify;

fn tables(p: &ModelParams, gu: f64, gd: f64) -> PolicyTables {
    let sol = solve_free_boundary(p, gu * gd).unwrap();
    PolicyTables::new(sol, CostParams::new(gu, gd).unwrap()).unwrap()
}

#[test]
fn example_one_end_to_end() {
    let p = example_one();
    assert!(classify(&p, 1.69).unwrap().is_well_posed());
    let t = tables(&p, 1.3, 1.3);
    let sol = t.solution();
    assert!(sol.q_star() < p.q_merton() && p.q_merton() < sol.q_upper());
    assert!(t.p_star() < sol.q_star() && sol.q_upper() < t.p_upper());
    assert!((mobius(1.3, t.p_star()).unwrap() - sol.q_star()).abs() < 1e-12);
    let cfg = SimConfig {
        dt: 1e-3,
        horizon: 0.2,
        n_paths: 8,
        seed: 3,
        ..SimConfig::default()
    };
    let paths = simulate_paths(&t, &cfg).unwrap();
    for path in &paths {
        assert!(path
            .q_hat
            .iter()
            .all(|&q| q >= sol.q_star() && q <= sol.q_upper()));
        assert!(path.g_up.windows(2).all(|w| w[1] >= w[0]));
        assert!(path.g_down.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn example_two_passes_through_one() {
    let p = example_two();
    let t = tables(&p, 1.3, 1.3);
    assert!(t.solution().crossed_one());
    assert!((t.p_of_q(1.0).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn bulk_trade_lands_on_the_boundary() {
    let p = example_one();
    let t = tables(&p, 1.3, 1.3);
    let all_cash = initial_trade(
        &t,
        InitialState {
            x: 1.0,
            y: 1.0,
            phi: 0.0,
        },
    )
    .unwrap();
    assert!((all_cash.q0 - t.solution().q_star()).abs() < 1e-12);
    let all_stock = initial_trade(
        &t,
        InitialState {
            x: 0.0,
            y: 1.0,
            phi: 1.0,
        },
    )
    .unwrap();
    assert!((all_stock.q0 - t.solution().q_upper()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn real_and_shadow_fractions_correspond(gu in 1.05f64..1.6, gd in 1.05f64..1.6, s in 0.0f64..1.0) {
        let t = tables(&example_one(), gu, gd);
        let sol = t.solution();
        let q = sol.q_star() + s * (sol.q_upper() - sol.q_star());
        let p = t.p_of_q(q).unwrap();
        prop_assert!(p >= t.p_star() - 1e-12 && p <= t.p_upper() + 1e-12);
        prop_assert!((t.q_of_p(p).unwrap() - q).abs() < 1e-8);
        let k = t.kappa(q).unwrap();
        prop_assert!(k <= gu + 1e-12 && k >= 1.0 / gd - 1e-12);
    }
}
