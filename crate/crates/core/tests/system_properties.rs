//! Structural properties of the assembled system and its solution: scale and
//! certainty-equivalence invariances, the policy-rule gap identity, impulse
//! linearity, and the seeded-simulation contracts.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soecredit::calibration::{Calibration, PresetName, Scenario};
use soecredit::model::{build_system, residuals, PolicyRule};
use soecredit::simulate::{
    self, compare_rules, irf, irf_absolute, irf_innovations, scenario_sweep, stochastic_simulate,
    IrfExperiment,
};
use soecredit::solver::{solve, solve_linear, spectral_report};

fn baseline() -> Calibration {
    Scenario::preset(PresetName::BaselineFriction)
        .apply(&Calibration::default())
        .unwrap()
}

#[test]
fn solution_is_invariant_to_positive_row_rescaling() {
    let sys = build_system(&baseline(), PolicyRule::Fi).unwrap();
    let sol = solve(&sys, 1e-10).unwrap();

    let n = sys.a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut scale = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        scale[(i, i)] = rng.gen_range(0.2..5.0);
    }
    let (a, b, c, d) = (&scale * &sys.a, &scale * &sys.b, &scale * &sys.c, &scale * &sys.d);
    let scaled = solve_linear(&a, &b, &c, &d, 1e-10).unwrap();

    let dp = (&scaled.p - &sol.transition).amax();
    let dq = (&scaled.q - &sol.loading).amax();
    assert!(dp < 1e-10, "transition drifted by {}", dp);
    assert!(dq < 1e-10, "loading drifted by {}", dq);
}

#[test]
fn certainty_equivalence_in_shock_scale() {
    let cal = baseline();
    let mut doubled = cal.clone();
    for shock in soecredit::Shock::ALL {
        let key = format!("shocks.{}.std_dev", shock.name());
        let v = doubled.get(&key).unwrap();
        doubled.set(&key, 2.0 * v).unwrap();
    }
    let sol = solve(&build_system(&cal, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let sol2 = solve(&build_system(&doubled, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    assert_eq!(sol.transition, sol2.transition);
    assert_eq!(sol.loading, sol2.loading);
}

#[test]
fn builder_counts_match_spectrum_on_baseline() {
    for policy in [PolicyRule::Fi, PolicyRule::Pi] {
        let sys = build_system(&baseline(), policy).unwrap();
        let sol = solve(&sys, 1e-10).unwrap();
        let report = spectral_report(&sol);
        assert_eq!(report.outside, sys.n_jump, "policy {:?}", policy);
        assert!(report.moduli.iter().all(|m| m.is_finite()));
    }
}

/// The two policy variants differ by exactly the spread and preference terms
/// of the perceived benchmark rate, and the implied leverage-channel strength
/// is the product of the two calibrated elasticities.
#[test]
fn policy_gap_identity_row_wise() {
    let cal = baseline();
    let fi = build_system(&cal, PolicyRule::Fi).unwrap();
    let pi = build_system(&cal, PolicyRule::Pi).unwrap();
    let row = fi.row_tags.iter().position(|t| *t == "benchmark_rate_policy").unwrap();
    let idx = fi.idx;
    for j in 0..fi.n_vars() {
        let diff = fi.b[(row, j)] - pi.b[(row, j)];
        let expected = if j == idx.spread {
            -cal.alpha_delta_nri
        } else if j == idx.credit_demand_lead1 {
            -cal.alpha_cb_nri
        } else if j == idx.shock_state[soecredit::Shock::CreditDemand.index()] {
            cal.alpha_cb_nri
        } else {
            0.0
        };
        assert!((diff - expected).abs() < 1e-15, "column {}", j);
    }
    assert!((cal.alpha_delta_nri * cal.beta_lev_delta - 0.0155).abs() < 1e-6);
}

/// On any simulated path, the stored benchmark-rate series differ by the
/// spread and expected-preference-change terms.
#[test]
fn policy_gap_identity_path_wise() {
    let cal = baseline();
    let sol = solve(&build_system(&cal, PolicyRule::Pi).unwrap(), 1e-10).unwrap();
    for shock in ["credit_supply", "credit_demand", "monetary"] {
        let path = irf(&sol, shock, 1.0, 30).unwrap();
        let nri = path.series("nri").unwrap();
        let nri_policy = path.series("nri_policy").unwrap();
        let lev = path.series("leverage").unwrap();
        let cs = path.series("shk_credit_supply").unwrap();
        let cb = path.series("shk_credit_demand").unwrap();
        for t in 0..path.horizon() - 1 {
            let gap = nri[t] - nri_policy[t];
            let implied = -(cal.alpha_delta_nri * (cal.beta_lev_delta * lev[t] + cs[t])
                + cal.alpha_cb_nri * (cb[t + 1] - cb[t]));
            assert!(
                (gap - implied).abs() < 1e-8,
                "shock {} t {}: {} vs {}",
                shock,
                t,
                gap,
                implied
            );
        }
    }
}

#[test]
fn solved_irf_path_satisfies_every_equation() {
    let sys = build_system(&baseline(), PolicyRule::Fi).unwrap();
    let sol = solve(&sys, 1e-10).unwrap();
    let path = irf(&sol, "monetary", 1.0, 40).unwrap();
    let shocks = irf_innovations(&sol, "monetary", 1.0, 40).unwrap();
    let res = residuals(&sys, &path, &shocks).unwrap();
    for (tag, r) in &res {
        assert!(*r < 1e-8, "equation {} residual {}", tag, r);
    }

    // Perturbing one variable must break at least one equation.
    let mut broken = path.clone();
    let j = broken.series_index("ygap").unwrap();
    broken.values[(10, j)] += 1.0;
    let res = residuals(&sys, &broken, &shocks).unwrap();
    assert!(res.iter().any(|(_, r)| *r > 1e-3));
}

#[test]
fn impulse_responses_are_linear_and_odd() {
    let sol = solve(&build_system(&baseline(), PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let one = irf(&sol, "credit_demand", 1.0, 24).unwrap();
    let two = irf(&sol, "credit_demand", 2.0, 24).unwrap();
    let minus = irf(&sol, "credit_demand", -1.0, 24).unwrap();
    for t in 0..one.horizon() {
        for j in 0..one.n_series() {
            assert!((two.values[(t, j)] - 2.0 * one.values[(t, j)]).abs() < 1e-12);
            assert!((minus.values[(t, j)] + one.values[(t, j)]).abs() < 1e-12);
        }
    }
    // Impact row is the loading column scaled by the impulse.
    let k = sol.shock_index("credit_demand").unwrap();
    let sigma = sol.shock_specs[k].std_dev;
    for j in 0..one.n_series() {
        assert!((one.values[(0, j)] - sigma * sol.loading[(j, k)]).abs() < 1e-14);
    }
}

#[test]
fn no_friction_monetary_shock_leaves_spread_at_zero() {
    let cal = Scenario::preset(PresetName::NoFriction).apply(&Calibration::default()).unwrap();
    let sol = solve(&build_system(&cal, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let path = irf(&sol, "monetary", 1.0, 24).unwrap();
    let spread = path.series("spread").unwrap();
    assert!(spread.iter().all(|s| s.abs() < 1e-14));
}

#[test]
fn preference_shock_raises_leverage_early_on() {
    let sol = solve(&build_system(&baseline(), PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let path = irf(&sol, "credit_demand", 1.0, 12).unwrap();
    let lev = path.series("leverage").unwrap();
    assert!((0..4).all(|t| lev[t] > 0.0), "leverage path {:?}", &lev[..5]);
}

#[test]
fn seeded_simulation_is_bit_identical_and_empty_set_is_zero() {
    let sol = solve(&build_system(&baseline(), PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let active = vec!["credit_supply".to_string(), "monetary".to_string()];
    let a = stochastic_simulate(&sol, 500, 77, &active).unwrap();
    let b = stochastic_simulate(&sol, 500, 77, &active).unwrap();
    assert_eq!(a.values, b.values);
    let c = stochastic_simulate(&sol, 500, 78, &active).unwrap();
    assert_ne!(a.values, c.values);

    let zero = stochastic_simulate(&sol, 200, 5, &[]).unwrap();
    assert!(zero.values.iter().all(|v| *v == 0.0));

    assert!(stochastic_simulate(&sol, 10, 1, &["bogus".to_string()]).is_err());
}

#[test]
fn ar1_state_variance_matches_analytic_moment() {
    let cal = baseline();
    let sol = solve(&build_system(&cal, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let path = stochastic_simulate(&sol, 100_000, 4242, &["credit_demand".to_string()]).unwrap();
    let state = path.series("shk_credit_demand").unwrap();
    let mean = state.iter().sum::<f64>() / state.len() as f64;
    let var = state.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / state.len() as f64;
    let spec = cal.shocks.credit_demand;
    let analytic = spec.std_dev * spec.std_dev / (1.0 - spec.persistence * spec.persistence);
    assert!(
        (var - analytic).abs() < 0.02 * analytic,
        "sample {} vs analytic {}",
        var,
        analytic
    );
}

#[test]
fn degenerate_rule_comparison_flags_unit_ratio() {
    let mut cal = Calibration::default();
    cal.set("shocks.credit_supply.std_dev", 0.0).unwrap();
    cal.set("shocks.credit_demand.std_dev", 0.0).unwrap();
    let report = compare_rules(&cal, 0.64, 0.5, 6.0, 500, 3).unwrap();
    assert!(report.degenerate);
    for entry in report.entries {
        assert_eq!(entry.fi, 0.0);
        assert_eq!(entry.pi, 0.0);
        assert_eq!(entry.ratio, 1.0);
    }
}

#[test]
fn single_value_sweep_equals_direct_irf_and_failures_are_recorded() {
    let cal = Calibration::default();
    let experiment = IrfExperiment {
        shock: "monetary".to_string(),
        size: 1.0,
        absolute: false,
        horizon: 16,
        policy: PolicyRule::Fi,
    };
    let entries = scenario_sweep(&cal, "beta_lev_delta", &[0.031], &experiment).unwrap();
    assert_eq!(entries.len(), 1);
    let swept = entries[0].outcome.as_ref().unwrap();
    let direct = {
        let sol = solve(&build_system(&cal, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
        irf(&sol, "monetary", 1.0, 16).unwrap()
    };
    assert_eq!(swept.values, direct.values);
    assert_eq!(swept.metadata.swept_value, Some(0.031));

    // An invalid value errors without aborting the rest of the sweep.
    let entries = scenario_sweep(&cal, "beta_lev_delta", &[-1.0, 0.1], &experiment).unwrap();
    assert!(entries[0].outcome.is_err());
    assert!(entries[1].outcome.is_ok());

    assert!(scenario_sweep(&cal, "no_such_key", &[0.1], &experiment).is_err());
}

#[test]
fn absolute_and_std_dev_sizing_agree() {
    let cal = baseline();
    let sol = solve(&build_system(&cal, PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    let sigma = cal.shocks.monetary.std_dev;
    let by_std = irf(&sol, "monetary", 1.0, 10).unwrap();
    let by_abs = irf_absolute(&sol, "monetary", sigma, 10).unwrap();
    assert_eq!(by_std.values, by_abs.values);
    assert!(irf(&sol, "bogus", 1.0, 10).is_err());
}

#[test]
fn burn_in_removes_initialization_transient() {
    let sol = solve(&build_system(&baseline(), PolicyRule::Fi).unwrap(), 1e-10).unwrap();
    // Propagating the same draws without discarding shows the first kept row
    // of the burned-in path equals row BURN_IN of the raw path.
    let k = sol.shock_index(&sol.shock_names[0].clone()).unwrap();
    let mut eta = DMatrix::<f64>::zeros(simulate::BURN_IN + 50, sol.n_shocks());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..eta.nrows() {
        eta[(t, k)] = rng.gen_range(-1.0..1.0);
    }
    let raw = simulate::propagate(&sol, &eta, 0);
    let burned = simulate::propagate(&sol, &eta, simulate::BURN_IN);
    assert_eq!(burned.horizon(), 50);
    for j in 0..sol.n_vars() {
        assert_eq!(burned.values[(0, j)], raw.values[(simulate::BURN_IN, j)]);
    }
}
