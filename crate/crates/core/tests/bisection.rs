use lvhc::feeders;
use lvhc::hostcap::{
    bisect_fixed_power, eps_hat, estimate_phi_eps, full_penetration_capacity, run_fixed_power, run_fixed_voltage_on,
    shared_scenarios, BRACKET_RTOL,
};
use lvhc::loadflow::FeederModel;
use lvhc::{Error, Method};

fn synth10() -> FeederModel {
    FeederModel::build(feeders::synth10()).unwrap()
}

#[test]
fn returns_lower_end_when_it_already_hits_epsilon() {
    let model = synth10();
    let scenarios = shared_scenarios(&model.magnitude, 4, 100, 1).unwrap();
    let est = bisect_fixed_power(&model.magnitude, &scenarios, 0.0, 0.01, 0.0, 500.0, model.v_plus(), 50).unwrap();
    assert_eq!(est.phi_eps_total, 0.0);
    assert_eq!(est.iterations, 1);
    assert_eq!(est.method, Method::FixedPower);
}

#[test]
fn rejects_bracket_that_misses_epsilon() {
    let model = synth10();
    let scenarios = shared_scenarios(&model.magnitude, 4, 100, 1).unwrap();
    let err = bisect_fixed_power(&model.magnitude, &scenarios, 0.05, 0.01, 0.0, 1e-3, model.v_plus(), 50).unwrap_err();
    assert!(matches!(err, Error::InvalidBracket { .. }), "{err}");
    assert_eq!(err.code(), "invalid_bracket");
}

#[test]
fn reports_iteration_budget_exhaustion() {
    let model = synth10();
    let scenarios = shared_scenarios(&model.magnitude, 4, 400, 2).unwrap();
    let err = bisect_fixed_power(&model.magnitude, &scenarios, 0.05, 1e-6, 0.0, 1e4, model.v_plus(), 4).unwrap_err();
    assert!(matches!(err, Error::BisectionNotConverged { iterations: 4, .. }), "{err}");
}

#[test]
fn rejects_nonpositive_tolerance() {
    let model = synth10();
    let scenarios = shared_scenarios(&model.magnitude, 4, 10, 0).unwrap();
    assert!(bisect_fixed_power(&model.magnitude, &scenarios, 0.05, 0.0, 0.0, 1e3, model.v_plus(), 10).is_err());
}

#[test]
fn fixed_power_lands_near_target_violation_rate() {
    let model = synth10();
    let mag = &model.magnitude;
    let scenarios = shared_scenarios(mag, 5, 1000, 9).unwrap();
    let fp = run_fixed_power(mag, &scenarios, 0.05, 0.01, model.v_plus(), 100).unwrap();
    let e = eps_hat(mag, &scenarios, fp.phi_eps_total, model.v_plus()).unwrap();
    assert!((0.04..=0.06).contains(&e), "ε̂ at fixed-power Φ = {e}");
    assert_eq!(fp.iterations, fp.trace.len());
    assert_eq!(fp.phi_eps_total, fp.trace.last().unwrap().p_total);

    let fv = estimate_phi_eps(&run_fixed_voltage_on(mag, &scenarios, model.v_plus(), 9).unwrap(), 0.05).unwrap();
    let e = eps_hat(mag, &scenarios, fv.phi_eps_total, model.v_plus()).unwrap();
    assert!((0.04..=0.06).contains(&e), "ε̂ at fixed-voltage Φ = {e}");
    let rel = (fp.phi_eps_total - fv.phi_eps_total).abs() / fv.phi_eps_total;
    assert!(rel <= 0.025, "methods differ by {rel}");
}

#[test]
fn full_penetration_methods_coincide() {
    let model = synth10();
    let mag = &model.magnitude;
    let n = mag.n_loads();
    let scenarios = shared_scenarios(mag, n, 50, 4).unwrap();
    let fv = run_fixed_voltage_on(mag, &scenarios, model.v_plus(), 4).unwrap();
    let sorted = fv.sorted_finite();
    assert_eq!(sorted.first(), sorted.last());
    let phi_fv = estimate_phi_eps(&fv, 0.05).unwrap().phi_eps_total;
    let cap = full_penetration_capacity(mag, model.v_plus()).unwrap().value();
    assert_eq!(phi_fv, n as f64 * cap);

    let fp = run_fixed_power(mag, &scenarios, 0.05, 0.01, model.v_plus(), 200).unwrap();
    assert!(fp.bracket_doublings >= 1);
    let rel = (fp.phi_eps_total - phi_fv).abs() / phi_fv;
    assert!(rel <= 2.0 * BRACKET_RTOL, "relative gap {rel}");
}
