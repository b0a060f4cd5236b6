use lvhc::feeders;
use lvhc::hostcap::{full_penetration_capacity, load_voltages, run_fixed_voltage};
use lvhc::loadflow::{FeederModel, SolveOptions};
use lvhc::scenarios::Scenario;
use num_complex::Complex64;

fn tight() -> SolveOptions {
    SolveOptions {
        tol: 1e-12,
        max_iter: 1000,
        ..SolveOptions::default()
    }
}

fn all_loads(model: &FeederModel) -> Scenario {
    Scenario {
        omega: (0..model.n_loads()).collect(),
        seed_id: 0,
    }
}

/// Largest |linear − nonlinear| over load rows for uniform per-load injection `p`.
fn linearization_error(model: &FeederModel, p: f64) -> f64 {
    let mag = &model.magnitude;
    let sens = mag.sensitivity(&mag.indicator(&all_loads(model)).unwrap());
    let linear = load_voltages(mag, &sens, p);
    let sol = model
        .solve_with_generation(&vec![p; model.n_loads()], &tight())
        .unwrap();
    let mags = sol.magnitudes();
    mag.load_rows
        .iter()
        .zip(&linear)
        .map(|(&r, l)| (mags[r] - l).abs())
        .fold(0.0, f64::max)
}

fn log_log_slope(model: &FeederModel) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..7)
        .map(|k| 1e-4 * 10f64.powf(k as f64 * 0.5))
        .map(|d| (d.ln(), linearization_error(model, d).ln()))
        .unzip();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn unloaded(mut net: lvhc::NetworkModel) -> lvhc::NetworkModel {
    for load in &mut net.loads {
        load.p_kw = 0.0;
    }
    net
}

/// Around a no-load base the model is the tangent of the load flow.
#[test]
fn linearization_error_is_second_order() {
    for net in [feeders::twobus(), feeders::synth10(), feeders::synth55()] {
        let name = net.name.clone();
        let model = FeederModel::build(unloaded(net)).unwrap();
        let slope = log_log_slope(&model);
        assert!((slope - 2.0).abs() <= 0.2, "{name}: log-log slope {slope}");
    }
}

/// Around loaded bases the load currents' dependence on voltage is dropped,
/// leaving a small first-order bias relative to the predicted rise.
#[test]
fn loaded_base_bias_is_small_relative_to_rise() {
    for net in [feeders::twobus(), feeders::synth10(), feeders::synth55()] {
        let name = net.name.clone();
        let model = FeederModel::build(net).unwrap();
        let mag = &model.magnitude;
        let sens = mag.sensitivity(&mag.indicator(&all_loads(&model)).unwrap());
        let top = sens.iter().copied().fold(0.0, f64::max);
        for k in 0..7 {
            let d = 1e-4 * 10f64.powf(k as f64 * 0.5);
            let rel = linearization_error(&model, d) / (top * d);
            assert!(rel < 0.01, "{name}: relative bias {rel} at {d}");
        }
    }
}

#[test]
fn uniform_injection_raises_every_load_voltage() {
    for net in [feeders::twobus(), feeders::synth10(), feeders::synth55()] {
        let model = FeederModel::build(net).unwrap();
        let cap = full_penetration_capacity(&model.magnitude, model.v_plus())
            .unwrap()
            .value();
        let mut prev: Option<Vec<f64>> = None;
        for k in 0..=12 {
            let p = 1.5 * cap * k as f64 / 12.0;
            let sol = model
                .solve_with_generation(&vec![p; model.n_loads()], &SolveOptions::default())
                .unwrap();
            let mags = sol.magnitudes();
            let now: Vec<f64> = model.magnitude.load_rows.iter().map(|&r| mags[r]).collect();
            if let Some(before) = &prev {
                for (b, a) in before.iter().zip(&now) {
                    assert!(a >= &(b - 1e-12), "voltage fell from {b} to {a} at p = {p}");
                }
            }
            prev = Some(now);
        }
    }
}

#[test]
fn oracle_meets_requested_tolerance() {
    let model = FeederModel::build(feeders::synth10()).unwrap();
    let opts = SolveOptions::default();
    for p in [0.0, 1.0, 5.0, 20.0] {
        let sol = model
            .solve_with_generation(&vec![p; model.n_loads()], &opts)
            .unwrap();
        assert!(sol.residual <= opts.tol, "residual {}", sol.residual);
        let mut s = model.s_base.clone();
        for &node in &model.load_nodes {
            s[node] += Complex64::new(p, 0.0);
        }
        let recomputed = model.solver.mismatch(&sol.v0, &sol.v_load, &nalgebra::DVector::from_vec(s));
        assert!((recomputed - sol.residual).abs() < 1e-15);
    }
}

/// |V| at the load of a two-bus feeder with series impedance `z`, slack
/// `v0` and injected power `s`: root of u² − (2Re(z·s̄) + v0²)u + |z·s̄|² = 0.
fn two_bus_magnitude(z: Complex64, v0: f64, s: Complex64) -> f64 {
    let c = z * s.conj();
    let b = 2.0 * c.re + v0 * v0;
    ((b + (b * b - 4.0 * c.norm_sqr()).sqrt()) / 2.0).sqrt()
}

#[test]
fn two_bus_hosting_capacity_against_nonlinear_solve() {
    let model = FeederModel::build(unloaded(feeders::twobus())).unwrap();
    let v_plus = model.v_plus();
    let samples = run_fixed_voltage(&model.magnitude, 1, 4, 0, v_plus).unwrap();
    let p_hat = samples.p_gen_max[0];
    assert!(samples.p_gen_max.iter().all(|&p| p == p_hat));
    // 0.05 pu of headroom over a flat-base sensitivity of Re(z) = 0.01.
    assert!((p_hat - 5.0).abs() < 1e-9, "P̂ = {p_hat}");

    let sol = model.solve_with_generation(&[p_hat], &tight()).unwrap();
    let v_load = sol.magnitudes()[model.magnitude.load_rows[0]];
    let z = Complex64::new(0.01, 0.01);
    let oracle = two_bus_magnitude(z, 1.0, Complex64::new(p_hat, 0.0));
    assert!((v_load - oracle).abs() < 1e-9);
    assert!((v_load - 1.046_630_596_596_424).abs() < 1e-9, "|V| = {v_load}");
    // The linear model is first order; the true voltage lands below v⁺.
    assert!(v_load < v_plus && v_plus - v_load < 5e-3);
}
