//! Nonlinear three-phase load flow and the linearized voltage models.
//!
//! The nonlinear solver is a fixed-point Z-bus iteration on the factorized
//! load-node admittance block. It is the reference ("oracle") that the linear
//! models are checked against.
//!
//! The complex linear model maps real injections `[p; q]` at the load nodes
//! to complex voltages at every node:
//!
//! ```text
//! v = M [p; q] + a,   M = [ 0 ; Yll⁻¹ diag(conj v̄)⁻¹ , -j Yll⁻¹ diag(conj v̄)⁻¹ ]
//!                     a = [ v0 ; -Yll⁻¹ Yl0 v0 ]
//! ```
//!
//! and the magnitude model projects it onto the base-point voltage angles,
//! `|v| ≈ Re(v e^{-jθ̄}) = F [p; q] + g`.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netmodel::{assemble_admittance, NetworkModel, PartitionedAdmittance};
use crate::scenarios::IndicatorVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest acceptable complex power mismatch at any load node, pu.
    pub tol: f64,
    pub max_iter: usize,
    /// Solutions with any load-node magnitude below this are rejected, pu.
    pub collapse_floor: f64,
}

/// Extra fixed-point steps taken after the mismatch tolerance is met.
const POLISH_STEPS: usize = 8;

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 50,
            collapse_floor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSolution {
    pub v0: [Complex64; 3],
    /// Load-node voltages, pu.
    pub v_load: DVector<Complex64>,
    /// Load-node complex power injections the solution was computed for, pu.
    pub s_injected: DVector<Complex64>,
    /// Largest power mismatch at the returned voltages, pu.
    pub residual: f64,
    pub iterations: usize,
}

impl ComplexSolution {
    /// All node voltages, slack phases first.
    pub fn voltages(&self) -> DVector<Complex64> {
        let n = self.v_load.len();
        DVector::from_fn(n + 3, |r, _| {
            if r < 3 {
                self.v0[r]
            } else {
                self.v_load[r - 3]
            }
        })
    }

    pub fn magnitudes(&self) -> DVector<f64> {
        self.voltages().map(|v| v.norm())
    }
}

/// Factorized load-node admittance, reusable across solves.
#[derive(Debug, Clone)]
pub struct ZBusSolver {
    lu: LU<Complex64, Dyn, Dyn>,
    yll: DMatrix<Complex64>,
    yl0: DMatrix<Complex64>,
    /// Largest row sum of |Y| over the load rows.
    row_norm: f64,
}

impl ZBusSolver {
    pub fn new(adm: &PartitionedAdmittance) -> Result<Self> {
        let yll = adm.yll.clone();
        let lu = yll.clone().lu();
        let u = lu.u();
        let diag: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
        let largest = diag.iter().copied().fold(0.0, f64::max);
        let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(largest > 0.0) || smallest <= 1e-13 * largest {
            return Err(Error::SingularAdmittance);
        }
        let row_norm = (0..yll.nrows())
            .map(|r| {
                yll.row(r).iter().chain(adm.yl0.row(r).iter()).map(|y| y.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max);
        Ok(ZBusSolver {
            lu,
            yll,
            yl0: adm.yl0.clone(),
            row_norm,
        })
    }

    /// Round-off level of [`ZBusSolver::mismatch`] for voltages up to `v_max`.
    /// Requested tolerances below it are raised to it.
    pub fn mismatch_floor(&self, v_max: f64) -> f64 {
        16.0 * f64::EPSILON * self.row_norm * v_max * v_max
    }

    pub fn n_load_nodes(&self) -> usize {
        self.yll.nrows()
    }

    /// Load-node voltages with zero injection: `-Yll⁻¹ Yl0 v0`.
    pub fn no_load_voltages(&self, v0: &[Complex64; 3]) -> DVector<Complex64> {
        let rhs = -(&self.yl0 * DVector::from_column_slice(v0));
        self.lu.solve(&rhs).expect("factorization checked")
    }

    /// Largest |v ∘ conj(i) − s| over the load nodes.
    pub fn mismatch(
        &self,
        v0: &[Complex64; 3],
        v_load: &DVector<Complex64>,
        s: &DVector<Complex64>,
    ) -> f64 {
        let i = &self.yll * v_load + &self.yl0 * DVector::from_column_slice(v0);
        v_load
            .iter()
            .zip(i.iter())
            .zip(s.iter())
            .map(|((v, i), s)| (v * i.conj() - s).norm())
            .fold(0.0, f64::max)
    }

    pub fn solve(
        &self,
        s_load: &[Complex64],
        v0: &[Complex64; 3],
        opts: &SolveOptions,
    ) -> Result<ComplexSolution> {
        let n = self.n_load_nodes();
        if s_load.len() != n {
            return Err(Error::Dimension {
                what: "load-node injections",
                expected: n,
                found: s_load.len(),
            });
        }
        if !(opts.tol > 0.0) {
            return Err(Error::invalid("load-flow tolerance must be positive"));
        }
        let s = DVector::from_column_slice(s_load);
        let w = self.no_load_voltages(v0);
        let v_scale = w.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let tol = opts.tol.max(self.mismatch_floor(2.0 * v_scale));
        let mut v = w.clone();
        let mut residual = f64::INFINITY;
        for iteration in 1..=opts.max_iter {
            check_floor(&v, opts.collapse_floor)?;
            residual = self.mismatch(v0, &v, &s);
            if !residual.is_finite() {
                break;
            }
            if residual <= tol {
                let (v_load, residual) = self.polish(v0, &w, &s, v, residual, tol);
                return Ok(ComplexSolution {
                    v0: *v0,
                    v_load,
                    s_injected: s,
                    residual,
                    iterations: iteration,
                });
            }
            v = self.step(&w, &s, &v);
        }
        Err(Error::NonConvergence {
            iterations: opts.max_iter,
            residual,
        })
    }

    fn step(&self, w: &DVector<Complex64>, s: &DVector<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
        let current = s.zip_map(v, |s, v| (s / v).conj());
        w + self.lu.solve(&current).expect("factorization checked")
    }

    /// A converged iterate can still sit well away from the fixed point when
    /// the mismatch is dominated by round-off, so keep contracting while the
    /// update shrinks and the mismatch stays within `tol`.
    fn polish(
        &self,
        v0: &[Complex64; 3],
        w: &DVector<Complex64>,
        s: &DVector<Complex64>,
        mut v: DVector<Complex64>,
        mut residual: f64,
        tol: f64,
    ) -> (DVector<Complex64>, f64) {
        let mut last_step = f64::INFINITY;
        for _ in 0..POLISH_STEPS {
            let next = self.step(w, s, &v);
            let step = (&next - &v).camax();
            let next_residual = self.mismatch(v0, &next, s);
            if !(step < last_step) || next_residual > tol {
                break;
            }
            v = next;
            residual = next_residual;
            last_step = step;
            if step == 0.0 {
                break;
            }
        }
        (v, residual)
    }

    /// Complex linear model around `base`, reusing this factorization.
    pub fn linearize(&self, base: &ComplexSolution) -> Result<LinearModel> {
        let n = self.n_load_nodes();
        if base.v_load.len() != n {
            return Err(Error::Dimension {
                what: "linearization point",
                expected: n,
                found: base.v_load.len(),
            });
        }
        if let Some(node) = base.v_load.iter().position(|v| v.norm() == 0.0) {
            return Err(Error::ZeroBaseVoltage { node });
        }
        let zinv = self
            .lu
            .solve(&DMatrix::<Complex64>::identity(n, n))
            .expect("factorization checked");
        let mut m = DMatrix::<Complex64>::zeros(n + 3, 2 * n);
        let minus_j = Complex64::new(0.0, -1.0);
        for k in 0..n {
            let scale = Complex64::new(1.0, 0.0) / base.v_load[k].conj();
            for r in 0..n {
                let entry = zinv[(r, k)] * scale;
                m[(r + 3, k)] = entry;
                m[(r + 3, n + k)] = minus_j * entry;
            }
        }
        let a_load = self.no_load_voltages(&base.v0);
        let a = DVector::from_fn(n + 3, |r, _| {
            if r < 3 {
                base.v0[r]
            } else {
                a_load[r - 3]
            }
        });
        Ok(LinearModel {
            m,
            a,
            built_at: base.clone(),
        })
    }
}

fn check_floor(v: &DVector<Complex64>, floor: f64) -> Result<()> {
    for (node, z) in v.iter().enumerate() {
        let magnitude = z.norm();
        if !(magnitude >= floor) {
            return Err(Error::VoltageCollapse {
                node,
                magnitude,
                floor,
            });
        }
    }
    Ok(())
}

/// One-shot nonlinear solve; factorizes `Yll` on every call.
pub fn solve_nonlinear(
    adm: &PartitionedAdmittance,
    s_load: &[Complex64],
    v0: &[Complex64; 3],
    tol: f64,
    max_iter: usize,
) -> Result<ComplexSolution> {
    let opts = SolveOptions {
        tol,
        max_iter,
        ..SolveOptions::default()
    };
    ZBusSolver::new(adm)?.solve(s_load, v0, &opts)
}

pub fn linearize(adm: &PartitionedAdmittance, base: &ComplexSolution) -> Result<LinearModel> {
    ZBusSolver::new(adm)?.linearize(base)
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    /// (3N) × (2n) sensitivity of complex node voltages to load-node `[p; q]`.
    pub m: DMatrix<Complex64>,
    pub a: DVector<Complex64>,
    pub built_at: ComplexSolution,
}

impl LinearModel {
    pub fn n_load_nodes(&self) -> usize {
        self.m.ncols() / 2
    }

    pub fn evaluate(&self, p: &[f64], q: &[f64]) -> Result<DVector<Complex64>> {
        let pq = stack(p, q, self.n_load_nodes())?;
        let pq = pq.map(|x| Complex64::new(x, 0.0));
        Ok(&self.m * pq + &self.a)
    }
}

fn stack(p: &[f64], q: &[f64], n: usize) -> Result<DVector<f64>> {
    for (what, v) in [("p injections", p), ("q injections", q)] {
        if v.len() != n {
            return Err(Error::Dimension {
                what,
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok(DVector::from_iterator(
        2 * n,
        p.iter().chain(q.iter()).copied(),
    ))
}

/// Linear map from load-node `[p; q]` to voltage magnitudes.
#[derive(Debug, Clone)]
pub struct MagnitudeModel {
    pub f: DMatrix<f64>,
    pub g: DVector<f64>,
    pub theta_bar: DVector<f64>,
    pub v_bar_mag: DVector<f64>,
    /// Node row (in full 3N ordering) of each load, canonical load order.
    pub load_rows: Vec<usize>,
    /// `F` restricted to load rows and p columns: `load_p[(k, node)]`.
    load_p: DMatrix<f64>,
    load_q: DMatrix<f64>,
    v_bar_loads: Vec<f64>,
}

/// Projects a complex linear model onto the base-point voltage angles.
pub fn magnitude_model(lin: &LinearModel, load_rows: Vec<usize>) -> Result<MagnitudeModel> {
    let rows = lin.m.nrows();
    let n = lin.n_load_nodes();
    if let Some(&bad) = load_rows.iter().find(|&&r| r < 3 || r >= rows) {
        return Err(Error::invalid(format!(
            "load row {bad} is not a load-node row"
        )));
    }
    let v_bar = lin.built_at.voltages();
    let theta_bar = v_bar.map(|v| v.arg());
    let v_bar_mag = v_bar.map(|v| v.norm());
    let (cos, sin): (Vec<f64>, Vec<f64>) = theta_bar.iter().map(|t| (t.cos(), t.sin())).unzip();
    let f = DMatrix::from_fn(rows, 2 * n, |r, c| {
        let m = lin.m[(r, c)];
        cos[r] * m.re + sin[r] * m.im
    });
    let g = DVector::from_fn(rows, |r, _| {
        let a = lin.a[r];
        cos[r] * a.re + sin[r] * a.im
    });
    let load_p = DMatrix::from_fn(load_rows.len(), n, |k, c| f[(load_rows[k], c)]);
    let load_q = DMatrix::from_fn(load_rows.len(), n, |k, c| f[(load_rows[k], n + c)]);
    let v_bar_loads = load_rows.iter().map(|&r| v_bar_mag[r]).collect();
    Ok(MagnitudeModel {
        f,
        g,
        theta_bar,
        v_bar_mag,
        load_rows,
        load_p,
        load_q,
        v_bar_loads,
    })
}

impl MagnitudeModel {
    pub fn n_load_nodes(&self) -> usize {
        self.f.ncols() / 2
    }

    pub fn n_loads(&self) -> usize {
        self.load_rows.len()
    }

    /// `F [p; q] + g` over every node.
    pub fn predict_voltages(&self, p: &[f64], q: &[f64]) -> Result<DVector<f64>> {
        let pq = stack(p, q, self.n_load_nodes())?;
        Ok(&self.f * pq + &self.g)
    }

    /// Base-point magnitudes at the load rows, canonical load order.
    pub fn v_bar_loads(&self) -> &[f64] {
        &self.v_bar_loads
    }

    /// `FΛ` at the load rows: voltage rise per unit of per-generator power.
    pub fn sensitivity(&self, lam: &IndicatorVector) -> Vec<f64> {
        let mut s = vec![0.0; self.n_loads()];
        for &node in lam.ones() {
            for (acc, f) in s.iter_mut().zip(self.load_p.column(node).iter()) {
                *acc += f;
            }
            if lam.q_per_p() != 0.0 {
                for (acc, f) in s.iter_mut().zip(self.load_q.column(node).iter()) {
                    *acc += lam.q_per_p() * f;
                }
            }
        }
        s
    }
}

/// A feeder with its admittance, factorization, base load flow and linear
/// models, built once per study and shared read-only.
#[derive(Debug, Clone)]
pub struct FeederModel {
    pub net: NetworkModel,
    pub adm: PartitionedAdmittance,
    pub solver: ZBusSolver,
    /// Base-point injections (nominal loads, no PV), pu.
    pub s_base: Vec<Complex64>,
    pub base: ComplexSolution,
    pub linear: LinearModel,
    pub magnitude: MagnitudeModel,
    /// Load-node index of each load.
    pub load_nodes: Vec<usize>,
}

/// Tolerance used for the linearization point; tighter than the oracle
/// default so the linear model is exact at its base to round-off.
pub const BASE_POINT_TOL: f64 = 1e-10;

impl FeederModel {
    pub fn build(net: NetworkModel) -> Result<Self> {
        let adm = assemble_admittance(&net)?;
        let solver = ZBusSolver::new(&adm)?;
        let s_base = net.load_injections_pu(&adm.ordering);
        let opts = SolveOptions {
            tol: BASE_POINT_TOL,
            max_iter: 500,
            ..SolveOptions::default()
        };
        let base = solver.solve(&s_base, &net.slack.v_pu, &opts)?;
        let linear = solver.linearize(&base)?;
        let load_nodes = net.load_nodes(&adm.ordering);
        let magnitude = magnitude_model(&linear, load_nodes.iter().map(|n| n + 3).collect())?;
        Ok(FeederModel {
            net,
            adm,
            solver,
            s_base,
            base,
            linear,
            magnitude,
            load_nodes,
        })
    }

    pub fn n_loads(&self) -> usize {
        self.load_nodes.len()
    }

    pub fn v_plus(&self) -> f64 {
        self.net.v_plus
    }

    /// Base-point real and reactive injections at the load nodes.
    pub fn base_pq(&self) -> (Vec<f64>, Vec<f64>) {
        self.s_base.iter().map(|s| (s.re, s.im)).unzip()
    }

    /// Nonlinear solve with `p_gen[k]` pu of real power added at load `k`.
    pub fn solve_with_generation(&self, p_gen: &[f64], opts: &SolveOptions) -> Result<ComplexSolution> {
        if p_gen.len() != self.n_loads() {
            return Err(Error::Dimension {
                what: "per-load generation",
                expected: self.n_loads(),
                found: p_gen.len(),
            });
        }
        let mut s = self.s_base.clone();
        for (&node, &p) in self.load_nodes.iter().zip(p_gen) {
            s[node] += p;
        }
        self.solver.solve(&s, &self.net.slack.v_pu, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeders;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unloaded(mut net: NetworkModel) -> NetworkModel {
        for l in &mut net.loads {
            l.p_kw = 0.0;
        }
        net
    }

    /// Exact receiving-end magnitude of a two-bus system with series
    /// impedance `z`, ideal source `v0` and injection `s` at the far end.
    fn two_bus_magnitude(z: Complex64, v0: f64, s: Complex64) -> f64 {
        let c = z * s.conj();
        let b = 2.0 * c.re + v0 * v0;
        let u = 0.5 * (b + (b * b - 4.0 * c.norm_sqr()).sqrt());
        u.sqrt()
    }

    #[test]
    fn zero_injection_is_no_load_solution() {
        let adm = assemble_admittance(&feeders::synth10()).unwrap();
        let v0 = feeders::synth10().slack.v_pu;
        let n = adm.n_load_nodes();
        let sol = solve_nonlinear(&adm, &vec![ZERO; n], &v0, 1e-8, 50).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.residual < 1e-10);
        let lu = adm.yll.clone().lu();
        let expected = lu
            .solve(&-(&adm.yl0 * DVector::from_column_slice(&v0)))
            .unwrap();
        assert!((sol.v_load - expected).camax() < 1e-12);
    }

    #[test]
    fn two_bus_generation_matches_quadratic() {
        let adm = assemble_admittance(&feeders::twobus()).unwrap();
        let v0 = feeders::twobus().slack.v_pu;
        let mut s = vec![ZERO; 3];
        s[0] = c(0.05, 0.0);
        let sol = solve_nonlinear(&adm, &s, &v0, 1e-12, 50).unwrap();
        let exact = two_bus_magnitude(c(0.01, 0.01), 1.0, s[0]);
        assert!((exact - 1.000_499_625_436_837).abs() < 1e-14);
        assert!((sol.v_load[0].norm() - exact).abs() < 1e-10);
    }

    #[test]
    fn absurd_load_fails() {
        let adm = assemble_admittance(&feeders::twobus()).unwrap();
        let v0 = feeders::twobus().slack.v_pu;
        let mut s = vec![ZERO; 3];
        s[0] = c(-100.0, 0.0);
        let err = solve_nonlinear(&adm, &s, &v0, 1e-8, 50).unwrap_err();
        assert!(matches!(
            err,
            Error::NonConvergence { .. } | Error::VoltageCollapse { .. }
        ));
    }

    #[test]
    fn wrong_injection_length_rejected() {
        let adm = assemble_admittance(&feeders::twobus()).unwrap();
        let v0 = feeders::twobus().slack.v_pu;
        assert!(matches!(
            solve_nonlinear(&adm, &[ZERO; 2], &v0, 1e-8, 50),
            Err(Error::Dimension { expected: 3, .. })
        ));
    }

    #[test]
    fn flat_base_linear_model_is_rotated_impedance() {
        let net = unloaded(feeders::twobus());
        let adm = assemble_admittance(&net).unwrap();
        let solver = ZBusSolver::new(&adm).unwrap();
        let base = solver.solve(&[ZERO; 3], &net.slack.v_pu, &SolveOptions::default()).unwrap();
        let lin = solver.linearize(&base).unwrap();
        let z = c(0.01, 0.01);
        for k in 0..3 {
            let expected = z / base.v_load[k].conj();
            assert!((lin.m[(k + 3, k)] - expected).norm() < 1e-14);
            assert!((lin.m[(k + 3, 3 + k)] - c(0.0, -1.0) * expected).norm() < 1e-14);
            assert!((lin.a[k + 3] - net.slack.v_pu[k]).norm() < 1e-14);
        }
        for r in 0..3 {
            assert_eq!(lin.a[r], net.slack.v_pu[r]);
            assert!(lin.m.row(r).iter().all(|m| *m == ZERO));
        }
    }

    #[test]
    fn zero_base_voltage_rejected() {
        let adm = assemble_admittance(&feeders::twobus()).unwrap();
        let solver = ZBusSolver::new(&adm).unwrap();
        let mut base = solver
            .solve(&[ZERO; 3], &feeders::twobus().slack.v_pu, &SolveOptions::default())
            .unwrap();
        base.v_load[1] = ZERO;
        assert!(matches!(
            solver.linearize(&base),
            Err(Error::ZeroBaseVoltage { node: 1 })
        ));
    }

    #[test]
    fn zero_angle_projection_is_real_part() {
        // Single-phase-equivalent view: phase a of the two-bus feeder at angle 0.
        let net = unloaded(feeders::twobus());
        let model = FeederModel::build(net).unwrap();
        let mag = &model.magnitude;
        let row = model.magnitude.load_rows[0];
        assert!(mag.theta_bar[row].abs() < 1e-15);
        for col in 0..mag.f.ncols() {
            assert!((mag.f[(row, col)] - model.linear.m[(row, col)].re).abs() < 1e-15);
        }
        assert!((mag.g[row] - model.linear.a[row].re).abs() < 1e-15);
    }

    #[test]
    fn slack_rows_of_g_are_slack_magnitudes() {
        let model = FeederModel::build(feeders::synth10()).unwrap();
        for r in 0..3 {
            let v0 = model.net.slack.v_pu[r].norm();
            assert!((model.magnitude.g[r] - v0).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_at_base_point() {
        for net in [feeders::twobus(), feeders::synth10(), feeders::synth55()] {
            let model = FeederModel::build(net).unwrap();
            let (p, q) = model.base_pq();
            let v = model.magnitude.predict_voltages(&p, &q).unwrap();
            assert!((v - &model.magnitude.v_bar_mag).amax() < 1e-10);
            let vc = model.linear.evaluate(&p, &q).unwrap();
            assert!((vc - model.base.voltages()).camax() < 1e-10);
        }
    }

    #[test]
    fn predict_rejects_bad_dimensions() {
        let model = FeederModel::build(feeders::twobus()).unwrap();
        assert!(matches!(
            model.magnitude.predict_voltages(&[0.0; 2], &[0.0; 3]),
            Err(Error::Dimension { .. })
        ));
    }
}
