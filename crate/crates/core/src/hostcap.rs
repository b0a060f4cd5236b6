//! Hosting-capacity estimators.
//!
//! Two Monte Carlo estimators of the ε-limited hosting capacity Φ_ε, the
//! total PV power at which a random placement of `n_gen` equal generators
//! overvolts with probability ε:
//!
//! * fixed voltage: for each scenario, the largest per-generator power that
//!   keeps every load at or below `v_plus` is closed-form on the linear
//!   magnitude model; Φ_ε is an order statistic of those values.
//! * fixed power: the overvoltage fraction ε̂ at a trial total power is
//!   counted over a fixed scenario set, and the total power is bisected.
//!
//! Powers are per-unit on the feeder power base unless a name ends in `_kw`.

use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loadflow::MagnitudeModel;
use crate::scenarios::{draw_scenarios, indicator, IndicatorVector, Scenario};

/// Bisection also stops once the bracket is this narrow relative to its upper
/// end; ε̂ is a step function and can jump by more than τ at one power.
pub const BRACKET_RTOL: f64 = 1e-9;

/// Cap on bracket doubling when ε̂ at the initial upper end is still below ε.
pub const MAX_BRACKET_DOUBLINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FixedVoltage,
    FixedPower,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::FixedVoltage => "fixed-voltage",
            Method::FixedPower => "fixed-power",
        })
    }
}

/// Largest feasible per-generator power of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxGen {
    Bounded(f64),
    /// No load voltage rises with generation; no constraint ever binds.
    Unbounded,
}

impl MaxGen {
    /// The value, with `Unbounded` mapped to +∞.
    pub fn value(self) -> f64 {
        match self {
            MaxGen::Bounded(p) => p,
            MaxGen::Unbounded => f64::INFINITY,
        }
    }
}

impl MaxGen {
    fn from_value(v: f64) -> Self {
        if v.is_finite() {
            MaxGen::Bounded(v)
        } else {
            MaxGen::Unbounded
        }
    }
}

/// `min_k headroom[k] / sens[k]` over rows with positive sensitivity.
pub fn max_gen_from_sensitivity(sens: &[f64], headroom: &[f64]) -> MaxGen {
    let best = sens
        .iter()
        .zip(headroom)
        .filter(|(s, _)| **s > 0.0)
        .map(|(s, h)| h / s)
        .fold(f64::INFINITY, f64::min);
    MaxGen::from_value(best)
}

/// Predicted load voltages `v̄ + p·FΛ` for per-generator power `p`.
pub fn load_voltages(mag: &MagnitudeModel, sens: &[f64], p: f64) -> Vec<f64> {
    mag.v_bar_loads()
        .iter()
        .zip(sens)
        .map(|(v, s)| v + p * s)
        .collect()
}

/// `v_plus − v̄` at every load; errors if any load has no headroom.
pub fn headroom(mag: &MagnitudeModel, v_plus: f64) -> Result<Vec<f64>> {
    mag.v_bar_loads()
        .iter()
        .enumerate()
        .map(|(load, &v_bar)| {
            let h = v_plus - v_bar;
            if h > 0.0 {
                Ok(h)
            } else {
                Err(Error::NoHeadroom {
                    load,
                    v_bar,
                    v_plus,
                })
            }
        })
        .collect()
}

fn solve_with_headroom(mag: &MagnitudeModel, lam: &IndicatorVector, room: &[f64], v_plus: f64) -> MaxGen {
    let sens = mag.sensitivity(lam);
    let MaxGen::Bounded(mut p) = max_gen_from_sensitivity(&sens, room) else {
        return MaxGen::Unbounded;
    };
    // Step down ulps until the binding load sits at or below v_plus as
    // evaluated by `load_voltages`.
    let exceeds = |p: f64| {
        mag.v_bar_loads()
            .iter()
            .zip(&sens)
            .any(|(v, s)| v + p * s > v_plus)
    };
    while p > 0.0 && exceeds(p) {
        p = f64::from_bits(p.to_bits() - 1);
    }
    MaxGen::Bounded(p)
}

/// Largest per-generator power for which no load exceeds `v_plus`.
pub fn max_gen_fixed_voltage(mag: &MagnitudeModel, lam: &IndicatorVector, v_plus: f64) -> Result<MaxGen> {
    let room = headroom(mag, v_plus)?;
    Ok(solve_with_headroom(mag, lam, &room, v_plus))
}

impl MagnitudeModel {
    /// Λ for a scenario over this model's loads.
    pub fn indicator(&self, scenario: &Scenario) -> Result<IndicatorVector> {
        let nodes: Vec<usize> = self.load_rows.iter().map(|r| r - 3).collect();
        indicator(scenario, &nodes, self.n_load_nodes())
    }
}

/// Per-generator capacity at 100% penetration (every load hosts PV).
pub fn full_penetration_capacity(mag: &MagnitudeModel, v_plus: f64) -> Result<MaxGen> {
    let all = Scenario {
        omega: (0..mag.n_loads()).collect(),
        seed_id: 0,
    };
    max_gen_fixed_voltage(mag, &mag.indicator(&all)?, v_plus)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMeta {
    pub feeder: String,
    pub seed: u64,
    pub v_plus: f64,
    pub method: Method,
    pub n_mc: usize,
    pub base_power_kva: f64,
}

/// Per-scenario maximum per-generator powers of a fixed-voltage study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcSampleSet {
    pub meta: StudyMeta,
    pub n_gen: usize,
    pub n_lds: usize,
    /// pu per generator, indexed by scenario; unbounded scenarios are +∞
    /// in memory and `null` on disk.
    #[serde(with = "inf_as_null")]
    pub p_gen_max: Vec<f64>,
    pub unbounded_count: usize,
    /// Wall time of the scenario loop, seconds.
    #[serde(skip)]
    pub wall_time_s: f64,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

impl HcSampleSet {
    pub fn n_mc(&self) -> usize {
        self.p_gen_max.len()
    }

    pub fn with_feeder(mut self, name: &str, base_power_kva: f64) -> Self {
        self.meta.feeder = name.to_string();
        self.meta.base_power_kva = base_power_kva;
        self
    }

    /// Finite entries sorted ascending.
    pub fn sorted_finite(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.p_gen_max.iter().copied().filter(|p| p.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sample set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Solves every scenario in parallel; results are in scenario order.
pub fn solve_scenarios(mag: &MagnitudeModel, scenarios: &[Scenario], v_plus: f64) -> Result<Vec<MaxGen>> {
    let room = headroom(mag, v_plus)?;
    scenarios
        .par_iter()
        .map(|s| Ok(solve_with_headroom(mag, &mag.indicator(s)?, &room, v_plus)))
        .collect()
}

fn sample_set(
    results: Vec<MaxGen>,
    n_gen: usize,
    n_lds: usize,
    seed: u64,
    v_plus: f64,
    wall_time_s: f64,
) -> HcSampleSet {
    let p_gen_max: Vec<f64> = results.into_iter().map(MaxGen::value).collect();
    let unbounded_count = p_gen_max.iter().filter(|p| !p.is_finite()).count();
    HcSampleSet {
        meta: StudyMeta {
            feeder: String::new(),
            seed,
            v_plus,
            method: Method::FixedVoltage,
            n_mc: p_gen_max.len(),
            base_power_kva: 1.0,
        },
        n_gen,
        n_lds,
        p_gen_max,
        unbounded_count,
        wall_time_s,
    }
}

/// Fixed-voltage study over the scenarios `0..n_mc` of `seed`.
pub fn run_fixed_voltage(
    mag: &MagnitudeModel,
    n_gen: usize,
    n_mc: usize,
    seed: u64,
    v_plus: f64,
) -> Result<HcSampleSet> {
    if n_mc == 0 {
        return Err(Error::invalid("n_mc must be at least 1"));
    }
    let n_lds = mag.n_loads();
    let start = Instant::now();
    let results: Vec<MaxGen> = (0..n_mc as u64)
        .into_par_iter()
        .map(|i| crate::scenarios::scenario_at(seed, i, n_lds, n_gen))
        .collect::<Result<Vec<_>>>()
        .and_then(|set| solve_scenarios(mag, &set, v_plus))?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(sample_set(results, n_gen, n_lds, seed, v_plus, elapsed))
}

/// Fixed-voltage study over an explicit scenario set.
pub fn run_fixed_voltage_on(
    mag: &MagnitudeModel,
    scenarios: &[Scenario],
    v_plus: f64,
    seed: u64,
) -> Result<HcSampleSet> {
    let n_gen = scenarios
        .first()
        .map(Scenario::n_gen)
        .ok_or_else(|| Error::invalid("empty scenario set"))?;
    let start = Instant::now();
    let results = solve_scenarios(mag, scenarios, v_plus)?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(sample_set(results, n_gen, mag.n_loads(), seed, v_plus, elapsed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub p_total: f64,
    pub eps_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcEstimate {
    /// Φ_ε, pu.
    pub phi_eps_total: f64,
    /// φ_ε = Φ_ε / n_gen, pu.
    pub phi_eps_per_gen: f64,
    pub n_gen: usize,
    pub epsilon: f64,
    pub method: Method,
    /// ε̂ evaluations (fixed power only).
    pub iterations: usize,
    pub wall_time_s: f64,
    pub base_power_kva: f64,
    /// Times the upper bracket end was doubled (fixed power only).
    pub bracket_doublings: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<BisectionStep>,
}

impl HcEstimate {
    fn new(per_gen: f64, n_gen: usize, epsilon: f64, method: Method) -> Self {
        HcEstimate {
            phi_eps_total: n_gen as f64 * per_gen,
            phi_eps_per_gen: per_gen,
            n_gen,
            epsilon,
            method,
            iterations: 0,
            wall_time_s: 0.0,
            base_power_kva: 1.0,
            bracket_doublings: 0,
            trace: Vec::new(),
        }
    }

    pub fn total_kw(&self) -> f64 {
        self.phi_eps_total * self.base_power_kva
    }

    pub fn per_gen_kw(&self) -> f64 {
        self.phi_eps_per_gen * self.base_power_kva
    }
}

/// 1-based rank of the order statistic used for Φ_ε.
pub fn quantile_rank(epsilon: f64, n_mc: usize) -> usize {
    // Guard against 0.05 * 1000 = 50.000000000000007 rounding up to 51.
    let k = (epsilon * n_mc as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(n_mc)
}

/// Φ_ε from a fixed-voltage sample set: `n_gen` times the
/// `max(1, ⌈ε·N_MC⌉)`-th smallest per-generator power, unbounded last.
pub fn estimate_phi_eps(samples: &HcSampleSet, epsilon: f64) -> Result<HcEstimate> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if samples.p_gen_max.is_empty() {
        return Err(Error::invalid("empty sample set"));
    }
    let finite = samples.sorted_finite();
    if finite.is_empty() {
        return Err(Error::AllUnbounded);
    }
    let k = quantile_rank(epsilon, samples.n_mc());
    let per_gen = finite.get(k - 1).copied().unwrap_or(f64::INFINITY);
    let mut est = HcEstimate::new(per_gen, samples.n_gen, epsilon, Method::FixedVoltage);
    est.wall_time_s = samples.wall_time_s;
    est.base_power_kva = samples.meta.base_power_kva;
    Ok(est)
}

/// Fraction of scenarios in which splitting `p_total` evenly over the
/// scenario's generators pushes some load above `v_plus`.
pub fn eps_hat(mag: &MagnitudeModel, scenarios: &[Scenario], p_total: f64, v_plus: f64) -> Result<f64> {
    if scenarios.is_empty() {
        return Err(Error::invalid("empty scenario set"));
    }
    let violations: usize = scenarios
        .par_iter()
        .map(|s| -> Result<usize> {
            let lam = mag.indicator(s)?;
            let p = p_total / s.n_gen() as f64;
            let sens = mag.sensitivity(&lam);
            let v = load_voltages(mag, &sens, p);
            Ok(usize::from(v.iter().any(|&v| v > v_plus)))
        })
        .sum::<Result<usize>>()?;
    Ok(violations as f64 / scenarios.len() as f64)
}

/// Mixed relative/absolute change between successive ε̂ values.
pub fn error_metric(eps_j: f64, eps_jm1: f64, epsilon: f64) -> f64 {
    ((eps_j - epsilon) - (eps_jm1 - epsilon)).abs() / (1.0 + (eps_jm1 - epsilon).abs())
}

/// Bisection on total power so that ε̂ brackets ε.
///
/// The bracket ends are the two most recent iterates on either side of ε;
/// iteration stops once `error_metric(ε̂_new, ε̂_other_end) < tau`, or when
/// the bracket has shrunk to [`BRACKET_RTOL`] (ε̂ jumps across ε at a single
/// power). The returned Φ is the last iterate.
#[allow(clippy::too_many_arguments)]
pub fn bisect_fixed_power(
    mag: &MagnitudeModel,
    scenarios: &[Scenario],
    epsilon: f64,
    tau: f64,
    p0: f64,
    p1: f64,
    v_plus: f64,
    max_iter: usize,
) -> Result<HcEstimate> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let start = Instant::now();
    let mut trace = Vec::new();
    let e0 = eval_eps(mag, scenarios, p0, v_plus, &mut trace)?;
    let e1 = if e0 == epsilon {
        e0
    } else {
        eval_eps(mag, scenarios, p1, v_plus, &mut trace)?
    };
    let mut est = bisect_from(mag, scenarios, epsilon, tau, (p0, e0), (p1, e1), v_plus, max_iter, trace)?;
    est.wall_time_s = start.elapsed().as_secs_f64();
    Ok(est)
}

fn eval_eps(
    mag: &MagnitudeModel,
    scenarios: &[Scenario],
    p: f64,
    v_plus: f64,
    trace: &mut Vec<BisectionStep>,
) -> Result<f64> {
    let e = eps_hat(mag, scenarios, p, v_plus)?;
    trace.push(BisectionStep { p_total: p, eps_hat: e });
    Ok(e)
}

/// Bisection from bracket ends whose ε̂ values are already in `trace`.
#[allow(clippy::too_many_arguments)]
fn bisect_from(
    mag: &MagnitudeModel,
    scenarios: &[Scenario],
    epsilon: f64,
    tau: f64,
    (p0, e0): (f64, f64),
    (p1, e1): (f64, f64),
    v_plus: f64,
    max_iter: usize,
    mut trace: Vec<BisectionStep>,
) -> Result<HcEstimate> {
    let n_gen = scenarios
        .first()
        .map(Scenario::n_gen)
        .ok_or_else(|| Error::invalid("empty scenario set"))?;
    let finish = |p: f64, trace: Vec<BisectionStep>| {
        let mut est = HcEstimate::new(p / n_gen as f64, n_gen, epsilon, Method::FixedPower);
        est.phi_eps_total = p;
        est.iterations = trace.len();
        est.trace = trace;
        est
    };
    if e0 == epsilon {
        return Ok(finish(p0, trace));
    }
    if !(e0 <= epsilon && epsilon <= e1) {
        return Err(Error::InvalidBracket {
            p0,
            p1,
            eps0: e0,
            eps1: e1,
            epsilon,
        });
    }
    if e1 == epsilon {
        return Ok(finish(p1, trace));
    }
    let (mut lo, mut e_lo) = (p0, e0);
    let (mut hi, mut e_hi) = (p1, e1);
    let mut last = p1;
    let mut err = error_metric(e_hi, e_lo, epsilon);
    while err >= tau && (hi - lo) > BRACKET_RTOL * hi.abs() {
        if trace.len() >= max_iter {
            return Err(Error::BisectionNotConverged {
                iterations: trace.len(),
                error: err,
            });
        }
        let mid = 0.5 * (lo + hi);
        let e_mid = eval_eps(mag, scenarios, mid, v_plus, &mut trace)?;
        last = mid;
        if e_mid == epsilon {
            break;
        }
        if e_mid > epsilon {
            err = error_metric(e_mid, e_lo, epsilon);
            hi = mid;
            e_hi = e_mid;
        } else {
            err = error_metric(e_mid, e_hi, epsilon);
            lo = mid;
            e_lo = e_mid;
        }
    }
    Ok(finish(last, trace))
}

/// Fixed-power study with the bracket `[0, Φ(100%)]`, doubling the upper end
/// (at most [`MAX_BRACKET_DOUBLINGS`] times) until ε̂ reaches ε there.
pub fn run_fixed_power(
    mag: &MagnitudeModel,
    scenarios: &[Scenario],
    epsilon: f64,
    tau: f64,
    v_plus: f64,
    max_iter: usize,
) -> Result<HcEstimate> {
    let full = match full_penetration_capacity(mag, v_plus)? {
        MaxGen::Bounded(p) => p * mag.n_loads() as f64,
        MaxGen::Unbounded => return Err(Error::AllUnbounded),
    };
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let start = Instant::now();
    let mut trace = Vec::new();
    let e0 = eval_eps(mag, scenarios, 0.0, v_plus, &mut trace)?;
    let mut p1 = full;
    let mut e1 = e0;
    let mut doublings = 0;
    if e0 != epsilon {
        e1 = eval_eps(mag, scenarios, p1, v_plus, &mut trace)?;
        while e1 < epsilon && doublings < MAX_BRACKET_DOUBLINGS {
            p1 *= 2.0;
            doublings += 1;
            e1 = eval_eps(mag, scenarios, p1, v_plus, &mut trace)?;
        }
    }
    let mut est = bisect_from(mag, scenarios, epsilon, tau, (0.0, e0), (p1, e1), v_plus, max_iter, trace)?;
    est.bracket_doublings = doublings;
    est.wall_time_s = start.elapsed().as_secs_f64();
    Ok(est)
}

// ---------------------------------------------------------------------------
// Penetration sweeps

/// One CSV row: a statistic of Φ (and φ) at one penetration level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n_gen: usize,
    pub n_pen: f64,
    pub stat_name: String,
    pub phi_total_kw: f64,
    pub phi_per_gen_kw: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistributionSummary {
    pub rows: Vec<SummaryRow>,
}

pub const BOX_STATS: [&str; 5] = ["min", "q1", "median", "q3", "max"];

pub fn eps_stat_name(epsilon: f64) -> String {
    format!("eps_{epsilon}")
}

/// Linear-interpolation quantile of ascending data (+∞ allowed at the top).
pub fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty data");
    let h = (xs.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= xs.len() {
        xs[lo]
    } else {
        xs[lo] + frac * (xs[lo + 1] - xs[lo])
    }
}

impl DistributionSummary {
    pub fn levels(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.rows.iter().map(|r| r.n_gen).collect();
        v.dedup();
        v
    }

    pub fn stat(&self, n_gen: usize, name: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.n_gen == n_gen && r.stat_name == name)
    }

    pub fn push_level(&mut self, samples: &HcSampleSet, eps_list: &[f64]) -> Result<()> {
        let base = samples.meta.base_power_kva;
        let n_gen = samples.n_gen;
        let n_pen = crate::scenarios::penetration(n_gen, samples.n_lds);
        let mut all: Vec<f64> = samples.p_gen_max.clone();
        all.sort_by(f64::total_cmp);
        let mut push = |name: String, per_gen_pu: f64| {
            let per_gen_kw = per_gen_pu * base;
            self.rows.push(SummaryRow {
                n_gen,
                n_pen,
                stat_name: name,
                phi_total_kw: n_gen as f64 * per_gen_kw,
                phi_per_gen_kw: per_gen_kw,
            });
        };
        for (name, q) in BOX_STATS.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            push(name.to_string(), quantile_sorted(&all, q));
        }
        for &eps in eps_list {
            push(eps_stat_name(eps), estimate_phi_eps(samples, eps)?.phi_eps_per_gen);
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
        Ok(DistributionSummary { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Fixed-voltage studies at each `n_gen`, summarized as boxplot statistics
/// and Φ_ε for each requested ε.
pub fn sweep_penetration(
    mag: &MagnitudeModel,
    n_gen_list: &[usize],
    n_mc: usize,
    seed: u64,
    v_plus: f64,
    eps_list: &[f64],
    base_power_kva: f64,
) -> Result<DistributionSummary> {
    if n_gen_list.is_empty() {
        return Err(Error::invalid("empty n_gen list"));
    }
    let mut summary = DistributionSummary::default();
    for &n_gen in n_gen_list {
        let samples = run_fixed_voltage(mag, n_gen, n_mc, seed, v_plus)?.with_feeder("", base_power_kva);
        summary.push_level(&samples, eps_list)?;
    }
    Ok(summary)
}

/// Draws the shared scenario set used by both methods.
pub fn shared_scenarios(mag: &MagnitudeModel, n_gen: usize, n_mc: usize, seed: u64) -> Result<Vec<Scenario>> {
    draw_scenarios(seed, mag.n_loads(), n_gen, n_mc)
}
