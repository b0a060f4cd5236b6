//! Command-line front end: argument types, study configuration and the three
//! study commands. `main.rs` only parses arguments and maps errors to exit
//! codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feeders;
use crate::hostcap::{
    estimate_phi_eps, full_penetration_capacity, load_voltages, run_fixed_power, run_fixed_voltage,
    shared_scenarios, sweep_penetration, DistributionSummary, HcEstimate, MaxGen, Method,
};
use crate::loadflow::{FeederModel, SolveOptions};
use crate::netmodel::{load_feeder, NetworkModel};
use crate::scenarios::Scenario;

#[derive(Debug, Parser)]
#[command(name = "lvhc", version, about = "Stochastic PV hosting capacity of LV feeders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the linear voltage model with the nonlinear load flow at 100% penetration.
    Validate(ValidateArgs),
    /// Estimate Φ_ε at one penetration level.
    Estimate(EstimateArgs),
    /// Boxplot statistics of Φ and φ over a list of penetration levels.
    Sweep(SweepArgs),
    /// List the bundled feeders, or print one as a feeder file.
    Feeders {
        #[arg(long)]
        dump: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    FixedVoltage,
    FixedPower,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::FixedVoltage => Method::FixedVoltage,
            MethodArg::FixedPower => Method::FixedPower,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Feeder file, or `builtin:<name>` for a bundled feeder.
    #[arg(long)]
    pub feeder: String,
    /// Voltage upper limit, pu (overrides the feeder file).
    #[arg(long)]
    pub vmax: Option<f64>,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value = "lvhc-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of injection steps between zero and the 100% capacity.
    #[arg(long, default_value_t = 20)]
    pub levels: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "fixed-voltage")]
    pub method: MethodArg,
    /// Penetration fraction in (0, 1].
    #[arg(long, conflicts_with = "ngen", required_unless_present = "ngen")]
    pub npen: Option<f64>,
    /// Number of generators.
    #[arg(long)]
    pub ngen: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub nmc: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bisection tolerance on the ε̂ error metric.
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated penetration fractions.
    #[arg(long, value_delimiter = ',', conflicts_with = "ngen", required_unless_present = "ngen")]
    pub npen: Option<Vec<f64>>,
    /// Comma-separated generator counts.
    #[arg(long, value_delimiter = ',')]
    pub ngen: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    pub nmc: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// How the number of generators is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Penetration {
    Fraction(Vec<f64>),
    Count(Vec<usize>),
}

/// A validated study description.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub feeder: String,
    pub method: Method,
    pub penetration: Penetration,
    pub n_mc: usize,
    pub eps: Vec<f64>,
    pub v_plus: Option<f64>,
    pub seed: u64,
    pub tau: f64,
    pub max_iter: usize,
    pub threads: usize,
    pub out: PathBuf,
}

impl StudyConfig {
    pub fn check(&self) -> Result<()> {
        match &self.penetration {
            Penetration::Fraction(v) if v.is_empty() => return Err(Error::invalid("empty --npen list")),
            Penetration::Count(v) if v.is_empty() => return Err(Error::invalid("empty --ngen list")),
            Penetration::Fraction(v) => {
                if let Some(f) = v.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                    return Err(Error::invalid(format!("penetration {f} outside (0, 1]")));
                }
            }
            Penetration::Count(_) => {}
        }
        if self.n_mc == 0 {
            return Err(Error::invalid("--nmc must be at least 1"));
        }
        if let Some(e) = self.eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::invalid(format!("epsilon {e} outside [0, 1]")));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("--tau must be positive"));
        }
        if let Some(v) = self.v_plus {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("--vmax must be a positive number"));
            }
        }
        Ok(())
    }

    /// Generator counts for a feeder with `n_lds` loads.
    pub fn n_gen_list(&self, n_lds: usize) -> Result<Vec<usize>> {
        let list: Vec<usize> = match &self.penetration {
            Penetration::Count(v) => v.clone(),
            Penetration::Fraction(v) => v
                .iter()
                .map(|f| ((f * n_lds as f64).round() as usize).max(1))
                .collect(),
        };
        if let Some(n) = list.iter().find(|&&n| n == 0 || n > n_lds) {
            return Err(Error::invalid(format!("n_gen {n} outside 1..={n_lds}")));
        }
        Ok(list)
    }

    fn from_estimate(a: &EstimateArgs) -> Self {
        StudyConfig {
            feeder: a.common.feeder.clone(),
            method: a.method.into(),
            penetration: match (a.npen, a.ngen) {
                (_, Some(n)) => Penetration::Count(vec![n]),
                (Some(f), None) => Penetration::Fraction(vec![f]),
                (None, None) => Penetration::Count(Vec::new()),
            },
            n_mc: a.nmc,
            eps: a.eps.clone(),
            v_plus: a.common.vmax,
            seed: a.seed,
            tau: a.tau,
            max_iter: a.max_iter,
            threads: a.common.threads,
            out: a.common.out.clone(),
        }
    }

    fn from_sweep(a: &SweepArgs) -> Self {
        StudyConfig {
            feeder: a.common.feeder.clone(),
            method: Method::FixedVoltage,
            penetration: match (&a.npen, &a.ngen) {
                (_, Some(n)) => Penetration::Count(n.clone()),
                (Some(f), None) => Penetration::Fraction(f.clone()),
                (None, None) => Penetration::Count(Vec::new()),
            },
            n_mc: a.nmc,
            eps: a.eps.clone(),
            v_plus: a.common.vmax,
            seed: a.seed,
            tau: 0.01,
            max_iter: 100,
            threads: a.common.threads,
            out: a.common.out.clone(),
        }
    }
}

/// Loads a feeder file, or a bundled feeder given as `builtin:<name>`.
pub fn resolve_feeder(feeder: &str) -> Result<NetworkModel> {
    match feeder.strip_prefix("builtin:") {
        Some(name) => feeders::builtin(name).unwrap_or_else(|| {
            Err(Error::invalid(format!(
                "unknown bundled feeder `{name}` (have: {})",
                feeders::NAMES.join(", ")
            )))
        }),
        None => load_feeder(feeder),
    }
}

fn prepare(feeder: &str, v_plus: Option<f64>) -> Result<FeederModel> {
    let mut net = resolve_feeder(feeder)?;
    if let Some(v) = v_plus {
        net.v_plus = v;
        net.validate()?;
    }
    FeederModel::build(net)
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
        .install(f)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub level: usize,
    pub p_gen_kw: f64,
    pub p_total_kw: f64,
    pub v_linear_max: f64,
    pub v_nonlinear_max: f64,
    /// Largest |v_linear − v_nonlinear| over load nodes, pu.
    pub max_abs_err: f64,
    /// Largest nonlinear magnitude at a non-load, non-slack node, pu.
    pub v_nonload_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub feeder: String,
    pub v_plus: f64,
    /// Deterministic per-house export power at 100% penetration, kW.
    pub p_house_kw: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn max_abs_err(&self) -> f64 {
        self.rows.iter().map(|r| r.max_abs_err).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Sweeps a uniform per-house injection from zero to the 100%-penetration
/// capacity and compares linear and nonlinear load voltages at each step.
pub fn linearization_report(model: &FeederModel, v_plus: f64, levels: usize) -> Result<ValidationReport> {
    if levels == 0 {
        return Err(Error::invalid("--levels must be at least 1"));
    }
    let mag = &model.magnitude;
    let p_cap = match full_penetration_capacity(mag, v_plus)? {
        MaxGen::Bounded(p) => p,
        MaxGen::Unbounded => return Err(Error::AllUnbounded),
    };
    let all = Scenario {
        omega: (0..model.n_loads()).collect(),
        seed_id: 0,
    };
    let sens = mag.sensitivity(&mag.indicator(&all)?);
    let opts = SolveOptions {
        tol: 1e-11,
        max_iter: 500,
        ..SolveOptions::default()
    };
    let base = model.net.base_power_kva;
    let is_load_row: Vec<bool> = {
        let mut v = vec![false; model.adm.ordering.n_nodes()];
        for &r in &mag.load_rows {
            v[r] = true;
        }
        v
    };
    let mut rows = Vec::with_capacity(levels + 1);
    for level in 0..=levels {
        let p = p_cap * level as f64 / levels as f64;
        let linear = load_voltages(mag, &sens, p);
        let sol = model
            .solve_with_generation(&vec![p; model.n_loads()], &opts)
            .map_err(|e| match e {
                Error::NonConvergence { iterations, residual } => Error::invalid(format!(
                    "load flow failed at level {level} ({:.4} kW per house): {iterations} iterations, residual {residual:.3e}",
                    p * base
                )),
                other => other,
            })?;
        let mags = sol.magnitudes();
        let nonlinear: Vec<f64> = mag.load_rows.iter().map(|&r| mags[r]).collect();
        let max_abs_err = linear
            .iter()
            .zip(&nonlinear)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let v_nonload_max = mags
            .iter()
            .enumerate()
            .filter(|(r, _)| *r >= 3 && !is_load_row[*r])
            .map(|(_, v)| *v)
            .fold(f64::NAN, f64::max);
        rows.push(ValidationRow {
            level,
            p_gen_kw: p * base,
            p_total_kw: p * base * model.n_loads() as f64,
            v_linear_max: linear.iter().copied().fold(f64::MIN, f64::max),
            v_nonlinear_max: nonlinear.iter().copied().fold(f64::MIN, f64::max),
            max_abs_err,
            v_nonload_max,
        });
    }
    Ok(ValidationReport {
        feeder: model.net.name.clone(),
        v_plus,
        p_house_kw: p_cap * base,
        rows,
    })
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<ValidationReport> {
    let model = prepare(&args.common.feeder, args.common.vmax)?;
    let v_plus = model.v_plus();
    let report = with_threads(args.common.threads, || linearization_report(&model, v_plus, args.levels))?;
    create_dir(&args.common.out)?;
    let path = args.common.out.join("validate.csv");
    let file = fs::File::create(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
    report.write_csv(file)?;
    let _ = writeln!(
        out,
        "feeder {}: {} loads, v+ = {} pu\nper-house export at 100% penetration: {:.4} kW\nmax |v_linear - v_nonlinear| = {:.3e} pu\nwrote {}",
        report.feeder,
        model.n_loads(),
        v_plus,
        report.p_house_kw,
        report.max_abs_err(),
        path.display()
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutput {
    pub feeder: String,
    pub n_gen: usize,
    pub n_lds: usize,
    pub n_mc: usize,
    pub seed: u64,
    pub v_plus: f64,
    pub estimates: Vec<HcEstimate>,
}

pub fn cmd_estimate(args: &EstimateArgs, out: &mut dyn Write) -> Result<EstimateOutput> {
    let config = StudyConfig::from_estimate(args);
    config.check()?;
    run_estimate(&config, out)
}

pub fn run_estimate(config: &StudyConfig, out: &mut dyn Write) -> Result<EstimateOutput> {
    config.check()?;
    let model = prepare(&config.feeder, config.v_plus)?;
    let mag = &model.magnitude;
    let v_plus = model.v_plus();
    let n_lds = model.n_loads();
    let n_gen = config.n_gen_list(n_lds)?[0];
    let base = model.net.base_power_kva;
    let name = model.net.name.clone();
    create_dir(&config.out)?;

    let estimates = with_threads(config.threads, || match config.method {
        Method::FixedVoltage => {
            let samples =
                run_fixed_voltage(mag, n_gen, config.n_mc, config.seed, v_plus)?.with_feeder(&name, base);
            write_file(&config.out.join("samples.json"), &samples.to_json())?;
            config
                .eps
                .iter()
                .map(|&e| estimate_phi_eps(&samples, e))
                .collect::<Result<Vec<_>>>()
        }
        Method::FixedPower => {
            let scenarios = shared_scenarios(mag, n_gen, config.n_mc, config.seed)?;
            config
                .eps
                .iter()
                .map(|&e| {
                    let mut est = run_fixed_power(mag, &scenarios, e, config.tau, v_plus, config.max_iter)?;
                    est.base_power_kva = base;
                    Ok(est)
                })
                .collect::<Result<Vec<_>>>()
        }
    })?;

    let output = EstimateOutput {
        feeder: name,
        n_gen,
        n_lds,
        n_mc: config.n_mc,
        seed: config.seed,
        v_plus,
        estimates,
    };
    write_file(
        &config.out.join("estimate.json"),
        &serde_json::to_string_pretty(&output)?,
    )?;
    let _ = writeln!(
        out,
        "feeder {} | method {} | n_gen {}/{} | N_MC {} | seed {}",
        output.feeder, config.method, n_gen, n_lds, config.n_mc, config.seed
    );
    for est in &output.estimates {
        let _ = write!(
            out,
            "Phi_{} = {:.4} kW ({:.6} pu), per generator {:.4} kW, wall time {:.4} s",
            est.epsilon,
            est.total_kw(),
            est.phi_eps_total,
            est.per_gen_kw(),
            est.wall_time_s
        );
        if est.method == Method::FixedPower {
            let _ = write!(out, ", iterations {}", est.iterations);
        }
        let _ = writeln!(out);
    }
    Ok(output)
}

// ---------------------------------------------------------------------------
// sweep

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<DistributionSummary> {
    let config = StudyConfig::from_sweep(args);
    run_sweep(&config, out)
}

pub fn run_sweep(config: &StudyConfig, out: &mut dyn Write) -> Result<DistributionSummary> {
    config.check()?;
    let model = prepare(&config.feeder, config.v_plus)?;
    let n_gen_list = config.n_gen_list(model.n_loads())?;
    let v_plus = model.v_plus();
    let summary = with_threads(config.threads, || {
        sweep_penetration(
            &model.magnitude,
            &n_gen_list,
            config.n_mc,
            config.seed,
            v_plus,
            &config.eps,
            model.net.base_power_kva,
        )
    })?;
    create_dir(&config.out)?;
    let path = config.out.join("summary.csv");
    summary.save(&path)?;
    let _ = writeln!(out, "{:>6} {:>6} {:>10} {:>14} {:>14}", "n_gen", "n_pen", "stat", "Phi_kW", "phi_kW");
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{:>6} {:>6.3} {:>10} {:>14.4} {:>14.4}",
            r.n_gen, r.n_pen, r.stat_name, r.phi_total_kw, r.phi_per_gen_kw
        );
    }
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(summary)
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a, out).map(|_| ()),
        Command::Estimate(a) => cmd_estimate(a, out).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(a, out).map(|_| ()),
        Command::Feeders { dump } => {
            match dump {
                Some(name) => {
                    let text = feeders::source(name)
                        .ok_or_else(|| Error::invalid(format!("unknown bundled feeder `{name}`")))?;
                    let _ = out.write_all(text.as_bytes());
                }
                None => {
                    for name in feeders::NAMES {
                        let net = feeders::builtin(name).expect("bundled")?;
                        let _ = writeln!(
                            out,
                            "builtin:{name:<8} {:>4} buses {:>4} loads  v+ {} pu",
                            net.n_buses(),
                            net.n_loads(),
                            net.v_plus
                        );
                    }
                }
            }
            Ok(())
        }
    }
}
