//! C ABI over the `lvhc` engine.
//!
//! Feeders and sample sets are opaque handles created and released through
//! this API. Every fallible call returns an [`LvhcStatus`]; on failure the
//! message is available from [`lvhc_last_error_message`] on the same thread.
//! Strings returned by the library must be released with [`lvhc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lvhc::hostcap::{estimate_phi_eps, run_fixed_power, run_fixed_voltage, shared_scenarios};
use lvhc::{Error, FeederModel, HcEstimate, HcSampleSet, NetworkModel};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvhcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Singular = 6,
    NonConvergence = 7,
    InvalidArgument = 8,
    NoHeadroom = 9,
    AllUnbounded = 10,
    InvalidBracket = 11,
    BisectionNotConverged = 12,
    Serialization = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for LvhcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => LvhcStatus::Io,
            Error::Parse { .. } => LvhcStatus::Parse,
            Error::Validation(_) => LvhcStatus::Validation,
            Error::SingularBranch { .. } | Error::SingularAdmittance | Error::ZeroBaseVoltage { .. } => {
                LvhcStatus::Singular
            }
            Error::NonConvergence { .. } | Error::VoltageCollapse { .. } => LvhcStatus::NonConvergence,
            Error::Dimension { .. } | Error::InvalidArgument(_) => LvhcStatus::InvalidArgument,
            Error::NoHeadroom { .. } => LvhcStatus::NoHeadroom,
            Error::AllUnbounded => LvhcStatus::AllUnbounded,
            Error::InvalidBracket { .. } => LvhcStatus::InvalidBracket,
            Error::BisectionNotConverged { .. } => LvhcStatus::BisectionNotConverged,
            Error::Csv(_) | Error::Json(_) => LvhcStatus::Serialization,
        }
    }
}

/// A feeder with its admittance factorization and linear voltage model.
pub struct LvhcFeeder {
    model: FeederModel,
}

/// Per-generator fixed-voltage capacities of one Monte Carlo study.
pub struct LvhcSamples {
    samples: HcSampleSet,
}

/// Φ_ε estimate. Powers are per unit of the feeder's power base.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LvhcEstimate {
    pub phi_eps_total: f64,
    pub phi_eps_per_gen: f64,
    pub epsilon: f64,
    pub n_gen: usize,
    /// ε̂ evaluations (fixed power), 0 for fixed voltage.
    pub iterations: usize,
    pub wall_time_s: f64,
    pub base_power_kva: f64,
}

impl From<&HcEstimate> for LvhcEstimate {
    fn from(e: &HcEstimate) -> Self {
        LvhcEstimate {
            phi_eps_total: e.phi_eps_total,
            phi_eps_per_gen: e.phi_eps_per_gen,
            epsilon: e.epsilon,
            n_gen: e.n_gen,
            iterations: e.iterations,
            wall_time_s: e.wall_time_s,
            base_power_kva: e.base_power_kva,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(LvhcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LvhcStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LvhcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic for [`lvhc_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LvhcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LvhcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LvhcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LvhcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn feeder_ref<'a>(p: *const LvhcFeeder) -> Result<&'a FeederModel, Failure> {
    p.as_ref().map(|f| &f.model).ok_or_else(|| null("feeder"))
}

unsafe fn samples_ref<'a>(p: *const LvhcSamples) -> Result<&'a HcSampleSet, Failure> {
    p.as_ref().map(|s| &s.samples).ok_or_else(|| null("samples"))
}

fn resolve_v_plus(model: &FeederModel, v_plus: f64) -> f64 {
    if v_plus.is_nan() {
        model.v_plus()
    } else {
        v_plus
    }
}

unsafe fn emit_feeder(net: lvhc::Result<NetworkModel>, out: *mut *mut LvhcFeeder) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = ptr::null_mut();
    let model = FeederModel::build(net?)?;
    *out = Box::into_raw(Box::new(LvhcFeeder { model }));
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn lvhc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn lvhc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a JSON feeder file and builds its model.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_load(path: *const c_char, out: *mut *mut LvhcFeeder) -> LvhcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        emit_feeder(lvhc::netmodel::load_feeder(path), out)
    })
}

/// Builds a feeder from JSON text.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_from_json(json: *const c_char, out: *mut *mut LvhcFeeder) -> LvhcStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        emit_feeder(NetworkModel::from_json_str(text), out)
    })
}

/// Builds one of the bundled feeders (`twobus`, `synth10`, `synth55`).
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_builtin(name: *const c_char, out: *mut *mut LvhcFeeder) -> LvhcStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let net = lvhc::feeders::builtin(name).ok_or_else(|| {
            Failure(
                LvhcStatus::InvalidArgument,
                format!("unknown bundled feeder `{name}`"),
            )
        })?;
        emit_feeder(net, out)
    })
}

/// # Safety
/// `feeder` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_free(feeder: *mut LvhcFeeder) {
    if !feeder.is_null() {
        drop(Box::from_raw(feeder));
    }
}

/// Number of loads, or 0 for a null handle.
///
/// # Safety
/// `feeder` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_n_loads(feeder: *const LvhcFeeder) -> usize {
    feeder.as_ref().map_or(0, |f| f.model.n_loads())
}

/// Voltage upper limit from the feeder file, pu, or NaN for a null handle.
///
/// # Safety
/// `feeder` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvhc_feeder_v_plus(feeder: *const LvhcFeeder) -> f64 {
    feeder.as_ref().map_or(f64::NAN, |f| f.model.v_plus())
}

/// Fixed-voltage study over scenarios `0..n_mc` of `seed`. Pass NaN as
/// `v_plus` to use the feeder's limit.
///
/// # Safety
/// `feeder` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_run_fixed_voltage(
    feeder: *const LvhcFeeder,
    n_gen: usize,
    n_mc: usize,
    seed: u64,
    v_plus: f64,
    out: *mut *mut LvhcSamples,
) -> LvhcStatus {
    guard(|| {
        let model = feeder_ref(feeder)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let v_plus = resolve_v_plus(model, v_plus);
        let samples = run_fixed_voltage(&model.magnitude, n_gen, n_mc, seed, v_plus)?
            .with_feeder(&model.net.name, model.net.base_power_kva);
        *out = Box::into_raw(Box::new(LvhcSamples { samples }));
        Ok(())
    })
}

/// # Safety
/// `samples` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_free(samples: *mut LvhcSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_len(samples: *const LvhcSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.samples.n_mc())
}

/// Number of scenarios with no binding constraint.
///
/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_unbounded(samples: *const LvhcSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.samples.unbounded_count)
}

/// Copies per-generator capacities (pu, scenario order, +inf when
/// unbounded) into `buf`, which must hold at least `lvhc_samples_len` values.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_copy(samples: *const LvhcSamples, buf: *mut f64, len: usize) -> LvhcStatus {
    guard(|| {
        let s = samples_ref(samples)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let data = &s.p_gen_max;
        if len < data.len() {
            return Err(Failure(
                LvhcStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", data.len()),
            ));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Φ_ε from a fixed-voltage sample set.
///
/// # Safety
/// `samples` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_estimate(
    samples: *const LvhcSamples,
    epsilon: f64,
    out: *mut LvhcEstimate,
) -> LvhcStatus {
    guard(|| {
        let s = samples_ref(samples)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = LvhcEstimate::from(&estimate_phi_eps(s, epsilon)?);
        Ok(())
    })
}

/// Sample set as JSON; release the string with [`lvhc_string_free`].
///
/// # Safety
/// `samples` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvhc_samples_to_json(samples: *const LvhcSamples, out: *mut *mut c_char) -> LvhcStatus {
    guard(|| {
        let s = samples_ref(samples)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(s.to_json()).expect("JSON has no interior nul");
        *out = text.into_raw();
        Ok(())
    })
}

/// Fixed-power study: bisection on total power over scenarios `0..n_mc` of
/// `seed`, bracketed by the 100%-penetration capacity. Pass NaN as `v_plus`
/// to use the feeder's limit.
///
/// # Safety
/// `feeder` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lvhc_run_fixed_power(
    feeder: *const LvhcFeeder,
    n_gen: usize,
    n_mc: usize,
    seed: u64,
    epsilon: f64,
    tau: f64,
    v_plus: f64,
    max_iter: usize,
    out: *mut LvhcEstimate,
) -> LvhcStatus {
    guard(|| {
        let model = feeder_ref(feeder)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if n_mc == 0 {
            return Err(Failure(LvhcStatus::InvalidArgument, "n_mc must be at least 1".into()));
        }
        let v_plus = resolve_v_plus(model, v_plus);
        let scenarios = shared_scenarios(&model.magnitude, n_gen, n_mc, seed)?;
        let mut est = run_fixed_power(&model.magnitude, &scenarios, epsilon, tau, v_plus, max_iter)?;
        est.base_power_kva = model.net.base_power_kva;
        *out = LvhcEstimate::from(&est);
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvhc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
