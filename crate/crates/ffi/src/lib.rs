//! C ABI over the edgesim core.
//!
//! Every fallible function returns an [`EdgesimStatus`]. On failure a
//! message is available from [`edgesim_last_error`] on the same thread.
//! Panics never cross the boundary; they surface as `EDGESIM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use edgesim::engine::{run_scenario, Engine};
use edgesim::error::SimError;
use edgesim::scenario::{parse_scenario, ScenarioConfig, ScenarioError};
use edgesim::stats::ks_test;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgesimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidScenario = 3,
    InvalidArgument = 4,
    SimulationFailed = 5,
    Io = 6,
    Panic = 7,
}

/// Values accepted by the `engine` argument of [`edgesim_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgesimEngine {
    Baseline = 0,
    Renovated = 1,
}

/// Opaque scenario handle.
pub struct EdgesimScenario {
    cfg: ScenarioConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgesimSummary {
    pub tasks_generated: u64,
    pub completed: u64,
    pub failed_network: u64,
    pub failed_mobility: u64,
    pub failed_vm: u64,
    pub failed_rel_pct: f64,
    /// NaN when no task completed.
    pub avg_service_time_s: f64,
    pub wall_time_s: f64,
    pub peak_queue_size: u64,
    pub events_dispatched: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgesimKsResult {
    pub d: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(EdgesimStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::Scenario(ScenarioError::Io(_)) | SimError::Io(_) => EdgesimStatus::Io,
            SimError::Scenario(_) => EdgesimStatus::InvalidScenario,
            SimError::InvalidArgument(_) | SimError::Stats(_) => EdgesimStatus::InvalidArgument,
            _ => EdgesimStatus::SimulationFailed,
        };
        Failure(status, e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        SimError::from(e).into()
    }
}

fn null(what: &str) -> Failure {
    Failure(EdgesimStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EdgesimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EdgesimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            EdgesimStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(EdgesimStatus::InvalidUtf8, format!("`{what}` is not UTF-8: {e}")))
}

unsafe fn store_handle(out: *mut *mut EdgesimScenario, cfg: ScenarioConfig) {
    *out = Box::into_raw(Box::new(EdgesimScenario { cfg }));
}

/// Parses and validates a scenario from a JSON string.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable. The
/// handle written to `out` must be released with [`edgesim_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_from_json(
    json: *const c_char,
    out: *mut *mut EdgesimScenario,
) -> EdgesimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = ScenarioConfig::from_json(str_arg(json, "json")?)?;
        store_handle(out, cfg);
        Ok(())
    })
}

/// Reads, parses and validates a scenario file.
///
/// # Safety
/// As [`edgesim_scenario_from_json`], with `path` a nul-terminated path.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_from_file(
    path: *const c_char,
    out: *mut *mut EdgesimScenario,
) -> EdgesimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = parse_scenario(Path::new(str_arg(path, "path")?))?;
        store_handle(out, cfg);
        Ok(())
    })
}

/// Releases a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_free(scenario: *mut EdgesimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Overrides the device population of a scenario.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_set_device_count(
    scenario: *mut EdgesimScenario,
    device_count: u32,
) -> EdgesimStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        let mut cfg = s.cfg.clone();
        cfg.device_count = device_count as usize;
        cfg.validate()?;
        s.cfg = cfg;
        Ok(())
    })
}

/// Runs one simulation and writes its summary to `out`.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn edgesim_run(
    scenario: *const EdgesimScenario,
    engine: i32,
    seed: u64,
    out: *mut EdgesimSummary,
) -> EdgesimStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let engine = match engine {
            x if x == EdgesimEngine::Baseline as i32 => Engine::Baseline,
            x if x == EdgesimEngine::Renovated as i32 => Engine::Renovated,
            other => return Err(Failure(EdgesimStatus::InvalidArgument, format!("unknown engine {other}"))),
        };
        let (m, stats) = run_scenario(&s.cfg, engine, seed)?;
        *out = EdgesimSummary {
            tasks_generated: m.tasks_generated,
            completed: m.completed,
            failed_network: m.failed_network,
            failed_mobility: m.failed_mobility,
            failed_vm: m.failed_vm,
            failed_rel_pct: m.failed_rel_pct,
            avg_service_time_s: m.avg_service_time_s.unwrap_or(f64::NAN),
            wall_time_s: m.wall_time_s,
            peak_queue_size: m.peak_queue_size,
            events_dispatched: stats.events_dispatched,
        };
        Ok(())
    })
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// # Safety
/// `a` and `b` must point to `n` and `m` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn edgesim_ks_test(
    a: *const f64,
    n: usize,
    b: *const f64,
    m: usize,
    out: *mut EdgesimKsResult,
) -> EdgesimStatus {
    guard(|| {
        if a.is_null() {
            return Err(null("a"));
        }
        if b.is_null() {
            return Err(null("b"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let a = std::slice::from_raw_parts(a, n);
        let b = std::slice::from_raw_parts(b, m);
        let r = ks_test(a, b).map_err(SimError::from)?;
        *out = EdgesimKsResult { d: r.d, p_value: r.p_value, n: r.n, m: r.m };
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn edgesim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn edgesim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
