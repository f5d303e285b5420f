//! C interface to the stability assessment.
//!
//! Scenarios and verdicts are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`PwStatus`]; the message of the most recent failure on the calling
//! thread is available from [`pw_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polewarp::classifier::{assess, ScenarioConfig, StabilityStatus, StabilityVerdict};
use polewarp::manifest::VerdictRecord;
use polewarp::{scenarios, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Numerical = 3,
    InvalidUtf8 = 4,
    /// The requested value does not exist for this verdict.
    Absent = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwStability {
    Stable = 0,
    UnstableOtherSep = 1,
    UnstableDivergent = 2,
    UnstableUnclassified = 3,
}

impl From<StabilityStatus> for PwStability {
    fn from(s: StabilityStatus) -> Self {
        match s {
            StabilityStatus::Stable => PwStability::Stable,
            StabilityStatus::UnstableOtherSep => PwStability::UnstableOtherSep,
            StabilityStatus::UnstableDivergent => PwStability::UnstableDivergent,
            StabilityStatus::UnstableUnclassified => PwStability::UnstableUnclassified,
        }
    }
}

/// A validated scenario configuration.
pub struct PwScenario {
    config: ScenarioConfig,
}

/// The verdict of one assessment, with the configuration that produced it.
pub struct PwVerdict {
    record: VerdictRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: PwStatus, msg: impl Into<String>) -> PwStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> PwStatus {
    let status = match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Io(_) | Error::Json(_) => PwStatus::Config,
        _ => PwStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> PwStatus) -> PwStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(PwStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, PwStatus> {
    if s.is_null() {
        return Err(fail(PwStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PwStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn put<T>(out: *mut *mut T, value: T) -> PwStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    PwStatus::Ok
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pw_scenario_from_json(json: *const c_char, out: *mut *mut PwScenario) -> PwStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PwStatus::NullPointer, "out is null");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::from_json(text) {
            Ok(config) => put(out, PwScenario { config }),
            Err(e) => from_error(e),
        }
    })
}

/// Loads one of the scenarios bundled with the library by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pw_scenario_builtin(name: *const c_char, out: *mut *mut PwScenario) -> PwStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PwStatus::NullPointer, "out is null");
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match scenarios::builtin(name) {
            Some(Ok(config)) => put(out, PwScenario { config }),
            Some(Err(e)) => from_error(e),
            None => fail(PwStatus::Config, format!("no built-in scenario named {name:?}")),
        }
    })
}

/// Overrides the working precision in decimal digits.
///
/// # Safety
/// `scenario` must come from a `pw_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn pw_scenario_set_digits(scenario: *mut PwScenario, digits: u32) -> PwStatus {
    guarded(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(PwStatus::NullPointer, "scenario is null");
        };
        let previous = s.config.digits.replace(digits);
        match s.config.validate() {
            Ok(()) => PwStatus::Ok,
            Err(e) => {
                s.config.digits = previous;
                from_error(e)
            }
        }
    })
}

/// # Safety
/// `scenario` must be null or come from a `pw_scenario_*` constructor, and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_scenario_free(scenario: *mut PwScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the assessment.
///
/// # Safety
/// `scenario` must come from a `pw_scenario_*` constructor and `out` must be
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pw_assess(scenario: *const PwScenario, out: *mut *mut PwVerdict) -> PwStatus {
    guarded(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(PwStatus::NullPointer, "scenario or out is null");
        };
        match assess(&s.config) {
            Ok(verdict) => put(
                out,
                PwVerdict {
                    record: VerdictRecord {
                        config: s.config.clone(),
                        verdict,
                    },
                },
            ),
            Err(e) => from_error(e),
        }
    })
}

fn verdict<'a>(v: *const PwVerdict) -> Option<&'a StabilityVerdict> {
    // SAFETY: callers pass null or a handle from `pw_assess`.
    unsafe { v.as_ref() }.map(|v| &v.record.verdict)
}

/// # Safety
/// `v` must come from `pw_assess`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pw_verdict_status(v: *const PwVerdict, out: *mut PwStability) -> PwStatus {
    match (verdict(v), out.is_null()) {
        (Some(v), false) => {
            *out = v.status.into();
            PwStatus::Ok
        }
        _ => fail(PwStatus::NullPointer, "verdict or out is null"),
    }
}

/// Location of the detected pole on the contracted axis.
///
/// # Safety
/// `v` must come from `pw_assess`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pw_verdict_tau_pole(v: *const PwVerdict, out: *mut f64) -> PwStatus {
    match (verdict(v), out.is_null()) {
        (Some(v), false) => match v.tau_pole_f64() {
            Some(t) => {
                *out = t;
                PwStatus::Ok
            }
            None => fail(PwStatus::Absent, "no pole was kept"),
        },
        _ => fail(PwStatus::NullPointer, "verdict or out is null"),
    }
}

/// Value of the approximant just before the horizon.
///
/// # Safety
/// `v` must come from `pw_assess`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pw_verdict_h_at_horizon(v: *const PwVerdict, out: *mut f64) -> PwStatus {
    match (verdict(v), out.is_null()) {
        (Some(v), false) => match v.h_at_horizon {
            Some(h) => {
                *out = h;
                PwStatus::Ok
            }
            None => fail(PwStatus::Absent, "the approximant has a pole at the evaluation point"),
        },
        _ => fail(PwStatus::NullPointer, "verdict or out is null"),
    }
}

/// Configuration and verdict as JSON; release with [`pw_string_free`].
/// Returns null when `v` is null.
///
/// # Safety
/// `v` must be null or come from `pw_assess`.
#[no_mangle]
pub unsafe extern "C" fn pw_verdict_to_json(v: *const PwVerdict) -> *mut c_char {
    let Some(v) = v.as_ref() else {
        set_error("verdict is null".into());
        return ptr::null_mut();
    };
    let text = serde_json::to_string(&v.record).expect("verdict serializes");
    CString::new(text).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `v` must be null or come from `pw_assess`, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pw_verdict_free(v: *mut PwVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
