use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use polewarp_ffi::*;

fn last_error() -> String {
    let p = pw_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn builtin_scenario_assesses_through_handles() {
    let name = CString::new("lorenz_stable").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pw_scenario_builtin(name.as_ptr(), &mut s) }, PwStatus::Ok);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pw_assess(s, &mut v) }, PwStatus::Ok);

    let mut status = PwStability::UnstableUnclassified;
    assert_eq!(unsafe { pw_verdict_status(v, &mut status) }, PwStatus::Ok);
    assert_eq!(status, PwStability::Stable);
    let mut tau = 0.0;
    assert_eq!(unsafe { pw_verdict_tau_pole(v, &mut tau) }, PwStatus::Ok);
    assert!((tau - 1.0).abs() <= 0.01);

    let json = unsafe { pw_verdict_to_json(v) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let record: polewarp::manifest::VerdictRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(record.config.name, "lorenz_stable");
    unsafe {
        pw_string_free(json);
        pw_verdict_free(v);
        pw_scenario_free(s);
    }
}

#[test]
fn unstable_verdict_has_no_pole() {
    let name = CString::new("lorenz_other_sep").unwrap();
    let mut s = ptr::null_mut();
    let mut v = ptr::null_mut();
    unsafe {
        assert_eq!(pw_scenario_builtin(name.as_ptr(), &mut s), PwStatus::Ok);
        assert_eq!(pw_assess(s, &mut v), PwStatus::Ok);
        let mut status = PwStability::Stable;
        assert_eq!(pw_verdict_status(v, &mut status), PwStatus::Ok);
        assert_eq!(status, PwStability::UnstableOtherSep);
        let mut h = 0.0;
        assert_eq!(pw_verdict_h_at_horizon(v, &mut h), PwStatus::Ok);
        assert!(h < 0.0);
        pw_verdict_free(v);
        pw_scenario_free(s);
    }
}

#[test]
fn bad_input_reports_config_errors() {
    let json = CString::new(r#"{"schema":"polewarp.scenario/9"}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pw_scenario_from_json(json.as_ptr(), &mut s) }, PwStatus::Config);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    let name = CString::new("no_such_case").unwrap();
    assert_eq!(unsafe { pw_scenario_builtin(name.as_ptr(), &mut s) }, PwStatus::Config);
    assert!(last_error().contains("no_such_case"));

    assert_eq!(unsafe { pw_scenario_builtin(ptr::null(), &mut s) }, PwStatus::NullPointer);
    assert_eq!(unsafe { pw_assess(ptr::null(), &mut ptr::null_mut()) }, PwStatus::NullPointer);
    unsafe {
        pw_scenario_free(ptr::null_mut());
        pw_verdict_free(ptr::null_mut());
        pw_string_free(ptr::null_mut());
    }
}

#[test]
fn rejected_digits_leave_the_scenario_unchanged() {
    let name = CString::new("lorenz_stable").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(pw_scenario_builtin(name.as_ptr(), &mut s), PwStatus::Ok);
        assert_eq!(pw_scenario_set_digits(s, 4), PwStatus::Config);
        assert!(last_error().contains("digits"));
        let mut v = ptr::null_mut();
        assert_eq!(pw_assess(s, &mut v), PwStatus::Ok);
        let mut tau = 0.0;
        assert_eq!(pw_verdict_tau_pole(v, &mut tau), PwStatus::Ok);
        pw_verdict_free(v);
        pw_scenario_free(s);
    }
}

#[test]
fn numerical_failures_are_distinguished() {
    let json = CString::new(
        r#"{"schema":"polewarp.scenario/1","name":"at_sep","model":{"kind":"lorenz","sigma":1,"rho":2,"beta":1},
            "initial":{"kind":"explicit","x":[1,1,1]},"sep_guess":[1,1,1],"mapping":{"K":1,"p":3},"order":{"L":10,"M":10}}"#,
    )
    .unwrap();
    let mut s = ptr::null_mut();
    let mut v = ptr::null_mut();
    unsafe {
        assert_eq!(pw_scenario_from_json(json.as_ptr(), &mut s), PwStatus::Ok);
        assert_eq!(pw_assess(s, &mut v), PwStatus::Numerical);
        assert!(v.is_null());
        pw_scenario_free(s);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/polewarp.h")).unwrap();
    for f in [
        "pw_last_error",
        "pw_scenario_from_json",
        "pw_scenario_builtin",
        "pw_scenario_set_digits",
        "pw_scenario_free",
        "pw_assess",
        "pw_verdict_status",
        "pw_verdict_tau_pole",
        "pw_verdict_h_at_horizon",
        "pw_verdict_to_json",
        "pw_verdict_free",
        "pw_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct PwScenario PwScenario;"));
}
