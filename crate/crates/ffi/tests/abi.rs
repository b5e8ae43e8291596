use std::ffi::{c_char, CStr, CString};
use std::ptr;

use k2reg_ffi::*;

const CFG_B: &str = r#"{"groups": [{"a": "1", "b": "0", "offsets": ["0", "1"]}, {"a": "0", "b": "1", "offsets": ["0", "1"]}], "t": "1/10000"}"#;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let v = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { k2reg_string_free(s) };
    v
}

fn last_error() -> String {
    let p = k2reg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(json: &str) -> *mut K2Config {
    let c = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { k2reg_config_from_json(c.as_ptr(), &mut h) },
        K2Status::Ok
    );
    h
}

#[test]
fn config_round_trip_and_genus() {
    let h = load(CFG_B);
    let mut g = 0u64;
    assert_eq!(unsafe { k2reg_config_genus(h, &mut g) }, K2Status::Ok);
    assert_eq!(g, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { k2reg_config_to_json(h, &mut s) }, K2Status::Ok);
    let text = take(s);
    let again = load(&text);
    unsafe {
        k2reg_config_free(again);
        k2reg_config_free(h);
    }
    assert!(k2reg_last_error().is_null());
}

#[test]
fn null_and_bad_input() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { k2reg_config_from_json(ptr::null(), &mut h) },
        K2Status::InvalidArgument
    );
    assert!(last_error().contains("null"));
    let bad = CString::new("{\"groups\": []").unwrap();
    assert_eq!(
        unsafe { k2reg_config_from_json(bad.as_ptr(), &mut h) },
        K2Status::InvalidInput
    );
    assert!(h.is_null());
    let mut g = 0u64;
    assert_eq!(
        unsafe { k2reg_config_genus(ptr::null(), &mut g) },
        K2Status::InvalidArgument
    );
    unsafe {
        k2reg_config_free(ptr::null_mut());
        k2reg_string_free(ptr::null_mut());
    }
}

#[test]
fn tame_and_validate() {
    let h = load(CFG_B);
    let mut s = ptr::null_mut();
    let mut passed = false;
    assert_eq!(
        unsafe { k2reg_tame_check_json(h, &mut s, &mut passed) },
        K2Status::Ok
    );
    assert!(passed);
    assert!(take(s).contains("R("));
    assert_eq!(unsafe { k2reg_validate_json(h, &mut s) }, K2Status::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert!(v["checks"].is_array());
    unsafe { k2reg_config_free(h) };
}

#[test]
fn regulator_normalized_near_one() {
    let h = load(CFG_B);
    let mut s = ptr::null_mut();
    let mut n = 0.0;
    assert_eq!(
        unsafe { k2reg_regulator_json(h, 1e-6, 0, &mut s, &mut n) },
        K2Status::Ok
    );
    assert!((n - 1.0).abs() < 0.15, "{n}");
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["normalized"].as_f64().unwrap(), n);
    assert_eq!(
        unsafe { k2reg_regulator_json(h, f64::NAN, 0, &mut s, &mut n) },
        K2Status::InvalidInput
    );
    unsafe { k2reg_config_free(h) };
}

#[test]
fn hyperelliptic_flags() {
    let mut b = false;
    assert_eq!(
        unsafe { k2reg_is_hyperelliptic(3, 1, 1, &mut b) },
        K2Status::Ok
    );
    assert!(b);
    assert_eq!(
        unsafe { k2reg_is_hyperelliptic(2, 2, 1, &mut b) },
        K2Status::Ok
    );
    assert!(!b);
    assert_eq!(
        unsafe { k2reg_is_hyperelliptic(1, 2, 0, &mut b) },
        K2Status::InvalidInput
    );
}

#[test]
fn run_reports_exit_codes() {
    let args: Vec<CString> = ["hyperelliptic", "--max-n1", "2"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let mut s = ptr::null_mut();
    let mut code = -1;
    assert_eq!(
        unsafe { k2reg_run(ptrs.as_ptr(), ptrs.len(), &mut s, &mut code) },
        K2Status::Ok
    );
    assert_eq!(code, 0);
    assert!(take(s).contains("\"passed\": true"));

    let args = [CString::new("regulator").unwrap()];
    let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(
        unsafe { k2reg_run(ptrs.as_ptr(), 1, &mut s, &mut code) },
        K2Status::Ok
    );
    assert_eq!(code, 2);
    assert!(take(s).is_empty());
    assert!(last_error().contains("configuration"));
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(k2reg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
