use std::ffi::{CStr, CString};
use std::ptr;

use filtsens_ffi::*;

const CASE3: &str = include_str!("../../core/examples/ct_p_case3.json");
const CASE4: &str = include_str!("../../core/examples/ct_p_case4.json");
const DT_M: &str = include_str!("../../core/examples/dt_m.json");

fn load(doc: &str) -> (FsensStatus, *mut FsensSystem) {
    let json = CString::new(doc).unwrap();
    let mut sys = ptr::null_mut();
    let status = unsafe { fsens_system_from_json(json.as_ptr(), &mut sys) };
    (status, sys)
}

fn last_error() -> String {
    let p = fsens_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn blank_integral() -> FsensIntegral {
    FsensIntegral { case_tag: FsensCase::Direct, bounded: false, value: f64::NAN, sign: 0, in_bits: false }
}

fn blank_quadrature() -> FsensQuadrature {
    FsensQuadrature { value: f64::NAN, abs_error_estimate: f64::NAN, n_evaluations: 0, diverged: false, sign: 0 }
}

#[test]
fn case3_round_trip() {
    let (status, sys) = load(CASE3);
    assert_eq!(status, FsensStatus::Ok);
    assert!(fsens_last_error().is_null());

    let mut p = blank_integral();
    assert_eq!(unsafe { fsens_p_integral(sys, &mut p) }, FsensStatus::Ok);
    assert_eq!(p.case_tag, FsensCase::CtPCase3Bounded);
    assert!(p.bounded && !p.in_bits && p.sign == 0);
    assert!((p.value - 0.3991).abs() < 5e-4);

    let mut q = blank_quadrature();
    assert_eq!(unsafe { fsens_p_quadrature(sys, 1e-6, &mut q) }, FsensStatus::Ok);
    assert!(!q.diverged && (q.value - p.value).abs() < 1e-3 && q.n_evaluations > 0);

    let mut dev = f64::NAN;
    assert_eq!(unsafe { fsens_complementarity(sys, 50, 1, &mut dev) }, FsensStatus::Ok);
    assert!(dev < 1e-9);

    let mut d = FsensDomain::Discrete;
    assert_eq!(unsafe { fsens_system_domain(sys, &mut d) }, FsensStatus::Ok);
    assert_eq!(d, FsensDomain::Continuous);
    unsafe { fsens_system_free(sys) };
}

#[test]
fn unbounded_results_carry_a_sign() {
    let (_, sys) = load(CASE4);
    let mut p = blank_integral();
    assert_eq!(unsafe { fsens_p_integral(sys, &mut p) }, FsensStatus::Ok);
    assert!(!p.bounded);
    assert_eq!((p.sign, p.value), (1, f64::INFINITY));
    let mut q = blank_quadrature();
    assert_eq!(unsafe { fsens_p_quadrature(sys, 1e-6, &mut q) }, FsensStatus::Ok);
    assert!(q.diverged && q.sign == 1);
    unsafe { fsens_system_free(sys) };
}

#[test]
fn dt_values_are_in_bits() {
    let (_, sys) = load(DT_M);
    let mut m = blank_integral();
    assert_eq!(unsafe { fsens_m_integral(sys, &mut m) }, FsensStatus::Ok);
    assert!(m.in_bits && m.case_tag == FsensCase::DtM);
    assert!((m.value - 0.5443).abs() < 5e-4);
    unsafe { fsens_system_free(sys) };
}

#[test]
fn bad_documents_are_reported() {
    let (status, sys) = load("{ not json");
    assert_eq!(status, FsensStatus::InvalidDocument);
    assert!(sys.is_null());
    assert!(last_error().contains("line 1"));

    let invalid = r#"{"domain": "ct",
        "gx": {"gain": 1, "poles": [[-1, 0]]},
        "gy": {"gain": 1, "poles": [[2, 0]]},
        "f": {"gain": 1, "poles": [[-3, 0]]}}"#;
    let (status, sys) = load(invalid);
    assert_eq!(status, FsensStatus::InvalidSystem);
    assert!(sys.is_null());
    assert!(!last_error().is_empty());

    let boundary = r#"{"domain": "ct",
        "gx": {"gain": 1, "poles": [[0, 0]]},
        "gy": {"gain": 1, "poles": [[-2, 0]]},
        "f": {"gain": 1, "poles": [[-3, 0]]}}"#;
    assert_eq!(load(boundary).0, FsensStatus::BoundaryRoot);
}

#[test]
fn null_arguments_are_rejected() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { fsens_system_from_json(ptr::null(), &mut sys) }, FsensStatus::NullArgument);
    let mut p = blank_integral();
    assert_eq!(unsafe { fsens_p_integral(ptr::null(), &mut p) }, FsensStatus::NullArgument);
    let (_, sys) = load(CASE3);
    assert_eq!(unsafe { fsens_m_integral(sys, ptr::null_mut()) }, FsensStatus::NullArgument);
    let mut q = blank_quadrature();
    assert_eq!(unsafe { fsens_m_quadrature(sys, -1.0, &mut q) }, FsensStatus::InvalidArgument);
    unsafe {
        fsens_system_free(sys);
        fsens_system_free(ptr::null_mut());
        fsens_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = CString::new(vec![0xff, 0xfe]).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { fsens_system_from_json(bytes.as_ptr(), &mut sys) }, FsensStatus::InvalidUtf8);
}

#[test]
fn analysis_report_is_json() {
    let json = CString::new(CASE3).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fsens_analyze_json(json.as_ptr(), false, &mut out) }, FsensStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { fsens_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["p_integral"]["case"], "CT_P_Case3_Bounded");
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(fsens_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
