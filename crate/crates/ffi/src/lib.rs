//! C ABI over the `filtsens` analyzer.
//!
//! Every entry point returns an [`FsensStatus`]; on failure a message is kept per
//! thread and can be read with [`fsens_last_error`]. Systems are opaque handles
//! created from a JSON system document and released with [`fsens_system_free`].
//! Strings returned by the library must be released with [`fsens_string_free`].

// tolerance checks are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use filtsens::cli::{analyze, parse_spec, AnalyzeSettings};
use filtsens::closedform::{
    ct_m_integral, ct_p_integral, dt_m_integral, dt_p_integral, CaseTag, IntegralOutcome, Sign, Unit,
};
use filtsens::error::Error;
use filtsens::quad::{
    ct_log_integral_with, ct_weighted_log_integral_with, dt_log_integral_with, QuadConfig, QuadratureResult,
};
use filtsens::rational::TimeDomain;
use filtsens::sysmodel::{build_m, build_p, complementarity_check, validate, FilteringSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsensStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a document that does not fit the schema.
    InvalidDocument = 3,
    /// The system fails one of the standing assumptions.
    InvalidSystem = 4,
    /// A root lies on the stability boundary.
    BoundaryRoot = 5,
    /// The operation needs the other time domain.
    WrongDomain = 6,
    /// `K = K_x` (DT P-integral) or `K = 0` (M-integral).
    DegenerateGain = 7,
    /// The weighted integral is undefined because of a root at the origin.
    OriginRoot = 8,
    /// Root solving, factorization or quadrature failed numerically.
    Numerical = 9,
    InvalidArgument = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsensDomain {
    Continuous = 0,
    Discrete = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsensCase {
    CtPCase1 = 0,
    CtPCase2 = 1,
    CtPCase3Bounded = 2,
    CtPUnbounded = 3,
    CtPTrivial = 4,
    CtMBounded = 5,
    CtMUnbounded = 6,
    DtPCase1 = 7,
    DtPCase2 = 8,
    DtM = 9,
    Direct = 10,
}

impl From<CaseTag> for FsensCase {
    fn from(c: CaseTag) -> Self {
        match c {
            CaseTag::CtPCase1 => FsensCase::CtPCase1,
            CaseTag::CtPCase2 => FsensCase::CtPCase2,
            CaseTag::CtPCase3Bounded => FsensCase::CtPCase3Bounded,
            CaseTag::CtPUnbounded => FsensCase::CtPUnbounded,
            CaseTag::CtPTrivial => FsensCase::CtPTrivial,
            CaseTag::CtMBounded => FsensCase::CtMBounded,
            CaseTag::CtMUnbounded => FsensCase::CtMUnbounded,
            CaseTag::DtPCase1 => FsensCase::DtPCase1,
            CaseTag::DtPCase2 => FsensCase::DtPCase2,
            CaseTag::DtM => FsensCase::DtM,
            CaseTag::Direct => FsensCase::Direct,
        }
    }
}

/// Closed-form value of one integral.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsensIntegral {
    pub case_tag: FsensCase,
    pub bounded: bool,
    /// Finite when `bounded`, otherwise `+inf` or `-inf`.
    pub value: f64,
    /// 0 when bounded, +1 or -1 otherwise.
    pub sign: i32,
    /// True when `value` is in bits (DT), false for nats (CT).
    pub in_bits: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsensQuadrature {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub n_evaluations: u64,
    pub diverged: bool,
    /// 0 unless `diverged`.
    pub sign: i32,
}

/// Opaque validated system.
pub struct FsensSystem {
    inner: FilteringSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> FsensStatus {
    match e {
        Error::Parse { .. } | Error::Schema { .. } => FsensStatus::InvalidDocument,
        Error::BoundaryRoot { .. } => FsensStatus::BoundaryRoot,
        Error::WrongDomain { .. } | Error::DomainMismatch => FsensStatus::WrongDomain,
        Error::DegenerateGain { .. } | Error::ZeroGain => FsensStatus::DegenerateGain,
        Error::OriginRoot { .. } => FsensStatus::OriginRoot,
        Error::ZeroGx
        | Error::NotValidated(_)
        | Error::Improper { .. }
        | Error::NotConjugateClosed { .. }
        | Error::NonFinite { .. }
        | Error::SharedPoleNotCancelled { .. }
        | Error::PreconditionUnmet(_) => FsensStatus::InvalidSystem,
        _ => FsensStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (FsensStatus, String)>) -> FsensStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsensStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            FsensStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FsensStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FsensStatus, String) {
    (FsensStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FsensStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (FsensStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn system<'a>(p: *const FsensSystem) -> Result<&'a FilteringSystem, (FsensStatus, String)> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

fn sign_of(s: Option<Sign>) -> i32 {
    match s {
        Some(Sign::PosInf) => 1,
        Some(Sign::NegInf) => -1,
        None => 0,
    }
}

fn to_c_integral(o: &IntegralOutcome) -> FsensIntegral {
    FsensIntegral {
        case_tag: o.case.into(),
        bounded: o.bounded,
        value: o.as_f64(),
        sign: sign_of(o.sign_if_unbounded),
        in_bits: o.unit == Unit::Bits,
    }
}

fn to_c_quadrature(q: &QuadratureResult) -> FsensQuadrature {
    FsensQuadrature {
        value: q.value,
        abs_error_estimate: q.abs_error_estimate,
        n_evaluations: q.n_evaluations as u64,
        diverged: q.diverged,
        sign: sign_of(q.divergence_sign),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsens_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the next
/// library call on the same thread.
#[no_mangle]
pub extern "C" fn fsens_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a JSON system document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_system_from_json(json: *const c_char, out: *mut *mut FsensSystem) -> FsensStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let doc = parse_spec(read_str(json, "json")?).map_err(lib_err)?;
        let (gx, gy, f) = doc.transfer_functions().map_err(lib_err)?;
        let (sys, report) = validate(gx, gy, f, doc.tolerances()).map_err(lib_err)?;
        if !report.all_ok() {
            return Err((FsensStatus::InvalidSystem, report.diagnostics.join("; ")));
        }
        *out = Box::into_raw(Box::new(FsensSystem { inner: sys }));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from [`fsens_system_from_json`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fsens_system_free(sys: *mut FsensSystem) {
    if !sys.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(sys))));
    }
}

/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_system_domain(sys: *const FsensSystem, out: *mut FsensDomain) -> FsensStatus {
    guard(|| {
        let s = system(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match s.domain() {
            TimeDomain::Continuous => FsensDomain::Continuous,
            TimeDomain::Discrete => FsensDomain::Discrete,
        };
        Ok(())
    })
}

/// Closed-form P-integral (nats in CT, bits in DT).
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_p_integral(sys: *const FsensSystem, out: *mut FsensIntegral) -> FsensStatus {
    guard(|| {
        let s = system(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = match s.domain() {
            TimeDomain::Continuous => ct_p_integral(s),
            TimeDomain::Discrete => dt_p_integral(s),
        };
        *out = to_c_integral(&r.map_err(lib_err)?);
        Ok(())
    })
}

/// Closed-form M-integral (weighted by 1/w^2 in CT).
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_m_integral(sys: *const FsensSystem, out: *mut FsensIntegral) -> FsensStatus {
    guard(|| {
        let s = system(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = match s.domain() {
            TimeDomain::Continuous => ct_m_integral(s),
            TimeDomain::Discrete => dt_m_integral(s),
        };
        *out = to_c_integral(&r.map_err(lib_err)?);
        Ok(())
    })
}

unsafe fn quadrature(
    sys: *const FsensSystem,
    m_integral: bool,
    tol: f64,
    out: *mut FsensQuadrature,
) -> Result<(), (FsensStatus, String)> {
    let s = system(sys)?;
    let out = out.as_mut().ok_or_else(|| null("out"))?;
    if !(tol > 0.0) {
        return Err((FsensStatus::InvalidArgument, format!("tolerance must be positive, got {tol}")));
    }
    let cfg = QuadConfig::with_tol(tol);
    let g = if m_integral { build_m(s) } else { build_p(s) }.map_err(lib_err)?;
    let q = match (s.domain(), m_integral) {
        (TimeDomain::Continuous, false) => ct_log_integral_with(&g, &cfg),
        (TimeDomain::Continuous, true) => ct_weighted_log_integral_with(&g, &cfg),
        (TimeDomain::Discrete, _) => dt_log_integral_with(&g, &cfg),
    };
    *out = to_c_quadrature(&q.map_err(lib_err)?);
    Ok(())
}

/// Numerical P-integral by adaptive quadrature.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_p_quadrature(
    sys: *const FsensSystem,
    tol: f64,
    out: *mut FsensQuadrature,
) -> FsensStatus {
    guard(|| quadrature(sys, false, tol, out))
}

/// Numerical M-integral by adaptive quadrature.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_m_quadrature(
    sys: *const FsensSystem,
    tol: f64,
    out: *mut FsensQuadrature,
) -> FsensStatus {
    guard(|| quadrature(sys, true, tol, out))
}

/// Largest `|P + M - 1|` over `n_samples` seeded boundary frequencies.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsens_complementarity(
    sys: *const FsensSystem,
    n_samples: u32,
    seed: u64,
    out: *mut f64,
) -> FsensStatus {
    guard(|| {
        let s = system(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = complementarity_check(s, n_samples as usize, seed).map_err(lib_err)?;
        Ok(())
    })
}

/// Full analysis report of a JSON document, as JSON. A system that fails
/// validation still produces a report; only unparseable documents fail.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable. The string
/// written to `out` must be released with [`fsens_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fsens_analyze_json(
    json: *const c_char,
    run_quadrature: bool,
    out: *mut *mut c_char,
) -> FsensStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let doc = parse_spec(read_str(json, "json")?).map_err(lib_err)?;
        let settings = AnalyzeSettings { quadrature: Some(run_quadrature), ..AnalyzeSettings::default() };
        let report = analyze(&doc, &settings);
        let text = serde_json::to_string(&report).map_err(|e| (FsensStatus::Numerical, e.to_string()))?;
        *out = CString::new(text).map_err(|e| (FsensStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fsens_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
