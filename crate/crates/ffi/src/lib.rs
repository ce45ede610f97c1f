//! C ABI for the arakelov crate: opaque polynomial handles, status codes,
//! and JSON strings for structured data. Every function is safe to call
//! from C; failures set a thread-local message retrievable through
//! `arakelov_last_error_message`.
//!
//! Strings returned through `char **` out-parameters are owned by the
//! caller and must be released with `arakelov_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use arakelov::experiments::{run_to_dir, ExperimentConfig};
use arakelov::heights::{AdelicMetric, AlgebraicPoint, MetricJson};
use arakelov::polyalg::{cyclotomic, mahler_measure, IntegerPolynomial};
use arakelov::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArakelovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    CapExceeded = 4,
    NumericFailure = 5,
    IoError = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn status_of(err: &Error) -> ArakelovStatus {
    match err {
        Error::CapExceeded { .. } | Error::ConfigCap(_) => ArakelovStatus::CapExceeded,
        Error::InvalidInput(_) | Error::Schema(_) | Error::Json(_) => {
            ArakelovStatus::InvalidArgument
        }
        Error::Io(_) => ArakelovStatus::IoError,
        _ => ArakelovStatus::NumericFailure,
    }
}

fn fail(err: &Error) -> ArakelovStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn arakelov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn arakelov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque handle to an integer polynomial (constant term first).
pub struct ArakelovPolynomial(IntegerPolynomial);

/// Builds a polynomial from 64-bit coefficients, constant term first.
///
/// # Safety
/// `coeffs` must point to `len` readable i64 values and `out` must be a
/// valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn arakelov_polynomial_from_coeffs(
    coeffs: *const i64,
    len: usize,
    out: *mut *mut ArakelovPolynomial,
) -> ArakelovStatus {
    if coeffs.is_null() || out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts(coeffs, len);
    let poly = IntegerPolynomial::from_i64(slice);
    if poly.is_zero() {
        set_error("zero polynomial");
        return ArakelovStatus::InvalidArgument;
    }
    *out = Box::into_raw(Box::new(ArakelovPolynomial(poly)));
    ArakelovStatus::Ok
}

/// Builds the n-th cyclotomic polynomial.
///
/// # Safety
/// `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn arakelov_polynomial_cyclotomic(
    n: u32,
    out: *mut *mut ArakelovPolynomial,
) -> ArakelovStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    if n == 0 {
        set_error("cyclotomic conductor must be positive");
        return ArakelovStatus::InvalidArgument;
    }
    *out = Box::into_raw(Box::new(ArakelovPolynomial(cyclotomic(n))));
    ArakelovStatus::Ok
}

/// Releases a polynomial handle (null is ignored).
///
/// # Safety
/// `p` must be a pointer previously returned by a constructor of this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn arakelov_polynomial_free(p: *mut ArakelovPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Degree of the polynomial.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn arakelov_polynomial_degree(
    p: *const ArakelovPolynomial,
    out: *mut usize,
) -> ArakelovStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    *out = (*p).0.degree().unwrap_or(0);
    ArakelovStatus::Ok
}

/// log M(p): the Mahler measure from certified roots at tolerance `tol`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn arakelov_mahler_measure(
    p: *const ArakelovPolynomial,
    tol: f64,
    out: *mut f64,
) -> ArakelovStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    match mahler_measure(&(*p).0, tol) {
        Ok(v) => {
            *out = v;
            ArakelovStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Normalized height of the algebraic point defined by `p` under a metric
/// given as JSON (`{"base":"canonical"|"fubini-study","twist":{...}}`);
/// a null `metric_json` means the canonical metric.
///
/// # Safety
/// `p` must be a live handle, `metric_json` null or NUL-terminated, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn arakelov_height(
    p: *const ArakelovPolynomial,
    metric_json: *const c_char,
    tol: f64,
    out: *mut f64,
) -> ArakelovStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    let metric = if metric_json.is_null() {
        AdelicMetric::canonical()
    } else {
        let text = match CStr::from_ptr(metric_json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("metric JSON is not valid UTF-8");
                return ArakelovStatus::InvalidUtf8;
            }
        };
        let json: MetricJson = match serde_json::from_str(text) {
            Ok(j) => j,
            Err(e) => {
                set_error(&format!("metric JSON: {e}"));
                return ArakelovStatus::InvalidArgument;
            }
        };
        match AdelicMetric::from_json(&json) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        }
    };
    let point = match AlgebraicPoint::from_polynomial((*p).0.clone(), tol) {
        Ok(pt) => pt,
        Err(e) => return fail(&e),
    };
    match point.height(&metric) {
        Ok(h) => {
            *out = h;
            ArakelovStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Galois-orbit measure of the point defined by `p`, serialized as
/// `{"atoms":[{"re":...,"im":...,"w":...}]}`.
///
/// # Safety
/// `p` must be a live handle; `out` receives a string owned by the caller
/// (release with `arakelov_string_free`).
#[no_mangle]
pub unsafe extern "C" fn arakelov_orbit_measure_json(
    p: *const ArakelovPolynomial,
    tol: f64,
    out: *mut *mut c_char,
) -> ArakelovStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    let point = match AlgebraicPoint::from_polynomial((*p).0.clone(), tol) {
        Ok(pt) => pt,
        Err(e) => return fail(&e),
    };
    let measure = match point.orbit_measure() {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    let json = serde_json::to_string(&measure.to_json()).expect("measure serializes");
    *out = CString::new(json).unwrap().into_raw();
    ArakelovStatus::Ok
}

/// Validates an experiment config; InvalidArgument or CapExceeded carry the
/// first finding in the error message.
///
/// # Safety
/// `config_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn arakelov_validate_config(config_json: *const c_char) -> ArakelovStatus {
    if config_json.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config JSON is not valid UTF-8");
            return ArakelovStatus::InvalidUtf8;
        }
    };
    let config = match ExperimentConfig::from_json(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(&format!("config JSON: {e}"));
            return ArakelovStatus::InvalidArgument;
        }
    };
    let issues = config.validate();
    if let Some(first) = issues.iter().find(|i| !i.is_cap) {
        set_error(&format!("{}: {}", first.field, first.message));
        return ArakelovStatus::InvalidArgument;
    }
    if let Some(cap) = issues.first() {
        set_error(&format!("{}: {}", cap.field, cap.message));
        return ArakelovStatus::CapExceeded;
    }
    ArakelovStatus::Ok
}

/// Runs an experiment into `out_dir` (JSON report plus CSV tables). When
/// `report_out` is non-null it receives the report document as a JSON
/// string owned by the caller.
///
/// # Safety
/// `config_json` and `out_dir` must be NUL-terminated; `report_out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn arakelov_run_experiment(
    config_json: *const c_char,
    out_dir: *const c_char,
    report_out: *mut *mut c_char,
) -> ArakelovStatus {
    if config_json.is_null() || out_dir.is_null() {
        set_error("null pointer argument");
        return ArakelovStatus::NullPointer;
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config JSON is not valid UTF-8");
            return ArakelovStatus::InvalidUtf8;
        }
    };
    let dir = match CStr::from_ptr(out_dir).to_str() {
        Ok(d) => d,
        Err(_) => {
            set_error("output directory is not valid UTF-8");
            return ArakelovStatus::InvalidUtf8;
        }
    };
    let config = match ExperimentConfig::from_json(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(&format!("config JSON: {e}"));
            return ArakelovStatus::InvalidArgument;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| run_to_dir(&config, Path::new(dir))));
    match outcome {
        Ok(Ok(summary)) => {
            if !report_out.is_null() {
                let json = summary.report.to_string();
                *report_out = CString::new(json).unwrap().into_raw();
            }
            ArakelovStatus::Ok
        }
        Ok(Err(e)) => fail(&e),
        Err(_) => {
            set_error("panic inside the experiment runner");
            ArakelovStatus::Panic
        }
    }
}

/// Releases a string returned by this library (null is ignored).
///
/// # Safety
/// `s` must originate from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn arakelov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
