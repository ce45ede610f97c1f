//! Exercises the C surface: direct calls through the extern functions plus
//! a real C program compiled against the generated header and linked to the
//! shared library.

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use arakelov_ffi::*;

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(arakelov_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn mahler_and_height_through_the_abi() {
    unsafe {
        let coeffs = [-1i64, -1, 1]; // x^2 - x - 1
        let mut poly: *mut ArakelovPolynomial = ptr::null_mut();
        assert_eq!(
            arakelov_polynomial_from_coeffs(coeffs.as_ptr(), coeffs.len(), &mut poly),
            ArakelovStatus::Ok
        );
        let mut degree = 0usize;
        assert_eq!(
            arakelov_polynomial_degree(poly, &mut degree),
            ArakelovStatus::Ok
        );
        assert_eq!(degree, 2);

        let mut mahler = 0.0f64;
        assert_eq!(
            arakelov_mahler_measure(poly, 1e-12, &mut mahler),
            ArakelovStatus::Ok
        );
        assert!((mahler - 0.4812118250596035).abs() < 1e-12);

        let mut height = 0.0f64;
        assert_eq!(
            arakelov_height(poly, ptr::null(), 1e-12, &mut height),
            ArakelovStatus::Ok
        );
        assert!((height - mahler / 2.0).abs() < 1e-15);

        let metric = CString::new(r#"{"base":"fubini-study"}"#).unwrap();
        assert_eq!(
            arakelov_height(poly, metric.as_ptr(), 1e-12, &mut height),
            ArakelovStatus::Ok
        );
        assert!(height > mahler / 2.0);

        arakelov_polynomial_free(poly);
    }
}

#[test]
fn orbit_measure_json_roundtrip() {
    unsafe {
        let mut poly: *mut ArakelovPolynomial = ptr::null_mut();
        assert_eq!(
            arakelov_polynomial_cyclotomic(4, &mut poly),
            ArakelovStatus::Ok
        );
        let mut json: *mut std::os::raw::c_char = ptr::null_mut();
        assert_eq!(
            arakelov_orbit_measure_json(poly, 1e-12, &mut json),
            ArakelovStatus::Ok
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        arakelov_string_free(json);
        arakelov_polynomial_free(poly);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let atoms = value["atoms"].as_array().unwrap();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0]["w"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn error_paths_set_messages() {
    unsafe {
        let mut poly: *mut ArakelovPolynomial = ptr::null_mut();
        // zero polynomial
        let zeros = [0i64, 0];
        assert_eq!(
            arakelov_polynomial_from_coeffs(zeros.as_ptr(), zeros.len(), &mut poly),
            ArakelovStatus::InvalidArgument
        );
        assert!(last_error().contains("zero"));

        // null pointers
        assert_eq!(
            arakelov_polynomial_from_coeffs(ptr::null(), 0, &mut poly),
            ArakelovStatus::NullPointer
        );

        // reducible polynomial rejected by the height path
        let coeffs = [2i64, -3, 1];
        assert_eq!(
            arakelov_polynomial_from_coeffs(coeffs.as_ptr(), coeffs.len(), &mut poly),
            ArakelovStatus::Ok
        );
        let mut h = 0.0;
        assert_eq!(
            arakelov_height(poly, ptr::null(), 1e-12, &mut h),
            ArakelovStatus::InvalidArgument
        );
        assert!(last_error().contains("reducible"), "{}", last_error());
        arakelov_polynomial_free(poly);
    }
}

#[test]
fn config_validation_and_run() {
    unsafe {
        let missing_seed =
            CString::new(r#"{"schema_version":1,"kind":"lattice-properties"}"#).unwrap();
        assert_eq!(
            arakelov_validate_config(missing_seed.as_ptr()),
            ArakelovStatus::InvalidArgument
        );
        assert!(last_error().contains("seed"));

        let over_cap =
            CString::new(r#"{"schema_version":1,"kind":"asymptotic-measure","n_list":[2,40]}"#)
                .unwrap();
        assert_eq!(
            arakelov_validate_config(over_cap.as_ptr()),
            ArakelovStatus::CapExceeded
        );

        let dir = tempfile::tempdir().unwrap();
        let config = CString::new(
            r#"{"schema_version":1,"kind":"heights",
                "sequence":{"kind":"rational","values":[2]}}"#,
        )
        .unwrap();
        let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut report: *mut std::os::raw::c_char = ptr::null_mut();
        assert_eq!(
            arakelov_run_experiment(config.as_ptr(), out_dir.as_ptr(), &mut report),
            ArakelovStatus::Ok
        );
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        arakelov_string_free(report);
        assert!(text.contains("0.6931471805599453"));
        assert!(dir.path().join("heights.csv").exists());
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let header = include.join("arakelov.h");
    assert!(header.exists(), "cbindgen header missing");
    let target_dir = manifest
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("target")
        .join(if cfg!(debug_assertions) {
            "debug"
        } else {
            "release"
        });

    let dir = tempfile::tempdir().unwrap();
    let c_file = dir.path().join("smoke.c");
    std::fs::write(
        &c_file,
        r#"
#include "arakelov.h"
#include <math.h>
#include <stdio.h>

int main(void) {
    int64_t coeffs[3] = {-1, -1, 1};
    ArakelovPolynomial *p = NULL;
    if (arakelov_polynomial_from_coeffs(coeffs, 3, &p) != ARAKELOV_STATUS_OK) return 1;
    double m = 0.0;
    if (arakelov_mahler_measure(p, 1e-12, &m) != ARAKELOV_STATUS_OK) return 2;
    if (fabs(m - 0.4812118250596035) > 1e-12) return 3;
    char *json = NULL;
    if (arakelov_orbit_measure_json(p, 1e-12, &json) != ARAKELOV_STATUS_OK) return 4;
    arakelov_string_free(json);
    arakelov_polynomial_free(p);
    printf("mahler %.15f\n", m);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let compile = Command::new("cc")
        .arg(&c_file)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&target_dir)
        .arg("-larakelov_ffi")
        .arg(format!("-Wl,-rpath,{}", target_dir.display()))
        .arg("-lm")
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("cc available");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "C smoke test exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("0.481211825"));
}
