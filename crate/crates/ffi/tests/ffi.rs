use std::ffi::{c_void, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sensopt_ffi::*;

unsafe extern "C" fn rosenbrock(x: *const f64, dim: usize, _: *mut c_void) -> f64 {
    let u = std::slice::from_raw_parts(x, dim);
    sensopt::testbed::rosenbrock3_scaled(u).unwrap()
}

unsafe extern "C" fn shifted_square(x: *const f64, _dim: usize, ud: *mut c_void) -> f64 {
    let calls = &mut *(ud as *mut usize);
    *calls += 1;
    (*x - 0.25).powi(2)
}

unsafe extern "C" fn not_a_number(_: *const f64, _: usize, _: *mut c_void) -> f64 {
    f64::NAN
}

unsafe extern "C" fn additive(x: *const f64, _: usize, _: *mut c_void) -> f64 {
    3f64.sqrt() * (*x + *x.add(1))
}

#[test]
fn psi_values_and_errors() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(sopt_psi(1, 0.5, &mut v), SoptStatus::Ok);
        assert!((v - 3f64.sqrt() * 0.5).abs() < 1e-15);
        assert_eq!(sopt_psi(2, 2.0, &mut v), SoptStatus::Domain);
        assert!(!last_error_string().is_empty());
        assert_eq!(sopt_psi(2, 0.0, ptr::null_mut()), SoptStatus::NullPointer);
    }
}

#[test]
fn preset_run_through_the_c_interface() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(sopt_constraints_preset(b'D' as _, &mut c), SoptStatus::Ok);
        assert_eq!(sopt_constraints_len(c), 2);
        let mut r = ptr::null_mut();
        let s = sopt_run(3, 4, 20, 1, c, Some(rosenbrock), ptr::null_mut(), &mut r);
        assert_eq!(s, SoptStatus::Ok);
        let n = sopt_result_n_eval(r);
        assert!((2..=21).contains(&n));
        assert_eq!(sopt_result_solves_used(r), 20);
        assert_eq!(sopt_result_termination(r), SoptTermination::Budget);
        let mut best = f64::INFINITY;
        let mut x = [0.0; 3];
        let mut y = 0.0;
        for i in 0..n {
            assert_eq!(sopt_result_point(r, i, x.as_mut_ptr(), 3, &mut y), SoptStatus::Ok);
            assert_eq!(y, sensopt::testbed::rosenbrock3_scaled(&x).unwrap());
            best = best.min(y);
        }
        assert_eq!(best, sopt_result_m_best(r));
        assert_eq!(sopt_result_point(r, n, x.as_mut_ptr(), 3, &mut y), SoptStatus::IndexOutOfRange);
        assert_eq!(sopt_result_point(r, 0, x.as_mut_ptr(), 2, &mut y), SoptStatus::InvalidArgument);
        sopt_result_free(r);
        sopt_constraints_free(c);

        let mut c = ptr::null_mut();
        assert_eq!(sopt_constraints_preset(b'E' as _, &mut c), SoptStatus::InvalidArgument);
        assert!(last_error_string().contains("preset"));
    }
}

#[test]
fn custom_constraints_and_user_data() {
    unsafe {
        let c = sopt_constraints_new(1);
        assert!(!c.is_null());
        let members = [1usize];
        let lengths = [1usize];
        assert_eq!(sopt_constraints_add(c, members.as_ptr(), lengths.as_ptr(), 1, 0.9), SoptStatus::Ok);
        let bad = [2usize];
        assert_eq!(sopt_constraints_add(c, bad.as_ptr(), lengths.as_ptr(), 1, 0.5), SoptStatus::InvalidArgument);
        assert_eq!(sopt_constraints_add(c, members.as_ptr(), lengths.as_ptr(), 1, -1.0), SoptStatus::InvalidArgument);
        assert_eq!(sopt_constraints_len(c), 1);

        let mut calls = 0usize;
        let mut r = ptr::null_mut();
        let s = sopt_run(1, 2, 10, 7, c, Some(shifted_square), &mut calls as *mut usize as *mut c_void, &mut r);
        assert_eq!(s, SoptStatus::Ok);
        assert_eq!(calls, sopt_result_n_eval(r));
        sopt_result_free(r);

        let mut r = ptr::null_mut();
        let s = sopt_run(2, 2, 10, 7, c, Some(shifted_square), ptr::null_mut(), &mut r);
        assert_eq!(s, SoptStatus::InvalidArgument);
        assert!(r.is_null());
        sopt_constraints_free(c);
        assert!(sopt_constraints_new(0).is_null());
    }
}

#[test]
fn run_errors() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(sopt_run(2, 2, 5, 1, ptr::null(), Some(not_a_number), ptr::null_mut(), &mut r), SoptStatus::NonFinite);
        assert_eq!(sopt_run(2, 2, 5, 1, ptr::null(), None, ptr::null_mut(), &mut r), SoptStatus::NullPointer);
        assert_eq!(sopt_run(2, 0, 5, 1, ptr::null(), Some(additive), ptr::null_mut(), &mut r), SoptStatus::InvalidArgument);
        assert_eq!(sopt_run(2, 2, 0, 1, ptr::null(), Some(additive), ptr::null_mut(), &mut r), SoptStatus::InvalidArgument);
        assert_eq!(sopt_result_n_eval(ptr::null()), 0);
        assert!(sopt_result_m_best(ptr::null()).is_nan());
        sopt_result_free(ptr::null_mut());
        sopt_constraints_free(ptr::null_mut());
    }
}

#[test]
fn sensitivity_through_the_c_interface() {
    let mut s = [0.0; 2];
    let mut t = [0.0; 2];
    unsafe {
        let st = sopt_sensitivity(Some(additive), ptr::null_mut(), 2, 1 << 13, 3, s.as_mut_ptr(), t.as_mut_ptr());
        assert_eq!(st, SoptStatus::Ok);
        let st = sopt_sensitivity(Some(additive), ptr::null_mut(), 2, 1, 3, s.as_mut_ptr(), t.as_mut_ptr());
        assert_eq!(st, SoptStatus::InvalidArgument);
    }
    for i in 0..2 {
        assert!((s[i] - 0.5).abs() < 0.05);
        assert!((t[i] - 0.5).abs() < 0.05);
    }
}

#[test]
fn qcqp_through_the_c_interface() {
    let c = [1.0, 1.0];
    let positions = [0usize, 1];
    let lengths = [2usize];
    let radii = [2.0];
    let mut out = SoptQcqpOutcome {
        status: SoptSolveStatus::MaxIter,
        value: 0.0,
        gap: 0.0,
        kkt_residual: 0.0,
        newton_steps: 0,
    };
    let mut z = [0.0; 2];
    unsafe {
        let st = sopt_qcqp_solve(2, c.as_ptr(), 0, ptr::null(), ptr::null(), 1, positions.as_ptr(), lengths.as_ptr(), radii.as_ptr(), 1e-7, &mut out, z.as_mut_ptr());
        assert_eq!(st, SoptStatus::Ok);
        assert_eq!(out.status, SoptSolveStatus::Optimal);
        assert!((out.value + 2.0).abs() < 1e-6);
        assert!((z[0] + 1.0).abs() < 1e-6 && (z[1] + 1.0).abs() < 1e-6);

        // z1 = 3 outside the unit ball
        let a = [1.0];
        let b = [3.0];
        let st = sopt_qcqp_solve(1, c.as_ptr(), 1, a.as_ptr(), b.as_ptr(), 1, positions.as_ptr(), [1usize].as_ptr(), [1.0].as_ptr(), 1e-7, &mut out, ptr::null_mut());
        assert_eq!(st, SoptStatus::Ok);
        assert_eq!(out.status, SoptSolveStatus::Infeasible);

        let st = sopt_qcqp_solve(1, c.as_ptr(), 0, ptr::null(), ptr::null(), 1, [4usize].as_ptr(), [1usize].as_ptr(), [1.0].as_ptr(), 1e-7, &mut out, ptr::null_mut());
        assert_eq!(st, SoptStatus::InvalidArgument);
        let st = sopt_qcqp_solve(2, ptr::null(), 0, ptr::null(), ptr::null(), 0, ptr::null(), ptr::null(), ptr::null(), 1e-7, &mut out, ptr::null_mut());
        assert_eq!(st, SoptStatus::NullPointer);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(sopt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/sensopt.h")).unwrap()
}

#[test]
fn header_declares_the_interface() {
    let h = header();
    for name in [
        "sopt_last_error",
        "sopt_version",
        "sopt_psi",
        "sopt_constraints_new",
        "sopt_constraints_preset",
        "sopt_constraints_add",
        "sopt_constraints_len",
        "sopt_constraints_free",
        "sopt_run",
        "sopt_result_n_eval",
        "sopt_result_m_best",
        "sopt_result_solves_used",
        "sopt_result_termination",
        "sopt_result_point",
        "sopt_result_free",
        "sopt_sensitivity",
        "sopt_qcqp_solve",
        "typedef struct SoptConstraints SoptConstraints;",
        "typedef struct SoptRunResult SoptRunResult;",
        "SOPT_STATUS_OK = 0",
        "SOPT_STATUS_PANIC = 7",
        "typedef double (*SoptObjective)(const double *x, size_t dim, void *user_data);",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
    assert!(h.starts_with("#ifndef SENSOPT_H"));
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include "sensopt.h"

static double bowl(const double *x, size_t dim, void *ud) {
    double s = 0.0;
    for (size_t i = 0; i < dim; i++) s += (x[i] - 0.1) * (x[i] - 0.1);
    (*(int *)ud)++;
    return s;
}

int main(void) {
    double v = 0.0;
    if (sopt_psi(2, 1.0, &v) != SOPT_STATUS_OK) return 1;
    if (v < 2.236 || v > 2.237) return 2;
    SoptConstraints *c = sopt_constraints_new(2);
    size_t members[] = {1, 2};
    size_t lengths[] = {2};
    if (sopt_constraints_add(c, members, lengths, 1, 0.0) != SOPT_STATUS_OK) return 3;
    int calls = 0;
    SoptRunResult *r = NULL;
    if (sopt_run(2, 2, 15, 5, c, bowl, &calls, &r) != SOPT_STATUS_OK) return 4;
    if ((size_t)calls != sopt_result_n_eval(r)) return 5;
    printf("%zu %.17g\n", sopt_result_n_eval(r), sopt_result_m_best(r));
    sopt_result_free(r);
    sopt_constraints_free(c);
    if (sopt_psi(1, 3.0, &v) != SOPT_STATUS_DOMAIN) return 6;
    if (sopt_last_error()[0] == '\0') return 7;
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_library() {
    let cc = match ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()) {
        Some(cc) => cc,
        None => {
            eprintln!("no C compiler found; skipping");
            return;
        }
    };
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libsensopt_ffi.so").exists() && !lib_dir.join("libsensopt_ffi.dylib").exists() {
        eprintln!("shared library not built in {}; skipping", lib_dir.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = dir.join("smoke.c");
    std::fs::write(&src, C_SMOKE).unwrap();
    let bin = dir.join("smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lsensopt_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).env("LD_LIBRARY_PATH", &lib_dir).env("DYLD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields.len(), 2);
    let best: f64 = fields[1].parse().unwrap();
    assert!(best >= 0.0);
    eprintln!("C smoke run: {}", text.trim());
}
