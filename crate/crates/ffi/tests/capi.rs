use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use ruinwalk_ffi::*;

fn example_one() -> *mut RwModel {
    let claim = [0.5, 0.5];
    let inter = [0.5, 0.0, 0.5];
    let mut model = ptr::null_mut();
    let st = unsafe { rw_model_from_pmfs(0, claim.as_ptr(), 2, 0, inter.as_ptr(), 3, &mut model) };
    assert_eq!(st, RwStatus::Ok);
    model
}

fn last_error() -> String {
    let p = rw_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_through_handles() {
    let model = example_one();
    unsafe {
        assert_eq!(rw_model_m(model), 2);
        assert!((rw_model_drift(model) + 0.5).abs() < 1e-15);
        let mut sol = ptr::null_mut();
        assert_eq!(rw_solve(model, 3, &mut sol), RwStatus::Ok);
        assert_eq!(rw_solution_phi_len(sol), 4);
        let s2 = 2f64.sqrt();
        let want = [s2 / 4.0, 2.0 - s2, 2.0 * (s2 - 1.0), 8.0 - 5.0 * s2];
        for (u, w) in want.iter().enumerate() {
            let mut v = 0.0;
            assert_eq!(rw_solution_phi(sol, u, &mut v), RwStatus::Ok);
            assert!((v - w).abs() < 1e-12, "phi({u}) = {v}");
        }
        assert_eq!(rw_solution_pi_len(sol), 2);
        let mut pi0 = 0.0;
        assert_eq!(rw_solution_pi(sol, 0, &mut pi0), RwStatus::Ok);
        assert!((pi0 - (2.0 - s2)).abs() < 1e-12);

        assert_eq!(rw_solution_root_count(sol), 1);
        let (mut re, mut im, mut mult) = (0.0, 0.0, 0usize);
        assert_eq!(rw_solution_root(sol, 0, &mut re, &mut im, &mut mult), RwStatus::Ok);
        assert!((re - (1.0 - s2)).abs() < 1e-12 && im == 0.0 && mult == 1);
        assert_eq!(rw_solution_root(sol, 1, &mut re, &mut im, &mut mult), RwStatus::OutOfRange);

        rw_solution_free(sol);
        rw_model_free(model);
    }
}

#[test]
fn json_model_and_finite_survival() {
    let json = CString::new(
        r#"{"claim":{"family":"geometric","p":0.5},"interarrival":{"family":"binomial","n":4,"p":0.5}}"#,
    )
    .unwrap();
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(rw_model_from_json(json.as_ptr(), &mut model), RwStatus::Ok);
        assert_eq!(rw_model_m(model), 4);
        let mut buf = [0.0; 4];
        assert_eq!(rw_finite_survival(model, 3, 1, buf.as_mut_ptr(), buf.len()), RwStatus::Ok);
        // one step: phi(0, 1) = P(X - c*theta <= -1) = 1 - (3/2)^4 / 16
        assert!((buf[0] - (1.0 - 5.0625 / 16.0)).abs() < 1e-15);
        let mut sol = ptr::null_mut();
        assert_eq!(rw_solve(model, 3, &mut sol), RwStatus::Ok);
        let mut phi0 = 0.0;
        rw_solution_phi(sol, 0, &mut phi0);
        assert!((phi0 - 0.535194).abs() < 1e-6);
        assert!(buf.iter().zip(buf.iter().skip(1)).all(|(a, b)| a <= b));
        assert_eq!(rw_finite_survival(model, 3, 1, buf.as_mut_ptr(), 3), RwStatus::OutOfRange);
        rw_solution_free(sol);
        rw_model_free(model);
    }
}

#[test]
fn errors_are_reported() {
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(rw_model_from_json(ptr::null(), &mut model), RwStatus::NullArgument);
        assert!(last_error().contains("json"));
        let bad = CString::new("{not json").unwrap();
        assert_eq!(rw_model_from_json(bad.as_ptr(), &mut model), RwStatus::InvalidModel);
        assert!(model.is_null());

        let claim = [0.5, 0.6];
        let inter = [1.0];
        assert_eq!(
            rw_model_from_pmfs(0, claim.as_ptr(), 2, 0, inter.as_ptr(), 1, &mut model),
            RwStatus::InvalidModel
        );

        // X = 1, c*theta = 1: zero drift
        let one = [1.0];
        assert_eq!(rw_model_from_pmfs(1, one.as_ptr(), 1, 1, one.as_ptr(), 1, &mut model), RwStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(rw_solve(model, 3, &mut sol), RwStatus::NetProfit);
        assert!(last_error().contains("the net profit condition holds"));
        assert!(sol.is_null());
        rw_model_free(model);

        assert_eq!(rw_solve(ptr::null(), 3, &mut sol), RwStatus::NullArgument);
        assert_eq!(rw_model_m(ptr::null()), 0);
        assert!(rw_model_drift(ptr::null()).is_nan());
        rw_model_free(ptr::null_mut());
        rw_solution_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_last_error() {
    let mut model = ptr::null_mut();
    unsafe {
        rw_model_from_json(ptr::null(), &mut model);
    }
    assert!(!rw_last_error().is_null());
    let model = example_one();
    assert!(rw_last_error().is_null());
    unsafe { rw_model_free(model) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(rw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/ruinwalk.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct RwModel RwModel;"));
    assert!(header.contains("RW_STATUS_NET_PROFIT = 3"));
}

/// Compiles and runs a small C program against the static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| {
        std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success())
    }) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // test binaries live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libruinwalk_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new(cc)
        .arg(crate_dir().join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("phi(1) = 0.585786437626905"));
}
