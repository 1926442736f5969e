use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use gwforest_ffi::*;

const AFFINITY: [f64; 9] = [0.0, 5.0, 3.0, 5.0, 0.0, 8.0, 3.0, 8.0, 0.0];

fn transition() -> *mut GwMatrix {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gw_matrix_from_affinity(3, AFFINITY.as_ptr(), &mut p) }, GwStatus::Ok);
    p
}

fn matrix(n: usize, data: &[f64]) -> *mut GwMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gw_matrix_new(n, data.as_ptr(), &mut m) }, GwStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gw_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn transition_and_chain_queries() {
    let p = transition();
    unsafe {
        assert_eq!(gw_matrix_dim(p), 3);
        let mut buf = [0.0; 9];
        assert_eq!(gw_matrix_copy(p, buf.as_mut_ptr(), 9), GwStatus::Ok);
        assert_eq!(buf[1], 5.0 / 8.0);
        assert_eq!(gw_matrix_copy(p, buf.as_mut_ptr(), 4), GwStatus::BufferTooSmall);

        let (mut regular, mut k) = (false, 0usize);
        assert_eq!(gw_chain_is_regular(p, &mut regular, &mut k), GwStatus::Ok);
        assert!(regular);
        assert_eq!(k, 2);
        let mut period = 0usize;
        assert_eq!(gw_chain_period(p, &mut period), GwStatus::Ok);
        assert_eq!(period, 1);

        let mut pi = [0.0; 3];
        assert_eq!(gw_chain_stationary(p, pi.as_mut_ptr(), 3), GwStatus::Ok);
        for (got, want) in pi.iter().zip([8.0, 13.0, 11.0]) {
            assert!((got - want / 32.0).abs() < 1e-12);
        }
        let mut modulus = 0.0;
        assert_eq!(gw_chain_subdominant_modulus(p, &mut modulus), GwStatus::Ok);
        assert!((modulus - (1.0 + (23.0f64 / 143.0).sqrt()) / 2.0).abs() < 1e-9);
        gw_matrix_free(p);
    }
}

#[test]
fn runs_and_reports() {
    let p = transition();
    let y = matrix(3, &[0.0, 0.4258, 0.5742, 0.2514, 0.0, 0.7486, 0.4166, 0.5834, 0.0]);
    let j = matrix(3, &[0.0, 0.9086, 0.0914, 0.8412, 0.0, 0.1588, 0.5715, 0.4285, 0.0]);
    let crit = gw_criterion_default();
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(gw_run_pagerank(p, y, 0.9, &crit, &mut r), GwStatus::Ok);
        assert_eq!(gw_report_mode(r), GwMode::FixedPoint);
        assert_eq!(gw_report_iterations(r), 42);
        gw_report_free(r);

        let cyc = GwCriterion { cycle_detection: true, ..crit };
        let mut r = ptr::null_mut();
        let status = gw_run_alternating_pagerank(p, y, j, 0.6, 0.9, GwVariant::Both, GwConvention::FirstStepOdd, &cyc, &mut r);
        assert_eq!(status, GwStatus::Ok);
        assert_eq!(gw_report_mode(r), GwMode::Period2);
        assert_eq!(gw_report_state_count(r), 2);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(gw_report_state(r, 0, &mut a), GwStatus::Ok);
        assert_eq!(gw_report_state(r, 1, &mut b), GwStatus::Ok);
        assert_eq!(gw_report_state(r, 2, &mut b), GwStatus::InvalidArgument);
        let mut gap = 0.0;
        assert_eq!(gw_diff_norm(a, b, GwNorm::Max, &mut gap), GwStatus::Ok);
        assert!(gap > 1e-3);
        gw_matrix_free(a);
        gw_matrix_free(b);
        gw_report_free(r);

        let mut r = ptr::null_mut();
        assert_eq!(gw_run_alternating_diffusion(p, 1.0 / 3.0, GwConvention::FirstStepOdd, &crit, &mut r), GwStatus::Ok);
        assert_eq!(gw_report_mode(r), GwMode::FixedPoint);
        gw_report_free(r);

        let exhausted = GwCriterion { max_iterations: 3, ..crit };
        let mut r = ptr::null_mut();
        assert_eq!(gw_run_diffusion(p, &exhausted, &mut r), GwStatus::Ok);
        assert_eq!(gw_report_mode(r), GwMode::Exhausted);
        assert_eq!(gw_report_iterations(r), 3);
        gw_report_free(r);
    }
    unsafe {
        gw_matrix_free(p);
        gw_matrix_free(y);
        gw_matrix_free(j);
    }
}

#[test]
fn products_normalization_and_simulation() {
    let p = transition();
    unsafe {
        let mut p2 = ptr::null_mut();
        assert_eq!(gw_matmul(p, p, &mut p2), GwStatus::Ok);
        let mut buf = [0.0; 9];
        gw_matrix_copy(p2, buf.as_mut_ptr(), 9);
        assert!((buf[0] - (25.0 / 104.0 + 9.0 / 88.0)).abs() < 1e-15);

        let raw = matrix(2, &[1.0, 3.0, 2.0, 2.0]);
        let mut norm = ptr::null_mut();
        assert_eq!(gw_matrix_normalize(raw, &mut norm), GwStatus::Ok);
        gw_matrix_copy(norm, buf.as_mut_ptr(), 4);
        assert_eq!(&buf[..4], &[0.25, 0.75, 0.5, 0.5]);

        let mut law = ptr::null_mut();
        assert_eq!(gw_simulate(p, p, -1.0, 2, 50_000, 3, &mut law), GwStatus::Ok);
        let mut freq = [0.0; 9];
        gw_matrix_copy(law, freq.as_mut_ptr(), 9);
        let mut exact = [0.0; 9];
        gw_matrix_copy(p2, exact.as_mut_ptr(), 9);
        for (f, e) in freq.iter().zip(exact) {
            assert!((f - e).abs() < 0.02);
        }
        assert_eq!(gw_simulate(p, p, 0.9, 0, 10, 3, &mut law), GwStatus::Ok);
        assert_eq!(gw_simulate(p, p, 1.5, 1, 10, 3, &mut law), GwStatus::InvalidArgument);
        for m in [p, p2, raw, norm, law] {
            gw_matrix_free(m);
        }
    }
}

#[test]
fn errors_are_reported_with_messages() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(gw_matrix_new(2, ptr::null(), &mut m), GwStatus::NullPointer);
        assert!(last_error().contains("data"));
        assert_eq!(gw_matrix_from_affinity(2, [1.0, -1.0, 1.0, 1.0].as_ptr(), &mut m), GwStatus::InvalidArgument);
        assert!(last_error().contains("negative"));

        let bad = matrix(2, &[0.5, 0.6, 0.5, 0.5]);
        let mut r = ptr::null_mut();
        let crit = gw_criterion_default();
        assert_eq!(gw_run_diffusion(bad, &crit, &mut r), GwStatus::NotStochastic);
        assert!(r.is_null());
        assert_eq!(gw_run_diffusion(bad, ptr::null(), &mut r), GwStatus::NotStochastic);

        let id = matrix(2, &[1.0, 0.0, 0.0, 1.0]);
        let mut pi = [0.0; 2];
        assert_eq!(gw_chain_stationary(id, pi.as_mut_ptr(), 2), GwStatus::NotRegular);
        let mut period = 0usize;
        assert_eq!(gw_chain_period(id, &mut period), GwStatus::NotRegular);

        let three = transition();
        let mut prod = ptr::null_mut();
        assert_eq!(gw_matmul(id, three, &mut prod), GwStatus::DimensionMismatch);
        let bad_crit = GwCriterion { epsilon: -1.0, ..crit };
        assert_eq!(gw_run_diffusion(three, &bad_crit, &mut r), GwStatus::InvalidArgument);

        assert_eq!(gw_matrix_dim(ptr::null()), 0);
        gw_matrix_free(ptr::null_mut());
        gw_report_free(ptr::null_mut());
        for h in [bad, id, three] {
            gw_matrix_free(h);
        }
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>` holding the static library built alongside this test.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("libgwforest_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "diffusion: 54 iterations");
}
