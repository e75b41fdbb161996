use std::ffi::{CStr, CString};
use std::ptr;

use germlab_ffi::*;

const GOLDEN_QUADRATIC: &str =
    r#"{"n": 1, "rotations": [{"preset": "golden"}], "f": [{"j": 0, "alpha": [2], "re": 1, "im": 0}]}"#;

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { germlab_string_free(p) };
    s
}

fn germ(json: &str) -> *mut GermlabGerm {
    let text = CString::new(json).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { germlab_germ_from_json(text.as_ptr(), 128, &mut g) }, GermlabStatus::Ok);
    g
}

#[test]
fn linearize_and_evaluate() {
    let g = germ(GOLDEN_QUADRATIC);
    assert_eq!(unsafe { germlab_germ_dim(g) }, 1);
    let mut h = ptr::null_mut();
    let mut min_div = 0.0;
    let st = unsafe { germlab_linearize(g, 8, false, &mut h, &mut min_div) };
    assert_eq!(st, GermlabStatus::Ok);
    assert_eq!(unsafe { germlab_series_order(h) }, 8);
    assert!(min_div > 0.0);

    // h_2 = 1/(lambda^2 - lambda) for f = z^2
    let w = (5f64.sqrt() - 1.0) / 2.0;
    let lam = |k: f64| (2.0 * std::f64::consts::PI * w * k).sin_cos();
    let (s2, c2) = lam(2.0);
    let (s1, c1) = lam(1.0);
    let (dr, di) = (c2 - c1, s2 - s1);
    let den = dr * dr + di * di;
    let (h2r, h2i) = (dr / den, -di / den);

    let z = [1e-4, 0.0];
    let mut out = [0.0; 2];
    assert_eq!(unsafe { germlab_series_evaluate(h, z.as_ptr(), out.as_mut_ptr()) }, GermlabStatus::Ok);
    assert!((out[0] - (1e-4 + h2r * 1e-8)).abs() < 1e-11);
    assert!((out[1] - h2i * 1e-8).abs() < 1e-11);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { germlab_series_to_json(h, &mut json) }, GermlabStatus::Ok);
    let text = take_string(json);
    assert!(text.contains("\"N\": 8"));
    let c = CString::new(text).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { germlab_series_from_json(c.as_ptr(), 128, &mut back) }, GermlabStatus::Ok);
    let mut composed = ptr::null_mut();
    assert_eq!(unsafe { germlab_series_compose(h, back, 8, &mut composed) }, GermlabStatus::Ok);
    unsafe {
        germlab_series_free(composed);
        germlab_series_free(back);
        germlab_series_free(h);
        germlab_germ_free(g);
    }
}

#[test]
fn remainder_vanishes_below_order() {
    let g = germ(GOLDEN_QUADRATIC);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { germlab_linearize(g, 12, true, &mut h, ptr::null_mut()) }, GermlabStatus::Ok);
    let (mut grid, mut coeff) = (0.0, 0.0);
    let st = unsafe { germlab_remainder_sup(g, h, 6, 0.1, 128, &mut grid, &mut coeff) };
    assert_eq!(st, GermlabStatus::Ok);
    assert!(grid > 0.0 && grid <= coeff);
    unsafe {
        germlab_series_free(h);
        germlab_germ_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let bad = CString::new("{not json").unwrap();
    let mut g = ptr::null_mut();
    let st = unsafe { germlab_germ_from_json(bad.as_ptr(), 0, &mut g) };
    assert_eq!(st, GermlabStatus::Parse);
    assert!(g.is_null());
    let msg = take_string(germlab_last_error());
    assert!(!msg.is_empty());
    let name = unsafe { CStr::from_ptr(germlab_status_name(st)) };
    assert_eq!(name.to_str().unwrap(), "parse");

    let st = unsafe { germlab_germ_from_json(ptr::null(), 0, &mut g) };
    assert_eq!(st, GermlabStatus::NullPointer);

    let mut n = 0u32;
    let st = unsafe { germlab_optimal_truncation(1.0, 0.1, 1.0, 1.0, &mut n, ptr::null_mut()) };
    assert_eq!(st, GermlabStatus::Domain);

    // a successful call clears the message
    let st = unsafe { germlab_optimal_truncation(0.4, 0.1, 1.0, 1.0, &mut n, ptr::null_mut()) };
    assert_eq!(st, GermlabStatus::Ok);
    assert_eq!(n, 4);
    assert!(germlab_last_error().is_null());
}

#[test]
fn resonant_multiplier_is_reported() {
    let g = germ(r#"{"n": 1, "rotations": [{"num": 1, "den": 3}], "f": [{"j": 0, "alpha": [2], "re": 1, "im": 0}]}"#);
    let mut h = ptr::null_mut();
    let st = unsafe { germlab_linearize(g, 6, false, &mut h, ptr::null_mut()) };
    assert_eq!(st, GermlabStatus::Resonant);
    let mut omega = 0.0;
    assert_eq!(unsafe { germlab_omega(g, 5, &mut omega) }, GermlabStatus::Resonant);
    unsafe { germlab_germ_free(g) };
}

#[test]
fn continued_fraction_functionals() {
    let mut cf = ptr::null_mut();
    assert_eq!(unsafe { germlab_cf_golden(20, 128, &mut cf) }, GermlabStatus::Ok);
    assert_eq!(unsafe { germlab_cf_depth(cf) }, 20);
    let mut beta = 0.0;
    assert_eq!(unsafe { germlab_cf_beta(cf, -1, &mut beta) }, GermlabStatus::Ok);
    assert_eq!(beta, 1.0);
    assert_eq!(unsafe { germlab_cf_beta(cf, 3, &mut beta) }, GermlabStatus::Ok);
    // 1/2 < beta_k q_{k+1} < 1 with q_4 = 5
    assert!(beta * 5.0 > 0.5 && beta * 5.0 < 1.0);
    let mut sum = 0.0;
    assert_eq!(unsafe { germlab_cf_bruno_partial_sum(cf, 4, &mut sum) }, GermlabStatus::Ok);
    let expected = 2f64.ln() / 1.0 + 3f64.ln() / 2.0 + 5f64.ln() / 3.0 + 8f64.ln() / 5.0;
    assert!((sum - expected).abs() < 1e-14);

    let kind = CString::new("bprime_s").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { germlab_cf_condition_json(cf, kind.as_ptr(), 1.0, &mut json) }, GermlabStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["kind"], "bprime_s");
    unsafe { germlab_cf_free(cf) };

    let q = [0u64, 2, 2, 2, 2];
    let mut cf = ptr::null_mut();
    assert_eq!(unsafe { germlab_cf_from_quotients(q.as_ptr(), q.len(), 53, &mut cf) }, GermlabStatus::Ok);
    unsafe { germlab_cf_free(cf) };

    let mut reached = 0usize;
    let st = unsafe { germlab_cf_factorial_growth(1.0, 8, 2, 128, &mut cf, &mut reached) };
    assert_eq!(st, GermlabStatus::Ok);
    assert_eq!(reached, 6);
    unsafe { germlab_cf_free(cf) };
}

#[test]
fn horizons_and_escape() {
    let mut k = 0u64;
    assert_eq!(unsafe { germlab_lemma_horizon(0.1, 1.0, 1.0, 1.0, &mut k) }, GermlabStatus::Ok);
    assert_eq!(k, 14);
    let mut ln_k = 0.0;
    let st = unsafe { germlab_stability_ln_horizon(1.0, 1.0, 0.4, 1.0, 0.04, &mut ln_k) };
    assert_eq!(st, GermlabStatus::Ok);
    assert!((ln_k - 10.0).abs() < 1e-12);

    let g = germ(r#"{"n": 1, "lambdas": [{"re": 2, "im": 0}], "f": []}"#);
    let z = [0.1, 0.0];
    let mut t = 0i64;
    assert_eq!(unsafe { germlab_escape_time(g, z.as_ptr(), 100, 0.5, 128, &mut t) }, GermlabStatus::Ok);
    assert_eq!(t, 3);
    unsafe { germlab_germ_free(g) };

    let g = germ(GOLDEN_QUADRATIC);
    let z = [0.01, 0.0];
    assert_eq!(unsafe { germlab_escape_time(g, z.as_ptr(), 1000, 0.5, 128, &mut t) }, GermlabStatus::Ok);
    assert_eq!(t, -1);
    unsafe { germlab_germ_free(g) };
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        germlab_series_free(ptr::null_mut());
        germlab_germ_free(ptr::null_mut());
        germlab_cf_free(ptr::null_mut());
        germlab_string_free(ptr::null_mut());
        assert_eq!(germlab_series_dim(ptr::null()), 0);
        assert_eq!(germlab_cf_depth(ptr::null()), 0);
    }
    let v = unsafe { CStr::from_ptr(germlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
