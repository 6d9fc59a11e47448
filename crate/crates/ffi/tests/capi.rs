use std::ffi::{c_char, CStr};
use std::ptr;

use relaxkin_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { rk_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn model(variant: u32, ks: f64, kt: f64, kst: f64) -> *mut RkPairModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rk_pair_model_new(variant, ks, kt, kst, &mut m) }, RkStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn rate_elements_round_trip() {
    let m = model(RK_VARIANT_GENERALIZED, 2.0, 1.0, 3.0);
    let mut k = RkRateElements::default();
    assert_eq!(unsafe { rk_pair_rate_elements(m, &mut k) }, RkStatus::Ok);
    assert!((k.k_ss - 2.0).abs() < 1e-12);
    assert!((k.k_tt - 1.0).abs() < 1e-12);
    assert!((k.k_st - 3.0).abs() < 1e-12);
    unsafe { rk_pair_model_free(m) };
}

#[test]
fn yields_sum_to_one_with_reaction_in_both_channels() {
    let m = model(RK_VARIANT_HABERKORN, 2.0, 1.0, 0.0);
    assert_eq!(unsafe { rk_pair_model_set_hamiltonian(m, 0.0, 0.7, 0.1) }, RkStatus::Ok);
    let mut y = RkYields::default();
    assert_eq!(unsafe { rk_pair_yields(m, RK_INITIAL_SINGLET, &mut y) }, RkStatus::Ok);
    assert!((y.phi_s + y.phi_t - 1.0).abs() < 1e-9);
    assert!(y.phi_s > y.phi_t);
    unsafe { rk_pair_model_free(m) };
}

#[test]
fn jones_hore_coherence_decays_twice_as_fast() {
    let h = model(RK_VARIANT_HABERKORN, 2.0, 1.0, 0.0);
    let j = model(RK_VARIANT_JONES_HORE, 2.0, 1.0, 0.0);
    let (mut rh, mut rj, mut res) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(rk_pair_coherence_rate(h, &mut rh, &mut res), RkStatus::Ok);
        assert_eq!(rk_pair_coherence_rate(j, &mut rj, &mut res), RkStatus::Ok);
        rk_pair_model_free(h);
        rk_pair_model_free(j);
    }
    assert!((rh - 1.5).abs() < 1e-3, "{rh}");
    assert!((rj / rh - 2.0).abs() < 2e-3);
}

#[test]
fn propagation_fills_population_rows() {
    let m = model(RK_VARIANT_HABERKORN, 1.0, 0.0, 0.0);
    let times = [0.0, 0.5, 1.0];
    let mut pops = [f64::NAN; 12];
    let st = unsafe { rk_pair_propagate(m, RK_INITIAL_SINGLET, times.as_ptr(), 3, pops.as_mut_ptr(), 12) };
    assert_eq!(st, RkStatus::Ok);
    for (row, t) in pops.chunks(4).zip(times) {
        assert!((row[0] - (-t).exp()).abs() < 1e-10, "{row:?}");
        assert!(row[1..].iter().all(|p| p.abs() < 1e-12));
    }

    let st = unsafe { rk_pair_propagate(m, RK_INITIAL_SINGLET, times.as_ptr(), 3, pops.as_mut_ptr(), 11) };
    assert_eq!(st, RkStatus::BufferTooSmall);
    assert!(last_error().contains("12"));
    unsafe { rk_pair_model_free(m) };
}

#[test]
fn errors_are_reported_by_status_and_message() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rk_pair_model_new(9, 1.0, 1.0, 0.0, &mut m) }, RkStatus::InvalidArgument);
    assert!(last_error().contains("variant"));
    assert!(m.is_null());

    assert_eq!(unsafe { rk_pair_model_new(RK_VARIANT_HABERKORN, -1.0, 1.0, 0.0, &mut m) }, RkStatus::InvalidArgument);
    assert_eq!(unsafe { rk_pair_model_new(RK_VARIANT_HABERKORN, 1.0, 1.0, 0.0, ptr::null_mut()) }, RkStatus::NullPointer);

    let mut k = RkRateElements::default();
    assert_eq!(unsafe { rk_pair_rate_elements(ptr::null(), &mut k) }, RkStatus::NullPointer);
    assert!(last_error().contains("model"));

    let m = model(RK_VARIANT_HABERKORN, 1.0, 1.0, 0.0);
    let mut y = RkYields::default();
    assert_eq!(unsafe { rk_pair_yields(m, 7, &mut y) }, RkStatus::InvalidArgument);
    unsafe {
        rk_pair_model_free(m);
        rk_pair_model_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_message_is_terminated() {
    let mut k = RkRateElements::default();
    unsafe { rk_pair_rate_elements(ptr::null(), &mut k) };
    let mut buf = [1 as c_char; 4];
    let n = unsafe { rk_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 3);
    assert_eq!(buf[3], 0);
}

#[test]
fn three_state_rates_at_zero_temperature() {
    let mut r = RkThreeStateRates::default();
    let st = unsafe { rk_three_state_rates(0.0, 1.0, f64::INFINITY, 1.0, 1.0, &mut r) };
    assert_eq!(st, RkStatus::Ok);
    assert!(r.w11 > 0.0);
    assert_eq!(r.w22, 0.0);
    assert_eq!(unsafe { rk_three_state_rates(0.0, 1.0, 1.0, 1.0, -1.0, &mut r) }, RkStatus::InvalidArgument);
}

#[test]
fn diffusion_anchors() {
    let mut l = 0.0;
    assert_eq!(unsafe { rk_dephasing_radius(5e-8, 1e-5, 1e8, 1e12, &mut l) }, RkStatus::Ok);
    assert!(((l - 5e-8) / 4.14e-8 - 1.0).abs() < 5e-3, "{l}");
    let mut xi = 0.0;
    assert_eq!(unsafe { rk_yield_sensitivity(1e9, 3e-8, 1e-5, &mut xi) }, RkStatus::Ok);
    assert_eq!(format!("{xi:.2}"), "0.09");
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/relaxkin.h")).unwrap();
    for name in [
        "rk_last_error_message",
        "rk_pair_model_new",
        "rk_pair_model_free",
        "rk_pair_model_set_hamiltonian",
        "rk_pair_rate_elements",
        "rk_pair_yields",
        "rk_pair_coherence_rate",
        "rk_pair_propagate",
        "rk_three_state_rates",
        "rk_dephasing_radius",
        "rk_yield_sensitivity",
        "typedef struct RkPairModel RkPairModel",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
