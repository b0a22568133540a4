use std::ffi::CStr;
use std::ptr;

use santalo_lab_ffi::*;

fn last_error() -> String {
    let p = sl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn scalar_functions() {
    let mut x = f64::NAN;
    unsafe {
        assert_eq!(sl_log_gamma(6.0, &mut x), SlStatus::Ok);
        assert!((x - 120f64.ln()).abs() < 1e-14);
        assert_eq!(sl_lp_ball_log_volume(1.0, 3, &mut x), SlStatus::Ok);
        assert!((x - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert_eq!(sl_lp_ball_log_volume(f64::INFINITY, 5, &mut x), SlStatus::Ok);
        assert!((x - 5.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(sl_minkowski_log_volume(2, 1.0, &mut x), SlStatus::Ok);
        assert!((x - (std::f64::consts::PI + 12.0).ln()).abs() < 1e-13);
        assert_eq!(sl_half_ball_centroid(3, &mut x), SlStatus::Ok);
        assert!((x - 0.375).abs() < 1e-14);
        assert_eq!(sl_hull_centroid_height(2000, 1.0, &mut x), SlStatus::Ok);
        assert!((x - (1.0 - (-1f64).exp())).abs() < 0.01);
        let mut w = SlWindowConstants { s0: 0.0, s1: 0.0 };
        assert_eq!(sl_window_constants(1.0, 1.0 / (std::f64::consts::E - 1.0), &mut w), SlStatus::Ok);
        assert_eq!(format!("{:.6} {:.6}", w.s0, w.s1), "-0.290815 -0.225705");
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(sl_log_gamma(-1.0, &mut x), SlStatus::Domain);
        assert!(last_error().contains("log_gamma"));
        assert_eq!(sl_lp_ball_log_volume(0.5, 3, &mut x), SlStatus::Domain);
        assert_eq!(sl_log_gamma(1.0, ptr::null_mut()), SlStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut buf = [0 as std::ffi::c_char; 8];
        let full = sl_copy_last_error(buf.as_mut_ptr(), buf.len());
        assert!(full > 7);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 7);
    }
}

#[test]
fn body_handles() {
    unsafe {
        let mut body: *mut SlBody = ptr::null_mut();
        assert_eq!(sl_body_lp_ball(1.0, 3, 1.0, &mut body), SlStatus::Ok);
        assert_eq!(sl_body_dim(body), 3);
        let y = [0.5, 0.25, 0.0];
        let mut g = 0.0;
        assert_eq!(sl_body_gauge(body, y.as_ptr(), 3, &mut g), SlStatus::Ok);
        assert!((g - 0.75).abs() < 1e-15);
        let u = [1.0, 0.0, 0.0];
        assert_eq!(sl_body_support(body, u.as_ptr(), 3, &mut g), SlStatus::Ok);
        assert!((g - 1.0).abs() < 1e-15);
        assert_eq!(sl_body_gauge(body, y.as_ptr(), 2, &mut g), SlStatus::DimensionMismatch);
        assert_eq!(sl_body_gauge(ptr::null(), y.as_ptr(), 3, &mut g), SlStatus::NullPointer);
        sl_body_free(body);
        sl_body_free(ptr::null_mut());
        assert_eq!(sl_body_dim(ptr::null()), 0);

        assert_eq!(sl_body_half_ball(0, &mut body), SlStatus::Domain);
        let c = [0.3, 0.0];
        assert_eq!(sl_body_euclid_ball(c.as_ptr(), 2, 1.0, &mut body), SlStatus::Ok);
        sl_body_free(body);
    }
}

#[test]
fn stochastic_calls_are_seeded() {
    unsafe {
        let s1 = sl_stream_new(7, 0);
        let s2 = sl_stream_new(7, 0);
        let mut a = SlVolumeEstimate { log_value: 0.0, std_err_log: 0.0, samples: 0, method: SlMethod::Grid };
        let mut b = a;
        assert_eq!(sl_intersect_volume(2.0, 1.0, 2, 1.2, 50_000, s1, &mut a), SlStatus::Ok);
        assert_eq!(sl_intersect_volume(2.0, 1.0, 2, 1.2, 50_000, s2, &mut b), SlStatus::Ok);
        assert_eq!(a, b);
        assert_eq!(a.method, SlMethod::MonteCarlo);
        assert_eq!(a.samples, 50_000);
        assert_eq!(sl_intersect_volume(2.0, 1.0, 2, 1.2, 10, ptr::null(), &mut a), SlStatus::NullPointer);
        sl_stream_free(s1);
        sl_stream_free(s2);
    }
}

#[test]
fn polar_volume_and_santalo_point() {
    unsafe {
        let stream = sl_stream_new(1, 0);
        let mut body: *mut SlBody = ptr::null_mut();
        assert_eq!(sl_body_lp_ball(2.0, 4, 1.0, &mut body), SlStatus::Ok);
        let x = [0.0; 4];
        let mut v = SlVolumeEstimate { log_value: 0.0, std_err_log: 0.0, samples: 0, method: SlMethod::MonteCarlo };
        assert_eq!(sl_polar_log_volume(body, x.as_ptr(), 4, 1000, stream, &mut v), SlStatus::Ok);
        let mut want = 0.0;
        sl_lp_ball_log_volume(2.0, 4, &mut want);
        assert!((v.log_value - want).abs() < 1e-12);
        let outside = [2.0, 0.0, 0.0, 0.0];
        assert_eq!(sl_polar_log_volume(body, outside.as_ptr(), 4, 1000, stream, &mut v), SlStatus::Domain);
        sl_body_free(body);

        assert_eq!(sl_body_half_ball(2, &mut body), SlStatus::Ok);
        let mut point = [f64::NAN; 2];
        let mut r = SlSantaloResult { polar_log_volume: 0.0, residual: 0.0, residual_std_err: 0.0, iterations: 0 };
        assert_eq!(sl_santalo_axis_search(body, 1e-4, 10_000, stream, point.as_mut_ptr(), 2, &mut r), SlStatus::Ok);
        assert!(point[0] > 0.35 && point[0] < 0.43 && point[1] == 0.0);
        assert!(r.residual < 1e-2 && r.iterations > 0);
        assert_eq!(
            sl_santalo_axis_search(body, 1e-4, 10_000, stream, point.as_mut_ptr(), 3, &mut r),
            SlStatus::DimensionMismatch
        );
        sl_body_free(body);
        sl_stream_free(stream);
    }
}

#[test]
fn polar_centroid_reports_diagnostics_in_low_dimension() {
    unsafe {
        let stream = sl_stream_new(1, 0);
        let mut c = SlPolarCentroid { height: 0.0, err: 0.0, tail_fraction: 0.0, ratio_over_polar_chord: 0.0, ratio_over_hull_height: 0.0 };
        let b = 1.0 / (std::f64::consts::E - 1.0);
        assert_eq!(sl_polar_centroid_height(5, 1.0, b, 16, 1000, stream, &mut c), SlStatus::Diagnostics);
        assert_eq!(sl_polar_centroid_height(200, 1.0, b, 16, 2000, stream, &mut c), SlStatus::Ok);
        assert!(c.height < -0.165 && c.height > -0.351, "{}", c.height);
        sl_stream_free(stream);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/santalo_lab.h");
    let src = include_str!("../src/lib.rs");
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 20, "{n}");
    assert!(header.contains("SL_STATUS_DIAGNOSTICS = 5"));
}
