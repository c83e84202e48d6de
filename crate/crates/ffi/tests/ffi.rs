use std::ptr;

use vortex_patch_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { vp_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

#[test]
fn ellipse_constants_and_modes() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(vp_ellipse_new(2.0, &mut e), VpStatus::Ok);
        let (mut om, mut al) = (0.0, 0.0);
        assert_eq!(
            vp_ellipse_constants(e, &mut om, &mut al, ptr::null_mut()),
            VpStatus::Ok
        );
        assert!((om - 2.0 / 9.0).abs() < 1e-15);
        assert!((al - 0.531_923_040_535_243_6).abs() < 1e-15);
        let mut m = VpModeData::default();
        assert_eq!(vp_mode_data(e, 2, &mut m), VpStatus::Ok);
        assert_eq!(m.mu_plus, 0.0);
        assert_eq!(m.class_code, 2);
        assert_eq!(vp_mode_data(e, 5, &mut m), VpStatus::Ok);
        assert_eq!(m.class_code, 0);
        vp_ellipse_free(e);
    }
}

#[test]
fn critical_gamma_and_errors() {
    unsafe {
        let mut g = 0.0;
        assert_eq!(vp_critical_gamma(3, &mut g), VpStatus::Ok);
        assert!((g - 3.0).abs() < 1e-10);
        assert_eq!(vp_critical_gamma(2, &mut g), VpStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(vp_critical_gamma(4, ptr::null_mut()), VpStatus::NullPointer);
        let mut e = ptr::null_mut();
        assert_eq!(vp_ellipse_new(0.5, &mut e), VpStatus::InvalidArgument);
        assert!(e.is_null());
        assert!(last_error().contains('γ') || !last_error().is_empty());
    }
}

#[test]
fn state_rhs_and_integration() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(vp_ellipse_new(2.0, &mut e), VpStatus::Ok);
        let zeros = vec![0.0; 64];
        let mut s = ptr::null_mut();
        assert_eq!(vp_state_new(zeros.as_ptr(), 64, &mut s), VpStatus::Ok);
        assert_eq!(vp_state_len(s), 64);
        let mut out = vec![1.0; 64];
        assert_eq!(vp_rhs(s, e, 2.0 / 9.0, out.as_mut_ptr(), 64), VpStatus::Ok);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(
            vp_rhs(s, e, 2.0 / 9.0, out.as_mut_ptr(), 10),
            VpStatus::InvalidArgument
        );
        let mut c = VpConserved::default();
        assert_eq!(vp_conserved(s, e, &mut c), VpStatus::Ok);
        assert!((c.circulation - std::f64::consts::PI).abs() < 1e-14);
        let mut f = ptr::null_mut();
        assert_eq!(
            vp_integrate(s, e, 2.0 / 9.0, 1e-2, 0.1, &mut f),
            VpStatus::Ok
        );
        assert_eq!(vp_state_values(f, out.as_mut_ptr(), 64), VpStatus::Ok);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
        let (mut j, mut t) = (1.0, 1.0);
        assert_eq!(vp_rectify(f, e, &mut j, &mut t), VpStatus::Ok);
        assert!(j.abs() < 1e-14 && t.abs() < 1e-14);
        vp_state_free(f);
        vp_state_free(s);
        vp_ellipse_free(e);
        vp_state_free(ptr::null_mut());
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        let mut out = [0.0; 8];
        assert_eq!(
            vp_rhs(ptr::null(), ptr::null(), 0.0, out.as_mut_ptr(), 8),
            VpStatus::NullPointer
        );
        assert_eq!(
            vp_state_new(ptr::null(), 8, &mut ptr::null_mut()),
            VpStatus::NullPointer
        );
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/vortex_patch.h"
    ))
    .unwrap();
    for name in [
        "vp_ellipse_new",
        "vp_state_new",
        "vp_rhs",
        "vp_integrate",
        "vp_rectify",
        "VP_STATUS_BLOW_UP",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
