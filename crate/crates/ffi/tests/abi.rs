use std::ffi::CStr;
use std::ptr;

use coded_aperture_ffi::*;

fn cfg(n: usize, t: f64) -> CaConfig {
    CaConfig { n, t, w: 1e-3, j: 1e-3 }
}

fn last_error() -> String {
    let p = ca_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn constants() {
    let mut b = 0.0;
    let mut m = 0.0;
    unsafe {
        assert_eq!(ca_beta(8, &mut b), CaStatus::Ok);
        assert_eq!(ca_m_bound(8, &mut m), CaStatus::Ok);
        assert_eq!(ca_beta(0, &mut b), CaStatus::InvalidParameter);
        assert_eq!(ca_beta(8, ptr::null_mut()), CaStatus::NullPointer);
    }
    assert!((b - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((m - 3.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn prior_lifecycle_and_errors() {
    let mut p: *mut CaPrior = ptr::null_mut();
    unsafe {
        assert_eq!(ca_prior_bandlimited(1.0, 0.1, 0.3, &mut p), CaStatus::InvalidParameter);
        assert!(p.is_null());
        assert!(last_error().contains("s >= r") || last_error().contains("1/2"));
        assert_eq!(ca_prior_iid(2.0, &mut p), CaStatus::Ok);
        let mut d = [0.0; 4];
        assert_eq!(ca_prior_sample(p, 4, d.as_mut_ptr(), 4), CaStatus::Ok);
        assert_eq!(d, [0.5; 4]);
        assert_eq!(ca_prior_sample(p, 4, d.as_mut_ptr(), 3), CaStatus::BufferTooSmall);
        ca_prior_free(p);
        ca_prior_free(ptr::null_mut());

        let shape = [1.0, 0.5, 0.0];
        assert_eq!(ca_prior_table(1.0, shape.as_ptr(), 3, &mut p), CaStatus::Ok);
        ca_prior_free(p);
    }
}

#[test]
fn lmmse_and_bound() {
    let mut p: *mut CaPrior = ptr::null_mut();
    unsafe {
        assert_eq!(ca_prior_iid(1.0, &mut p), CaStatus::Ok);
        let zeros = [0.0; 7];
        let mut v = 0.0;
        assert_eq!(ca_lmmse(cfg(7, 10.0), p, zeros.as_ptr(), 7, &mut v), CaStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);

        let mut qr = [0.0; 7];
        assert_eq!(ca_residue_sequence(7, 2, false, qr.as_mut_ptr(), 7), CaStatus::Ok);
        assert_eq!(qr, [0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(ca_lmmse(cfg(7, 10.0), p, qr.as_ptr(), 7, &mut v), CaStatus::Ok);

        let mut rho = 0.0;
        let mut bound = 0.0;
        assert_eq!(ca_optimal_rho(cfg(7, 10.0), p, &mut rho, &mut bound), CaStatus::Ok);
        assert!(bound <= v);
        let mut at = 0.0;
        assert_eq!(ca_lower_bound(cfg(7, 10.0), p, rho, &mut at), CaStatus::Ok);
        assert!((at - bound).abs() < 1e-12);

        let mut power = [0.0; 7];
        assert_eq!(ca_power_spectrum(qr.as_ptr(), 7, power.as_mut_ptr()), CaStatus::Ok);
        let mut w = 0.0;
        assert_eq!(
            ca_lmmse_from_power(cfg(7, 10.0), p, power.as_ptr(), 7, 3.0 / 7.0, &mut w),
            CaStatus::Ok
        );
        assert!((v - w).abs() < 1e-15);

        assert_eq!(ca_lmmse(cfg(7, 10.0), p, zeros.as_ptr(), 6, &mut v), CaStatus::InvalidParameter);
        assert_eq!(ca_residue_sequence(13, 2, false, qr.as_mut_ptr(), 7), CaStatus::InvalidParameter);
        ca_prior_free(p);
    }
}

#[test]
fn designs() {
    let mut p: *mut CaPrior = ptr::null_mut();
    let mut flat: *mut CaDesign = ptr::null_mut();
    let mut naz: *mut CaDesign = ptr::null_mut();
    unsafe {
        assert_eq!(ca_prior_iid(1.0, &mut p), CaStatus::Ok);
        assert_eq!(ca_design_flat(cfg(8, 100.0), p, &mut flat), CaStatus::NoResidueFamily);
        assert!(flat.is_null());
        assert_eq!(ca_design_flat(cfg(11, 100.0), p, &mut flat), CaStatus::Ok);
        let mut len = 0;
        assert_eq!(ca_design_len(flat, &mut len), CaStatus::Ok);
        assert_eq!(len, 11);
        let mut passed = false;
        assert_eq!(ca_design_passed(flat, &mut passed), CaStatus::Ok);
        assert!(passed);

        assert_eq!(ca_design_nazarov(cfg(32, 1e3), p, 5, &mut naz), CaStatus::Ok);
        let mut vals = vec![0.0; 32];
        assert_eq!(ca_design_values(naz, vals.as_mut_ptr(), 32), CaStatus::Ok);
        assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        let (mut pen, mut rho) = (0.0, 0.0);
        assert_eq!(ca_design_penalty(naz, &mut pen), CaStatus::Ok);
        assert_eq!(ca_design_rho(naz, &mut rho), CaStatus::Ok);
        assert!(pen > 1.0 && rho <= 0.5 + 1e-9);
        let json = CStr::from_ptr(ca_design_certificate_json(naz)).to_str().unwrap();
        assert!(json.contains("\"method\": \"nazarov\""));
        assert!(ca_design_certificate_json(ptr::null()).is_null());

        let mut again: *mut CaDesign = ptr::null_mut();
        assert_eq!(ca_design_nazarov(cfg(32, 1e3), p, 5, &mut again), CaStatus::Ok);
        let mut vals2 = vec![0.0; 32];
        assert_eq!(ca_design_values(again, vals2.as_mut_ptr(), 32), CaStatus::Ok);
        assert_eq!(vals, vals2);

        ca_design_free(flat);
        ca_design_free(naz);
        ca_design_free(again);
        ca_prior_free(p);
    }
}

#[test]
fn header_is_current() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/coded_aperture.h")).unwrap();
    for name in [
        "ca_last_error",
        "ca_prior_iid",
        "ca_lmmse",
        "ca_optimal_rho",
        "ca_design_nazarov",
        "ca_design_free",
        "CA_STATUS_CERTIFICATE_FAILED",
        "typedef struct CaDesign CaDesign;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
