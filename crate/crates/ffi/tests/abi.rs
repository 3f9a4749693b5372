use std::ffi::{CStr, CString};
use std::ptr;

use polya_ffi::*;

fn last_error() -> String {
    let p = polya_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn shell_counts_for_plane() {
    let mut s = PolyaShell::default();
    assert_eq!(polya_shell(2, 2, &mut s), PolyaStatus::Ok);
    assert_eq!((s.size, s.c, s.c0), (8, 12, 8));
    assert_eq!(s.p_up, PolyaRational { num: 5, den: 8 });
}

#[test]
fn expectations_by_zero_count() {
    let mut e = PolyaExpectations::default();
    let v = [1i64, 1];
    assert_eq!(unsafe { polya_expectations(v.as_ptr(), 2, &mut e) }, PolyaStatus::Ok);
    assert_eq!(e.up, PolyaRational { num: 1, den: 2 });
    assert_eq!(e.total, PolyaRational { num: 1, den: 1 });
    assert_eq!(e.total_xclass, PolyaRational { num: 4, den: 1 });

    let zero = [0i64, 0];
    assert_eq!(unsafe { polya_expectations(zero.as_ptr(), 2, &mut e) }, PolyaStatus::ZeroVector);
    assert!(last_error().contains("zero vector"));
}

#[test]
fn shell_law_is_geometric() {
    let mut p: *mut PolyaPmf = ptr::null_mut();
    let st = polya_pmf_shell_law(2, 1, PolyaDirection::Up, PolyaIndexing::Destination, 50, &mut p);
    assert_eq!(st, PolyaStatus::Ok);
    let mut k_max = 0usize;
    assert_eq!(polya_pmf_k_max(p, &mut k_max), PolyaStatus::Ok);
    assert_eq!(k_max, 1);
    let mut m = 0.0;
    polya_pmf_mass(p, 1, &mut m);
    assert_eq!(m, 1.0);
    polya_pmf_mass(p, 7, &mut m);
    assert_eq!(m, 0.0);
    unsafe { polya_pmf_free(p) };
}

#[test]
fn pmf_from_masses_and_tv() {
    let a = [0.5, 0.5];
    let b = [0.25, 0.75];
    let (mut pa, mut pb) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { polya_pmf_from_masses(a.as_ptr(), 2, 0.0, &mut pa) }, PolyaStatus::Ok);
    assert_eq!(unsafe { polya_pmf_from_masses(b.as_ptr(), 2, 0.0, &mut pb) }, PolyaStatus::Ok);
    let mut tv = 0.0;
    assert_eq!(polya_pmf_tv(pa, pb, &mut tv), PolyaStatus::Ok);
    assert!((tv - 0.25).abs() < 1e-12);

    let mut thinned = ptr::null_mut();
    assert_eq!(polya_pmf_thin(pa, 0.5, 10, &mut thinned), PolyaStatus::Ok);
    let mut mean = 0.0;
    polya_pmf_mean(thinned, &mut mean);
    assert!((mean - 0.25).abs() < 1e-12);
    unsafe {
        polya_pmf_free(pa);
        polya_pmf_free(pb);
        polya_pmf_free(thinned);
    }
}

#[test]
fn bad_masses_are_rejected() {
    let bad = [0.9, 0.9];
    let mut p = ptr::null_mut();
    assert_ne!(unsafe { polya_pmf_from_masses(bad.as_ptr(), 2, 0.0, &mut p) }, PolyaStatus::Ok);
    assert!(p.is_null());
    assert_eq!(unsafe { polya_pmf_from_masses(ptr::null(), 2, 0.0, &mut p) }, PolyaStatus::NullPointer);
}

#[test]
fn null_handles_and_outputs() {
    let mut m = 0.0;
    assert_eq!(polya_pmf_mass(ptr::null(), 0, &mut m), PolyaStatus::NullPointer);
    assert!(last_error().contains("pmf is null"));
    assert_eq!(polya_shell(2, 1, ptr::null_mut()), PolyaStatus::NullPointer);
    unsafe {
        polya_pmf_free(ptr::null_mut());
        polya_report_free(ptr::null_mut());
        polya_string_free(ptr::null_mut());
    }
}

#[test]
fn kernel_up_at_one_one() {
    let v = [1i64, 1];
    let mut p = ptr::null_mut();
    let st = unsafe {
        polya_pmf_state_kernel(v.as_ptr(), 2, PolyaDirection::Up, PolyaKernelFamily::State, 1, 200, &mut p)
    };
    assert_eq!(st, PolyaStatus::Ok);
    let mut m0 = 0.0;
    polya_pmf_mass(p, 0, &mut m0);
    assert!((m0 - 2.0 / 3.0).abs() < 1e-12);
    unsafe { polya_pmf_free(p) };
}

#[test]
fn d1_level_law() {
    let mut p = ptr::null_mut();
    assert_eq!(polya_pmf_d1_level_law(1, PolyaDirection::Up, 50, &mut p), PolyaStatus::Ok);
    let (mut m0, mut m1) = (0.0, 0.0);
    polya_pmf_mass(p, 0, &mut m0);
    polya_pmf_mass(p, 1, &mut m1);
    assert_eq!((m0, m1), (0.5, 0.5));
    unsafe { polya_pmf_free(p) };
    assert_eq!(polya_pmf_d1_level_law(0, PolyaDirection::Up, 50, &mut p), PolyaStatus::ZeroVector);
}

#[test]
fn verify_round_trip() {
    let config = CString::new(
        r#"{"dimension": 1, "walk": "free", "cutoff_ladder": [1000], "excursions_per_cutoff": 2000, "seed": 3,
            "identities": [{"name": "d1_level_law", "n": 1, "direction": "up"}]}"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { polya_verify(config.as_ptr(), &mut report) }, PolyaStatus::Ok);
    let mut failed = true;
    assert_eq!(polya_report_has_failures(report, &mut failed), PolyaStatus::Ok);
    assert!(!failed);
    let mut csv = ptr::null_mut();
    assert_eq!(polya_report_csv(report, &mut csv), PolyaStatus::Ok);
    let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_owned();
    assert!(text.starts_with("identity,target,cutoff"));
    assert!(text.contains("d1_level_law"));
    unsafe {
        polya_string_free(csv);
        polya_report_free(report);
    }
}

#[test]
fn verify_reports_config_pointer() {
    let config = CString::new(r#"{"dimension": 0}"#).unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { polya_verify(config.as_ptr(), &mut report) }, PolyaStatus::Config);
    assert!(report.is_null());
    assert!(last_error().starts_with("config error at /"));
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(polya_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
