use std::ffi::{CStr, CString};
use std::ptr;

use perpetuity_ffi::*;

const BETA_EXP: &str = "joint.A.variant = beta\njoint.A.p = 2\njoint.A.q = 1\njoint.B.variant = exponential\njoint.B.rate = 1\n";

fn joint(text: &str) -> *mut PerpJoint {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { perp_joint_from_config(c.as_ptr(), &mut h) }, PerpStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = perp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn simulate_is_independent_of_stream_count() {
    let h = joint(BETA_EXP);
    let mut a = vec![0.0; 10_000];
    let mut b = vec![0.0; 10_000];
    unsafe {
        assert_eq!(perp_simulate(h, a.len(), 3, 1, a.as_mut_ptr()), PerpStatus::Ok);
        assert_eq!(perp_simulate(h, b.len(), 3, 4, b.as_mut_ptr()), PerpStatus::Ok);
        perp_joint_free(h);
    }
    assert_eq!(a, b);
    // X ~ Gamma(3, 1)
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    assert!((mean - 3.0).abs() < 0.1, "{mean}");
}

#[test]
fn verdict_and_tail() {
    let h = joint(BETA_EXP);
    let mut v = PerpVerdict::Inconclusive;
    let mut form = PerpTailForm::default();
    unsafe {
        assert_eq!(perp_moment_verdict(h, 0.5, &mut v), PerpStatus::Ok);
        assert_eq!(v, PerpVerdict::Finite);
        assert_eq!(perp_moment_verdict(h, 1.5, &mut v), PerpStatus::Ok);
        assert_eq!(v, PerpVerdict::Infinite);
        assert_eq!(perp_moment_verdict(h, -1.0, &mut v), PerpStatus::InvalidArgument);
        assert_eq!(perp_tail_prediction(h, 1000, 1, &mut form), PerpStatus::Ok);
        perp_joint_free(h);
    }
    assert!((form.a - 0.5).abs() < 1e-12 && form.c == 2.0 && form.b == 1.0);
}

#[test]
fn charfn_matches_gamma() {
    let h = joint(BETA_EXP);
    let (mut re, mut im) = (0.0, 0.0);
    unsafe {
        assert_eq!(perp_charfn(h, 1.0, &mut re, &mut im), PerpStatus::Ok);
        perp_joint_free(h);
    }
    // (1 − i)^{−3} = (1 + i)^3 / 8 = (−2 + 2i)/8
    assert!((re + 0.25).abs() < 1e-8 && (im - 0.25).abs() < 1e-8, "{re} {im}");
}

#[test]
fn errors_carry_messages() {
    let bad = CString::new("disttribution = beta").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { perp_joint_from_config(bad.as_ptr(), &mut h) }, PerpStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("disttribution"));

    assert_eq!(unsafe { perp_joint_from_config(ptr::null(), &mut h) }, PerpStatus::InvalidArgument);

    let div = joint("joint.A.variant = point_mass\njoint.A.value = 1.5\njoint.B.variant = exponential\njoint.B.rate = 1");
    let mut out = [0.0; 4];
    assert_eq!(unsafe { perp_simulate(div, 4, 1, 1, out.as_mut_ptr()) }, PerpStatus::Divergent);
    assert!(last_error().contains("E log|A|"));
    unsafe { perp_joint_free(div) };

    let bounded = joint("joint.A.variant = beta\njoint.A.p = 2\njoint.A.q = 1\njoint.B.variant = uniform\njoint.B.lo = 0\njoint.B.hi = 1");
    let mut form = PerpTailForm::default();
    assert_eq!(unsafe { perp_tail_prediction(bounded, 100, 1, &mut form) }, PerpStatus::NoTheorem);
    unsafe { perp_joint_free(bounded) };

    unsafe { perp_joint_free(ptr::null_mut()) };
}

#[test]
fn reference_cases() {
    let id = CString::new("E2").unwrap();
    let mut s = 0.0;
    assert_eq!(unsafe { perp_reference_survival(id.as_ptr(), 2.0, &mut s) }, PerpStatus::Ok);
    assert!((s - 2.0 / 3.0 * (-2.0f64).exp()).abs() < 1e-12);
    let id = CString::new("E9").unwrap();
    assert_eq!(unsafe { perp_reference_survival(id.as_ptr(), 2.0, &mut s) }, PerpStatus::Config);
    let v = unsafe { CStr::from_ptr(perp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
