use std::ffi::{c_char, CStr, CString};
use std::ptr;

use symflow_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        symflow_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn preset_runs_to_completion() {
    let name = CString::new("sol-exact").unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(symflow_sim_from_preset(name.as_ptr(), 16, 1.1, &mut sim), SymflowStatus::Ok);
        let mut stop = SymflowStop::Running;
        assert_eq!(symflow_sim_step(sim, &mut stop), SymflowStatus::Ok);
        assert_eq!(stop, SymflowStop::Running);
        assert_eq!(symflow_sim_run(sim, &mut stop), SymflowStatus::Ok);
        assert_eq!(stop, SymflowStop::ReachedTEnd);
        let mut t = 0.0;
        symflow_sim_time(sim, &mut t);
        assert!((t - 1.1).abs() < 1e-12);
        let mut count = 0usize;
        symflow_sim_record_count(sim, &mut count);
        assert!(count >= 3);
        let mut rec = SymflowRecord::default();
        assert_eq!(symflow_sim_record(sim, 0, &mut rec), SymflowStatus::Ok);
        assert_eq!(rec.t, 1.0);
        assert!(rec.l > 0.0);
        assert!(rec.u_min.is_nan());
        assert_eq!(symflow_sim_record(sim, count, &mut rec), SymflowStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        symflow_sim_free(sim);
    }
}

#[test]
fn config_text_builds_a_warped_run() {
    let text = CString::new("[run]\nscenario = flat-torus-warped\n[grid]\nn = 16\n[controller]\nt_end = 0.01\n").unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(symflow_sim_from_config(text.as_ptr(), &mut sim), SymflowStatus::Ok, "{}", last_error());
        let mut stop = SymflowStop::Running;
        assert_eq!(symflow_sim_run(sim, &mut stop), SymflowStatus::Ok);
        assert_eq!(stop, SymflowStop::ReachedTEnd);
        let mut rec = SymflowRecord::default();
        symflow_sim_record(sim, 0, &mut rec);
        assert!(rec.u_min.is_finite() && rec.det_g_min.is_nan());
        symflow_sim_free(sim);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut sim = ptr::null_mut();
    unsafe {
        let bad = CString::new("[run]\nscenario = sol-exact\nbogus = 1\n").unwrap();
        assert_eq!(symflow_sim_from_config(bad.as_ptr(), &mut sim), SymflowStatus::Config);
        assert!(last_error().contains("bogus"));
        let name = CString::new("no-such-preset").unwrap();
        assert_eq!(symflow_sim_from_preset(name.as_ptr(), 0, 0.0, &mut sim), SymflowStatus::Config);
        assert_eq!(symflow_sim_from_preset(ptr::null(), 0, 0.0, &mut sim), SymflowStatus::NullPointer);
        assert!(sim.is_null());
        symflow_sim_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    unsafe {
        symflow_sim_step(ptr::null_mut(), ptr::null_mut());
        let full = symflow_last_error(ptr::null_mut(), 0);
        let mut buf = [0 as c_char; 5];
        assert_eq!(symflow_last_error(buf.as_mut_ptr(), 5), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 4);
    }
}

#[test]
fn spd_distance_and_sol_limit() {
    unsafe {
        let a = [1.0, 0.0, 1.0];
        let b = [2.0f64.exp(), 0.0, (-2.0f64).exp()];
        let mut d = 0.0;
        assert_eq!(symflow_spd_distance(a.as_ptr(), b.as_ptr(), &mut d), SymflowStatus::Ok);
        assert!((d - 2.0).abs() < 1e-12);
        let not_spd = [1.0, 2.0, 1.0];
        assert_eq!(symflow_spd_distance(a.as_ptr(), not_spd.as_ptr(), &mut d), SymflowStatus::Numerical);

        let h = [2i64, 1, 1, 1];
        let mut lim = SymflowSolLimit::default();
        assert_eq!(symflow_sol_limit(h.as_ptr(), &mut lim), SymflowStatus::Ok);
        let c = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert!((lim.c - c).abs() < 1e-12);
        assert!((lim.slope_conjugation_invariant - 4.0 * c * c).abs() < 1e-12);
        let det2 = [2i64, 0, 0, 1];
        assert_ne!(symflow_sol_limit(det2.as_ptr(), &mut lim), SymflowStatus::Ok);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(symflow_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
