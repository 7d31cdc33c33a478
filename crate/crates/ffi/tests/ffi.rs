use std::ffi::{c_char, CStr, CString};
use std::ptr;

use risradar_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        rr_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(rr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn hypothesis_counts() {
    let mut n = 0usize;
    assert_eq!(unsafe { rr_hypothesis_count(4, 2, &mut n) }, RrStatus::Ok);
    assert_eq!(n, 15);
    assert_eq!(unsafe { rr_hypothesis_count(4, 2, ptr::null_mut()) }, RrStatus::NullPointer);
    assert!(last_error().contains("null"));
}

#[test]
fn geometry_lifecycle_and_gain() {
    let mut layout = unsafe { std::mem::zeroed::<RrLayout>() };
    assert_eq!(unsafe { rr_layout_default(&mut layout) }, RrStatus::Ok);
    layout.ris_rows = 1;
    layout.ris_cols = 2;
    layout.antenna_rows = 1;
    layout.antenna_cols = 1;
    let mut g: *mut RrGeometry = ptr::null_mut();
    assert_eq!(unsafe { rr_geometry_new(&layout, &mut g) }, RrStatus::Ok);
    let (mut m, mut n) = (0usize, 0usize);
    assert_eq!(unsafe { rr_geometry_counts(g, &mut m, &mut n) }, RrStatus::Ok);
    assert_eq!((m, n), (2, 1));

    let mut gain = 0.0;
    let mut phases = [0.0; 2];
    let s = unsafe { rr_max_power_gain(g, 0.5, 0.7, &mut gain, phases.as_mut_ptr(), 2) };
    assert_eq!(s, RrStatus::Ok);
    assert!(gain > 1.0);
    assert!(phases.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
    let s = unsafe { rr_max_power_gain(g, 0.5, 0.7, &mut gain, phases.as_mut_ptr(), 3) };
    assert_eq!(s, RrStatus::InvalidArgument);
    let s = unsafe { rr_max_power_gain(g, 4.0, 0.7, &mut gain, phases.as_mut_ptr(), 2) };
    assert_eq!(s, RrStatus::Domain);
    assert!(!last_error().is_empty());
    unsafe { rr_geometry_free(g) };

    layout.wavelength = -1.0;
    assert_ne!(unsafe { rr_geometry_new(&layout, &mut g) }, RrStatus::Ok);
}

#[test]
fn placement_profile() {
    let lx = [0.0, 0.05, 0.0];
    let lz = [0.2, 0.2, 0.0];
    let mut out = [0.0; 3];
    let s = unsafe { rr_power_gain_profile(4, 0.1, 1.0, 0.5, lx.as_ptr(), lz.as_ptr(), 2, out.as_mut_ptr()) };
    assert_eq!(s, RrStatus::Ok);
    assert!(out[0] >= out[1] && out[1] > 1.0);
    let s = unsafe { rr_power_gain_profile(4, 0.1, 1.0, 0.5, lx.as_ptr(), lz.as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(s, RrStatus::Domain);
}

#[test]
fn diagonal_sdp() {
    let re = [3.0, 0.0, 0.0, 1.0];
    let im = [0.0; 4];
    let t = [1.0, 1.0];
    let (mut xr, mut xi, mut v) = ([0.0; 4], [0.0; 4], 0.0);
    let s = unsafe { rr_solve_diag_sdp(2, re.as_ptr(), im.as_ptr(), t.as_ptr(), xr.as_mut_ptr(), xi.as_mut_ptr(), &mut v) };
    assert_eq!(s, RrStatus::Ok);
    assert!((v - 4.0).abs() < 1e-6);
    assert!((xr[0] - 1.0).abs() < 1e-9 && (xr[3] - 1.0).abs() < 1e-9);

    let bad_im = [0.0, 1.0, 0.0, 0.0];
    let s = unsafe { rr_solve_diag_sdp(2, re.as_ptr(), bad_im.as_ptr(), t.as_ptr(), xr.as_mut_ptr(), xi.as_mut_ptr(), &mut v) };
    assert_eq!(s, RrStatus::Domain);
}

#[test]
fn simulation_rows() {
    let cfg = CString::new(
        "ris_rows = 1\nris_cols = 2\nantenna_cols = 1\nwaveform_len = 2\nreceived_len = 3\ngrid_count = 2\n\
         max_targets = 1\ntarget_grids = [0]\ntarget_offsets = [1]\ncycles = 2\nruns = 3\nmisdetect_runs = 0\n\
         randomizations = 5\nschemes = [\"random\", \"mimo\"]\n",
    )
    .unwrap();
    let mut sim: *mut RrSimulation = ptr::null_mut();
    assert_eq!(unsafe { rr_simulation_new(RrProfile::Desk, cfg.as_ptr(), &mut sim) }, RrStatus::Ok);
    let mut rows = 0usize;
    assert_eq!(unsafe { rr_simulation_run(sim, &mut rows) }, RrStatus::Ok);
    assert_eq!(rows, 4);
    let mut row = unsafe { std::mem::zeroed::<RrMetricsRow>() };
    assert_eq!(unsafe { rr_simulation_row(sim, 3, &mut row) }, RrStatus::Ok);
    assert_eq!(row.scheme, RrScheme::Mimo);
    assert_eq!(row.cycle, 2);
    assert!((0.0..=1.0).contains(&row.p_detect));
    assert!(row.p_misdetect.is_nan() && row.axis_value.is_nan());
    assert_eq!(unsafe { rr_simulation_row(sim, 4, &mut row) }, RrStatus::InvalidArgument);
    unsafe { rr_simulation_free(sim) };

    let bad = CString::new("runs = 0").unwrap();
    assert_eq!(unsafe { rr_simulation_new(RrProfile::Desk, bad.as_ptr(), &mut sim) }, RrStatus::Config);
    assert!(last_error().contains("runs"));
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/risradar.h")).unwrap();
    for name in [
        "rr_version",
        "rr_last_error_message",
        "rr_geometry_new",
        "rr_geometry_free",
        "rr_max_power_gain",
        "rr_power_gain_profile",
        "rr_hypothesis_count",
        "rr_solve_diag_sdp",
        "rr_simulation_new",
        "rr_simulation_row",
        "typedef struct RrGeometry RrGeometry",
        "RR_STATUS_OK",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}
