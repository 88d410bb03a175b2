use std::ffi::{c_char, CString};
use std::ptr;

use qcapim_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe { qcapim_last_error(ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    let st = unsafe { qcapim_last_error(buf.as_mut_ptr().cast(), buf.len(), &mut needed) };
    assert_eq!(st, QcapimStatus::Ok);
    buf.pop();
    String::from_utf8(buf).unwrap()
}

fn synth(target: &str) -> *mut QcapimLayout {
    let t = CString::new(target).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qcapim_layout_synthesize(t.as_ptr(), &mut h) }, QcapimStatus::Ok);
    assert!(!h.is_null());
    h
}

fn defaults() -> QcapimParams {
    let mut p = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { qcapim_params_default(p.as_mut_ptr()) }, QcapimStatus::Ok);
    unsafe { p.assume_init() }
}

#[test]
fn eval_cell_matches_mux() {
    for v in 0..8u8 {
        let (x, y, z) = (v & 4 != 0, v & 2 != 0, v & 1 != 0);
        assert_eq!(qcapim_eval_cell(x, y, z), if z { y } else { x });
    }
}

#[test]
fn layout_roundtrip_and_metrics() {
    let h = synth("primitive");
    let mut needed = 0;
    let st = unsafe { qcapim_layout_serialize(h, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(st, QcapimStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { qcapim_layout_serialize(h, buf.as_mut_ptr(), buf.len(), &mut needed) }, QcapimStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { qcapim_layout_parse(buf.as_ptr(), &mut again) }, QcapimStatus::Ok);
    let mut m = QcapimLayoutMetrics::default();
    assert_eq!(unsafe { qcapim_layout_metrics(again, 80.0, &mut m) }, QcapimStatus::Ok);
    assert_eq!(m.cell_count, 38);
    assert_eq!(m.clock_zone_regions, 2);
    unsafe {
        qcapim_layout_free(h);
        qcapim_layout_free(again);
    }
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("not a layout").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qcapim_layout_parse(bad.as_ptr(), &mut h) }, QcapimStatus::Parse);
    assert!(h.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { qcapim_layout_parse(ptr::null(), &mut h) }, QcapimStatus::NullPointer);
    let unknown = CString::new("adder").unwrap();
    assert_eq!(unsafe { qcapim_layout_synthesize(unknown.as_ptr(), &mut h) }, QcapimStatus::InvalidArgument);
    assert!(last_error().contains("adder"));
    unsafe { qcapim_layout_free(ptr::null_mut()) };
}

#[test]
fn simulate_and_read_back() {
    let h = synth("wire");
    let mut p = defaults();
    p.num_samples = 32;
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qcapim_simulate(h, &p, 0, 1, &mut t) }, QcapimStatus::Ok);
    assert_eq!(unsafe { qcapim_traces_samples(t) }, 32);
    let f = CString::new("F").unwrap();
    let mut pol = 0.0;
    // Input A = 1 for the second half; F follows.
    assert_eq!(unsafe { qcapim_traces_polarization(t, f.as_ptr(), 24, &mut pol) }, QcapimStatus::Ok);
    assert!(pol > 0.5);
    assert_eq!(unsafe { qcapim_traces_polarization(t, f.as_ptr(), 99, &mut pol) }, QcapimStatus::InvalidArgument);
    let mut needed = 0;
    unsafe { qcapim_traces_csv(t, ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    assert_eq!(unsafe { qcapim_traces_csv(t, buf.as_mut_ptr().cast(), needed, &mut needed) }, QcapimStatus::Ok);
    assert!(buf.starts_with(b"sample,clock0,clock1,clock2,clock3,A,F\n"));
    unsafe {
        qcapim_traces_free(t);
        qcapim_layout_free(h);
    }
}

#[test]
fn verify_pass_and_fail() {
    let h = synth("inverter");
    let p = defaults();
    let mut r = QcapimVerifyResult::default();
    assert_eq!(unsafe { qcapim_verify(h, &p, ptr::null(), 0.5, &mut r) }, QcapimStatus::Ok);
    assert!(r.pass);
    assert_eq!(r.rows, 2);
    let wrong = CString::new("A").unwrap();
    assert_eq!(unsafe { qcapim_verify(h, &p, wrong.as_ptr(), 0.5, &mut r) }, QcapimStatus::VerificationFailed);
    assert_eq!(r.mismatches, 2);
    let malformed = CString::new("A &").unwrap();
    assert_eq!(unsafe { qcapim_verify(h, &p, malformed.as_ptr(), 0.5, &mut r) }, QcapimStatus::Parse);
    unsafe { qcapim_layout_free(h) };
}

#[test]
fn dissipation_column() {
    let h = synth("majority");
    let p = defaults();
    let mut d = QcapimDissipation::default();
    assert_eq!(unsafe { qcapim_dissipation(h, &p, 1.0, &mut d) }, QcapimStatus::Ok);
    assert!(d.min_circuit_mev <= d.avg_circuit_mev && d.avg_circuit_mev <= d.max_circuit_mev);
    assert!((d.avg_leakage_mev + d.avg_switching_mev - d.avg_circuit_mev).abs() < 1e-9);
    unsafe { qcapim_layout_free(h) };
}
