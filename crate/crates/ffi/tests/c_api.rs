use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use memlens_ffi::*;

fn last_error() -> String {
    let p = ml_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn sequence_round_trip() {
    unsafe {
        let vals = [1.0, 0.0, 0.0, 1.0];
        let mut seq = ptr::null_mut();
        assert_eq!(ml_sequence_from_values(1, vals.as_ptr(), 4, &mut seq), MlStatus::Ok);
        let mut r = 0i64;
        assert_eq!(ml_sequence_radius(seq, &mut r), MlStatus::Ok);
        assert_eq!(r, 3);
        let (mut v, mut h) = (0.0, 1.0);
        assert_eq!(ml_sequence_tail_norm(seq, 2, &mut v, &mut h), MlStatus::Ok);
        assert_eq!((v, h), (1.0, 0.0));
        let mut buf = [9.0; 6];
        assert_eq!(ml_sequence_values(seq, 6, buf.as_mut_ptr(), 6), MlStatus::Ok);
        assert_eq!(buf, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(ml_sequence_values(seq, 6, buf.as_mut_ptr(), 5), MlStatus::BufferTooSmall);
        ml_sequence_free(seq);

        let mut empty = ptr::null_mut();
        assert_eq!(ml_sequence_from_values(1, ptr::null(), 0, &mut empty), MlStatus::Ok);
        assert_eq!(ml_sequence_radius(empty, &mut r), MlStatus::Ok);
        assert_eq!(r, -1);
        ml_sequence_free(empty);
    }
}

#[test]
fn spectrum_of_small_target() {
    unsafe {
        let vals = [1.0, 0.0, 0.0, 1.0];
        let mut seq = ptr::null_mut();
        ml_sequence_from_values(1, vals.as_ptr(), 4, &mut seq);
        let mut spec = ptr::null_mut();
        assert_eq!(ml_spectrum_compute(seq, 2, 3, &mut spec), MlStatus::Ok);
        let mut n = 0;
        ml_spectrum_len(spec, &mut n);
        assert_eq!(n, 6);
        let mut values = vec![0.0; n];
        let mut modes = vec![0usize; n];
        assert_eq!(ml_spectrum_values(spec, values.as_mut_ptr(), modes.as_mut_ptr(), n), MlStatus::Ok);
        let want = [2f64.sqrt(), 1.0, 1.0, 1.0, 1.0, 0.0];
        assert!(values.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        let mut rank = 0;
        ml_spectrum_rank(spec, 1e-8, &mut rank);
        assert_eq!(rank, 5);
        let mut err = 0.0;
        ml_spectrum_truncation_error(spec, 4, &mut err);
        assert!((err - 1.0).abs() < 1e-12);
        ml_spectrum_free(spec);

        let g = CString::new(r#"{"family":"exponential","scale":1.0,"base":0.5}"#).unwrap();
        let mut c = 0.0;
        assert_eq!(ml_complexity_measure(seq, 2, g.as_ptr(), &mut c), MlStatus::Ok);
        assert!((c - 4.0).abs() < 1e-9);
        ml_sequence_free(seq);
    }
}

#[test]
fn builtin_and_synthesis() {
    unsafe {
        let id = CString::new("impulse:19").unwrap();
        let mut seq = ptr::null_mut();
        assert_eq!(ml_sequence_builtin(id.as_ptr(), &mut seq), MlStatus::Ok);
        let mut cnn = ptr::null_mut();
        assert_eq!(ml_cnn_synthesize_radix(seq, 4, &mut cnn), MlStatus::Ok);
        let (mut depth, mut filters) = (0, 0);
        ml_cnn_depth(cnn, &mut depth);
        ml_cnn_filter_count(cnn, &mut filters);
        assert_eq!((depth, filters), (3, 3));

        let mut json = ptr::null_mut();
        assert_eq!(ml_cnn_to_json(cnn, &mut json), MlStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ml_cnn_from_json(json, &mut back), MlStatus::Ok);
        ml_string_free(json);

        let mut rep = ptr::null_mut();
        assert_eq!(ml_cnn_representation(back, &mut rep), MlStatus::Ok);
        let mut r = 0;
        ml_sequence_radius(rep, &mut r);
        assert_eq!(r, 19);
        ml_sequence_free(rep);
        ml_cnn_free(back);
        ml_cnn_free(cnn);

        let mut low = ptr::null_mut();
        let rank2 = [1.0, 0.0, 0.0, 1.0];
        let mut s2 = ptr::null_mut();
        ml_sequence_from_values(1, rank2.as_ptr(), 4, &mut s2);
        assert_eq!(ml_cnn_synthesize_lowrank(s2, 2, 2, &mut low), MlStatus::Ok);
        ml_cnn_free(low);
        ml_sequence_free(s2);
        ml_sequence_free(seq);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut seq = ptr::null_mut();
        let bad = CString::new("rho9").unwrap();
        assert_eq!(ml_sequence_builtin(bad.as_ptr(), &mut seq), MlStatus::Parse);
        assert!(last_error().contains("rho9"));
        assert!(seq.is_null());

        assert_eq!(ml_sequence_builtin(ptr::null(), &mut seq), MlStatus::NullPointer);
        let vals = [1.0, 2.0, 3.0];
        assert_eq!(ml_sequence_from_values(2, vals.as_ptr(), 3, &mut seq), MlStatus::InvalidArgument);

        let imp = CString::new("impulse:40").unwrap();
        ml_sequence_builtin(imp.as_ptr(), &mut seq);
        let mut spec = ptr::null_mut();
        assert_eq!(ml_spectrum_compute(seq, 2, 3, &mut spec), MlStatus::Ok);
        ml_spectrum_free(spec);
        let rho3 = CString::new("rho3").unwrap();
        let mut inf = ptr::null_mut();
        ml_sequence_builtin(rho3.as_ptr(), &mut inf);
        let mut cnn = ptr::null_mut();
        assert_eq!(ml_cnn_synthesize_radix(inf, 2, &mut cnn), MlStatus::Computation);
        assert!(last_error().contains("finitely supported"));
        ml_sequence_free(inf);
        ml_sequence_free(seq);

        ml_sequence_free(ptr::null_mut());
        ml_spectrum_free(ptr::null_mut());
        ml_cnn_free(ptr::null_mut());
        ml_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("memlens.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for name in ["ml_sequence_from_values", "ml_spectrum_compute", "ml_cnn_synthesize_radix", "ML_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-Wall", "-Werror"]).arg(&header).status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
