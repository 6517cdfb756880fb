use std::ffi::{c_char, CStr, CString};
use std::ptr;

use sepdyn::exact_swap::{lie_trotter_swap_closed_form, SwapInitialData};
use sepdyn_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; sd_last_error_length() + 1];
    assert_eq!(unsafe { sd_last_error_message(buf.as_mut_ptr(), buf.len()) }, SdStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn reference_state() -> *mut SdState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let dims = [2usize, 2];
    let re = [1.0, 0.0, r, r];
    let im = [0.0; 4];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sd_state_new(dims.as_ptr(), 2, re.as_ptr(), im.as_ptr(), &mut s) }, SdStatus::Ok);
    s
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(sd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn lie_trotter_step_matches_closed_form() {
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { sd_operator_swap(2, &mut op) }, SdStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { sd_operator_dim(op, &mut dim) }, SdStatus::Ok);
    assert_eq!(dim, 4);

    let s = reference_state();
    assert_eq!(unsafe { sd_evolve(op, s, SdScheme::LieTrotter as u32, 0.1, 1) }, SdStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { sd_state_len(s, &mut len) }, SdStatus::Ok);
    let (mut re, mut im) = (vec![0.0; len], vec![0.0; len]);
    assert_eq!(unsafe { sd_state_amplitudes(s, re.as_mut_ptr(), im.as_mut_ptr(), len) }, SdStatus::Ok);

    let d = SwapInitialData::reference();
    let want = lie_trotter_swap_closed_form(d.a0(), d.b0(), 0.1).unwrap().stacked();
    for k in 0..4 {
        assert!((re[k] - want[k].re).abs() < 1e-12 && (im[k] - want[k].im).abs() < 1e-12);
    }
    let mut norm = 0.0;
    assert_eq!(unsafe { sd_state_norm(s, &mut norm) }, SdStatus::Ok);
    assert!((norm - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { sd_state_amplitudes(s, re.as_mut_ptr(), im.as_mut_ptr(), 2) },
        SdStatus::BufferTooSmall
    );
    unsafe {
        sd_state_free(s);
        sd_operator_free(op);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { sd_operator_swap(1, &mut op) }, SdStatus::InvalidArgument);
    assert!(op.is_null());
    assert!(last_error().contains("swap"));
    assert_eq!(unsafe { sd_operator_ladder(4, &mut op) }, SdStatus::InvalidArgument);
    assert_eq!(unsafe { sd_operator_swap(2, ptr::null_mut()) }, SdStatus::NullPointer);
    assert_eq!(unsafe { sd_operator_dim(ptr::null(), ptr::null_mut()) }, SdStatus::NullPointer);

    let bad = CString::new(r#"{"dims":[2],"entries":[[[0,0],[1,0]],[[0,0],[0,0]]]}"#).unwrap();
    assert_eq!(unsafe { sd_operator_from_json(bad.as_ptr(), &mut op) }, SdStatus::NotHermitian);

    let dims = [2usize, 0];
    let re = [1.0; 2];
    let im = [0.0; 2];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sd_state_new(dims.as_ptr(), 2, re.as_ptr(), im.as_ptr(), &mut s) }, SdStatus::Dimension);

    let s = reference_state();
    assert_eq!(unsafe { sd_operator_random(3, 1, &mut op) }, SdStatus::Ok);
    assert_eq!(unsafe { sd_evolve(op, s, 0, 0.1, 1) }, SdStatus::Dimension);
    assert_eq!(unsafe { sd_evolve(op, s, 9, 0.1, 1) }, SdStatus::InvalidArgument);
    assert!(last_error().contains("scheme"));
    let mut small = [0 as c_char; 2];
    assert_eq!(unsafe { sd_last_error_message(small.as_mut_ptr(), 2) }, SdStatus::BufferTooSmall);
    unsafe {
        sd_state_free(s);
        sd_operator_free(op);
        sd_state_free(ptr::null_mut());
        sd_operator_free(ptr::null_mut());
    }
}

#[test]
fn json_round_trip_and_ladder() {
    let mut op = ptr::null_mut();
    let json = CString::new(r#"{"dims":[2],"entries":[[[1,0],[0,-1]],[[0,1],[-1,0]]]}"#).unwrap();
    assert_eq!(unsafe { sd_operator_from_json(json.as_ptr(), &mut op) }, SdStatus::Ok);
    unsafe { sd_operator_free(op) };
    assert_eq!(unsafe { sd_operator_ladder(2, &mut op) }, SdStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { sd_operator_dim(op, &mut dim) }, SdStatus::Ok);
    assert_eq!(dim, 27);
    unsafe { sd_operator_free(op) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sepdyn.h")).unwrap();
    for name in [
        "sd_version", "sd_last_error_message", "sd_operator_swap", "sd_operator_random", "sd_operator_ladder",
        "sd_operator_from_json", "sd_operator_free", "sd_state_new", "sd_state_amplitudes", "sd_state_free",
        "sd_evolve", "SD_STATUS_OK", "SD_SCHEME_STRANG", "typedef struct SdState SdState",
    ] {
        assert!(header.contains(name), "{name} missing");
    }
    // compile check when a C compiler is around
    if let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-"])
        .stdin(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(header.as_bytes())?;
            child.wait_with_output()
        })
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
