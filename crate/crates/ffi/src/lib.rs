//! C ABI over `sepdyn`: Hamiltonian and component-state handles, splitting
//! steps and error reporting.
//!
//! Every function returns an [`SdStatus`]. On failure a message is kept per
//! thread and can be read with [`sd_last_error_message`]. Handles returned
//! through out-pointers are owned by the caller and released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sepdyn::hamiltonian::{correlator_hamiltonian, r_party_eta, random_hermitian, swap_hamiltonian, HermitianOperator};
use sepdyn::propagate::{step, SplittingScheme};
use sepdyn::state::ComponentState;
use sepdyn::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NotHermitian = 4,
    SolverFailed = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Values accepted for the `scheme` argument.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdScheme {
    LieTrotter = 0,
    Strang = 1,
}

/// Opaque Hermitian operator with subsystem dimensions.
pub struct SdOperator(HermitianOperator);

/// Opaque separable state (one ket per subsystem).
pub struct SdState(ComponentState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SdStatus {
    match e {
        Error::Dimension(_) => SdStatus::Dimension,
        Error::NotHermitian { .. } => SdStatus::NotHermitian,
        Error::NewtonFailed { .. } | Error::SingularJacobian | Error::StepSizeUnderflow { .. } => SdStatus::SolverFailed,
        Error::DegenerateContext { .. } => SdStatus::SolverFailed,
        _ => SdStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SdStatus>) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SdStatus::Panic
        }
    }
}

fn fail(e: Error) -> SdStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> SdStatus {
    set_error(&format!("{what} is null"));
    SdStatus::NullPointer
}

fn scheme_of(scheme: u32) -> Result<SplittingScheme, SdStatus> {
    match scheme {
        0 => Ok(SplittingScheme::LieTrotter),
        1 => Ok(SplittingScheme::Strang),
        s => {
            set_error(&format!("unknown scheme {s}"));
            Err(SdStatus::InvalidArgument)
        }
    }
}

unsafe fn put_operator(out: *mut *mut SdOperator, r: sepdyn::Result<HermitianOperator>) -> Result<(), SdStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    let op = r.map_err(fail)?;
    *out = Box::into_raw(Box::new(SdOperator(op)));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminator; 0 if none.
#[no_mangle]
pub extern "C" fn sd_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copy the last error message (NUL-terminated) into `buf`.
///
/// # Safety
/// `buf` must be valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sd_last_error_message(buf: *mut c_char, len: usize) -> SdStatus {
    if buf.is_null() {
        return SdStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[0u8][..], |c| c.as_bytes_with_nul());
        if bytes.len() > len {
            return SdStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        SdStatus::Ok
    })
}

/// Swap operator on two subsystems of dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_swap(d: usize, out: *mut *mut SdOperator) -> SdStatus {
    guard(|| put_operator(out, swap_hamiltonian(d)))
}

/// Seeded random Hermitian operator on `n_qubits` qubits.
///
/// # Safety
/// As for [`sd_operator_swap`].
#[no_mangle]
pub unsafe extern "C" fn sd_operator_random(n_qubits: usize, seed: u64, out: *mut *mut SdOperator) -> SdStatus {
    guard(|| put_operator(out, random_hermitian(n_qubits, seed)))
}

/// Three-qutrit ladder-operator correlator with `r`-party terms.
///
/// # Safety
/// As for [`sd_operator_swap`].
#[no_mangle]
pub unsafe extern "C" fn sd_operator_ladder(r: usize, out: *mut *mut SdOperator) -> SdStatus {
    guard(|| {
        if !(1..=3).contains(&r) {
            set_error(&format!("r must be 1, 2 or 3, got {r}"));
            return Err(SdStatus::InvalidArgument);
        }
        put_operator(out, r_party_eta(r).and_then(|eta| correlator_hamiltonian(&eta)))
    })
}

/// Parse an operator from its JSON form (`dims` plus `entries` as rows of
/// `[re, im]` pairs).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` as for [`sd_operator_swap`].
#[no_mangle]
pub unsafe extern "C" fn sd_operator_from_json(json: *const c_char, out: *mut *mut SdOperator) -> SdStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not valid UTF-8");
            SdStatus::InvalidArgument
        })?;
        put_operator(out, HermitianOperator::from_json(text))
    })
}

/// Total Hilbert-space dimension of the operator.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_dim(op: *const SdOperator, out: *mut usize) -> SdStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = op.0.dim();
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_operator_free(op: *mut SdOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Build a state from stacked amplitudes: `dims[0]` entries for the first
/// subsystem, then `dims[1]`, and so on. Real and imaginary parts are passed
/// in separate arrays of length `sum(dims)`.
///
/// # Safety
/// `dims` must hold `n_parts` values; `re` and `im` must each hold
/// `sum(dims)` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_state_new(
    dims: *const usize,
    n_parts: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut SdState,
) -> SdStatus {
    guard(|| {
        if dims.is_null() || re.is_null() || im.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let dims = std::slice::from_raw_parts(dims, n_parts);
        let total: usize = dims.iter().sum();
        let re = std::slice::from_raw_parts(re, total);
        let im = std::slice::from_raw_parts(im, total);
        let amps: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let state = ComponentState::from_stacked(&amps, dims).map_err(fail)?;
        *out = Box::into_raw(Box::new(SdState(state)));
        Ok(())
    })
}

/// Number of stacked amplitudes, `sum(dims)`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_state_len(state: *const SdState, out: *mut usize) -> SdStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.0.dims().iter().sum();
        Ok(())
    })
}

/// Copy the stacked amplitudes out. `len` must be at least [`sd_state_len`].
///
/// # Safety
/// `re` and `im` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sd_state_amplitudes(state: *const SdState, re: *mut f64, im: *mut f64, len: usize) -> SdStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let v = s.0.stacked();
        if len < v.len() {
            set_error(&format!("buffer holds {len} values, state has {}", v.len()));
            return Err(SdStatus::BufferTooSmall);
        }
        for (k, z) in v.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Norm of the tensor product of the parts.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_state_norm(state: *const SdState, out: *mut f64) -> SdStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.0.norms().iter().product();
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_state_free(state: *mut SdState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Advance `state` in place by `steps` splitting steps of size `dt`.
/// `scheme` is one of the [`SdScheme`] values. On failure the state holds the
/// last successful step.
///
/// # Safety
/// `op` and `state` must be live handles; `state` must not be aliased.
#[no_mangle]
pub unsafe extern "C" fn sd_evolve(op: *const SdOperator, state: *mut SdState, scheme: u32, dt: f64, steps: usize) -> SdStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let st = state.as_mut().ok_or_else(|| null("state"))?;
        let scheme = scheme_of(scheme)?;
        if !(dt.is_finite() && dt > 0.0) {
            set_error(&format!("dt must be positive, got {dt}"));
            return Err(SdStatus::InvalidArgument);
        }
        for _ in 0..steps {
            st.0 = step(scheme, &op.0, &st.0, dt).map_err(fail)?;
        }
        Ok(())
    })
}
