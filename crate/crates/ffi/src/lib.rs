//! C ABI for the picod library.
//!
//! Instances and codes are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`PicodStatus`]; on failure the
//! message is available from [`picod_last_error`] on the same thread.
//! Strings handed out by the library are released with [`picod_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use picod::construct::{synthesize, ConstructOptions};
use picod::gf::FieldSpec;
use picod::model::{DecentralizedCode, ProblemInstance, RationalLength};
use picod::theorems::optimal_length;
use picod::verify::validate;
use picod::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PicodStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    Domain = 3,
    Construction = 4,
    SearchTooLarge = 5,
    Parse = 6,
    Panic = 7,
}

/// Opaque problem instance.
pub struct PicodInstance(ProblemInstance);

/// Opaque decentralized code.
pub struct PicodCode(DecentralizedCode);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nuls replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn status_of(err: &Error) -> PicodStatus {
    match err {
        Error::Usage(_) | Error::FieldMismatch { .. } | Error::Io(_) => PicodStatus::Usage,
        Error::Domain(_) => PicodStatus::Domain,
        Error::Construction { .. } => PicodStatus::Construction,
        Error::SearchTooLarge { .. } => PicodStatus::SearchTooLarge,
        Error::Json(_) => PicodStatus::Parse,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), PicodStatus>) -> PicodStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PicodStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            PicodStatus::Panic
        }
    }
}

fn fail(err: Error) -> PicodStatus {
    set_last_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> PicodStatus {
    set_last_error(format!("{what} is null"));
    PicodStatus::NullPointer
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn write_ratio(r: RationalLength, num: *mut u64, den: *mut u64) {
    *num = r.num();
    *den = r.den();
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn picod_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Instance with `len` side-information sizes read from `sizes`.
///
/// # Safety
/// `sizes` must point to `len` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn picod_instance_new(
    m: usize,
    t: usize,
    sizes: *const usize,
    len: usize,
    out: *mut *mut PicodInstance,
) -> PicodStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if sizes.is_null() && len > 0 {
            return Err(null("sizes"));
        }
        let list = if len == 0 { &[][..] } else { std::slice::from_raw_parts(sizes, len) };
        let inst = ProblemInstance::new(m, t, list.iter().copied()).map_err(fail)?;
        write_out(out, PicodInstance(inst));
        Ok(())
    })
}

/// Instance with S = [smin..smax].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn picod_instance_consecutive(
    m: usize,
    t: usize,
    smin: usize,
    smax: usize,
    out: *mut *mut PicodInstance,
) -> PicodStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = ProblemInstance::consecutive(m, t, smin, smax).map_err(fail)?;
        write_out(out, PicodInstance(inst));
        Ok(())
    })
}

/// Instance with S = [0..m-t] minus [smin..smax].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn picod_instance_complement(
    m: usize,
    t: usize,
    smin: usize,
    smax: usize,
    out: *mut *mut PicodInstance,
) -> PicodStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = ProblemInstance::complement(m, t, smin, smax).map_err(fail)?;
        write_out(out, PicodInstance(inst));
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn picod_instance_free(instance: *mut PicodInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Closed-form optimal length as num/den in lowest terms.
///
/// # Safety
/// `instance` must be a live handle; `num` and `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn picod_optimal_length(
    instance: *const PicodInstance,
    num: *mut u64,
    den: *mut u64,
) -> PicodStatus {
    guard(|| {
        if instance.is_null() || num.is_null() || den.is_null() {
            return Err(null("argument"));
        }
        let bound = optimal_length(&(*instance).0).map_err(fail)?;
        write_ratio(bound.value, num, den);
        Ok(())
    })
}

/// Builds a code. `field_bits` 0 picks the default field.
///
/// # Safety
/// `instance` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn picod_synthesize(
    instance: *const PicodInstance,
    field_bits: u32,
    seed: u64,
    out: *mut *mut PicodCode,
) -> PicodStatus {
    guard(|| {
        if instance.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let field = match field_bits {
            0 => None,
            b => Some(FieldSpec::with_default_poly(b).map_err(fail)?),
        };
        let options = ConstructOptions { field, seed, ..Default::default() };
        let code = synthesize(&(*instance).0, &options).map_err(fail)?;
        write_out(out, PicodCode(code));
        Ok(())
    })
}

/// # Safety
/// `code` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn picod_code_free(code: *mut PicodCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Normalized length as num/den.
///
/// # Safety
/// `code` must be a live handle; `num` and `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn picod_code_length(code: *const PicodCode, num: *mut u64, den: *mut u64) -> PicodStatus {
    guard(|| {
        if code.is_null() || num.is_null() || den.is_null() {
            return Err(null("argument"));
        }
        write_ratio((*code).0.length(), num, den);
        Ok(())
    })
}

/// JSON document for the code; release with [`picod_string_free`].
///
/// # Safety
/// `code` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn picod_code_to_json(code: *const PicodCode, out: *mut *mut c_char) -> PicodStatus {
    guard(|| {
        if code.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = (*code).0.to_json().map_err(fail)?;
        *out = CString::new(text).expect("json has no nul bytes").into_raw();
        Ok(())
    })
}

/// Parses a code document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn picod_code_from_json(json: *const c_char, out: *mut *mut PicodCode) -> PicodStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_last_error(format!("input is not UTF-8: {e}"));
            PicodStatus::Parse
        })?;
        let code = DecentralizedCode::from_json(text).map_err(fail)?;
        write_out(out, PicodCode(code));
        Ok(())
    })
}

/// Checks encoding constraints and decoding for every user.
///
/// # Safety
/// `code` must be a live handle and `out_valid` writable.
#[no_mangle]
pub unsafe extern "C" fn picod_verify(code: *const PicodCode, out_valid: *mut bool) -> PicodStatus {
    guard(|| {
        if code.is_null() || out_valid.is_null() {
            return Err(null("argument"));
        }
        *out_valid = validate(&(*code).0).valid;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn picod_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
