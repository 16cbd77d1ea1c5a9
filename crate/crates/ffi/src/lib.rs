//! C interface.
//!
//! Objects are opaque handles created by `urt_*_new`/`urt_*_from_*` and
//! released by the matching `urt_*_free`. Every fallible call returns a
//! [`UrtStatus`]; on failure `urt_last_error` describes the cause for the
//! calling thread. Strings returned through out-parameters are owned by the
//! caller and released with `urt_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use urtlab::cli::fixture;
use urtlab::embed::{rho_sampler, RhoPrimeSampler};
use urtlab::format::{from_text, to_text};
use urtlab::hyperbolic::{hyperbolic_distance, HPoint};
use urtlab::stats::involution_test;
use urtlab::{canonical_code, RootedNetwork, SeedStream, SharedSampler, UrtError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UrtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Truncation = 3,
    ContractViolation = 4,
    Degenerate = 5,
    Precision = 6,
    Retry = 7,
    Io = 8,
    Panic = 9,
}

/// A random rooted network law.
pub struct UrtSampler {
    inner: SharedSampler,
}

/// A finite rooted network.
pub struct UrtNetwork {
    inner: RootedNetwork,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &UrtError) -> UrtStatus {
    match e {
        UrtError::Domain(_) | UrtError::Mark(_) | UrtError::Parse { .. } => UrtStatus::InvalidArgument,
        UrtError::Truncation { .. } => UrtStatus::Truncation,
        UrtError::ContractViolation(_) => UrtStatus::ContractViolation,
        UrtError::Degenerate(_) => UrtStatus::Degenerate,
        UrtError::Precision(_) => UrtStatus::Precision,
        UrtError::Retry(_) => UrtStatus::Retry,
        UrtError::Io(_) => UrtStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), UrtStatus>>(f: F) -> UrtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UrtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            UrtStatus::Panic
        }
    }
}

fn fail(e: UrtError) -> UrtStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> UrtStatus {
    set_error(format!("{what} is null"));
    UrtStatus::NullPointer
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, UrtStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        UrtStatus::InvalidArgument
    })
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), UrtStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("string contains a nul byte".into());
        UrtStatus::InvalidArgument
    })?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message describing the last failure on this thread, or NULL. The caller
/// owns the returned string.
#[no_mangle]
pub extern "C" fn urt_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn urt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a sampler for a named fixture (for example `canopy`, `line`,
/// `regular:3`, `chain_cover:1,1,1,1`, `star:10`). When `d > 0` the law is
/// replaced by its direction-marked embedding in the `d`-regular tree.
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_sampler_new(name: *const c_char, d: usize, out: *mut *mut UrtSampler) -> UrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = read_str(name, "name")?;
        let mut inner = fixture(name).map_err(fail)?;
        if d > 0 {
            inner = Arc::new(RhoPrimeSampler::new(rho_sampler(inner, d).map_err(fail)?));
        }
        *out = Box::into_raw(Box::new(UrtSampler { inner }));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from `urt_sampler_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn urt_sampler_free(s: *mut UrtSampler) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Draws the ball of radius `radius`. The draw is a function of
/// `(seed, index)` only.
///
/// # Safety
/// `s` must be a live sampler handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_sampler_sample(
    s: *const UrtSampler,
    radius: u32,
    seed: u64,
    index: u64,
    out: *mut *mut UrtNetwork,
) -> UrtStatus {
    guard(|| {
        if s.is_null() {
            return Err(null("sampler"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let mut rng = SeedStream::new(seed, "ffi/sample").rng(index);
        let inner = (*s).inner.sample(radius, &mut rng).map_err(fail)?;
        *out = Box::into_raw(Box::new(UrtNetwork { inner }));
        Ok(())
    })
}

/// Involution test at depth `depth` with `n` draws. Writes the TV statistic,
/// the calibrated threshold and 1 (pass) or 0 (fail).
///
/// # Safety
/// `s` must be a live sampler handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn urt_involution_test(
    s: *const UrtSampler,
    depth: u32,
    quantization: f64,
    n: usize,
    seed: u64,
    statistic: *mut f64,
    threshold: *mut f64,
    passed: *mut i32,
) -> UrtStatus {
    guard(|| {
        if s.is_null() || statistic.is_null() || threshold.is_null() || passed.is_null() {
            return Err(null("argument"));
        }
        let rep =
            involution_test(&*(*s).inner, depth, quantization, n, SeedStream::new(seed, "involution")).map_err(fail)?;
        *statistic = rep.statistic;
        *threshold = rep.threshold;
        *passed = i32::from(rep.passed());
        Ok(())
    })
}

/// Parses a single network in the edge-list text format.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_network_from_text(text: *const c_char, out: *mut *mut UrtNetwork) -> UrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = from_text(read_str(text, "text")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(UrtNetwork { inner }));
        Ok(())
    })
}

/// # Safety
/// `g` must be a live network handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_network_to_text(g: *const UrtNetwork, out: *mut *mut c_char) -> UrtStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        out_string(to_text(&(*g).inner), out)
    })
}

/// # Safety
/// `g` must be NULL or a network handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn urt_network_free(g: *mut UrtNetwork) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn urt_network_vertex_count(g: *const UrtNetwork) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Number of edges, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live network handle.
#[no_mangle]
pub unsafe extern "C" fn urt_network_edge_count(g: *const UrtNetwork) -> usize {
    g.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// # Safety
/// `g` must be a live network handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_network_root(g: *const UrtNetwork, out: *mut usize) -> UrtStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        *out = (*g).inner.root();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live network handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_network_degree(g: *const UrtNetwork, v: usize, out: *mut usize) -> UrtStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let g = &(*g).inner;
        if v >= g.vertex_count() {
            return Err(fail(UrtError::Domain(format!("vertex {v} out of range"))));
        }
        *out = g.degree(v);
        Ok(())
    })
}

/// Hex canonical code of the depth-`depth` ball around the root.
///
/// # Safety
/// `g` must be a live network handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_network_canonical_code(
    g: *const UrtNetwork,
    depth: u32,
    quantization: f64,
    out: *mut *mut c_char,
) -> UrtStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let c = canonical_code(&(*g).inner, depth, quantization).map_err(fail)?;
        out_string(c.to_hex(), out)
    })
}

/// Distance between `(x1, y1)` and `(x2, y2)` in the upper half-plane.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn urt_hyperbolic_distance(x1: f64, y1: f64, x2: f64, y2: f64, out: *mut f64) -> UrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = HPoint::new(x1, y1).map_err(fail)?;
        let b = HPoint::new(x2, y2).map_err(fail)?;
        *out = hyperbolic_distance(a, b);
        Ok(())
    })
}
