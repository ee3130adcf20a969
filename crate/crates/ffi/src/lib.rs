//! C ABI for the dense-cycle library.
//!
//! Objects are opaque handles created by `*_new` / sampling functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`DcStatus`]; on failure a message is available from [`dc_last_error`]
//! on the same thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dense_cycle::inference::{detect, kappa, local_search};
use dense_cycle::likelihood::{log_likelihood_ratio, pair_second_moment_factor};
use dense_cycle::model::{circ_dist, sample_null, sample_planted};
use dense_cycle::phase::region_label;
use dense_cycle::rng::Streams;
use dense_cycle::{Adjacency, Error, Params};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    SizeMismatch = 4,
    Resource = 5,
    Parse = 6,
    Internal = 7,
}

/// Model parameters.
pub struct DcParams(Params);

/// Symmetric 0/1 adjacency matrix with zero diagonal.
pub struct DcAdjacency(Adjacency);

/// Plain copy of a parameter set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DcParamValues {
    pub n: usize,
    pub tau: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub lambda: f64,
}

/// Scan test outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DcDetection {
    pub l_hat: f64,
    pub kappa: f64,
    pub detected: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DcStatus {
    match e {
        Error::InvalidParams(_) => DcStatus::InvalidParams,
        Error::Domain(_) => DcStatus::Domain,
        Error::SizeMismatch { .. } => DcStatus::SizeMismatch,
        Error::Resource(_) => DcStatus::Resource,
        Error::Parse(_) => DcStatus::Parse,
        _ => DcStatus::Internal,
    }
}

fn fail(status: DcStatus, msg: &str) -> DcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), DcStatus>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DcStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, DcStatus>;
}

impl<T> OrStatus<T> for dense_cycle::Result<T> {
    fn or_status(self) -> Result<T, DcStatus> {
        self.map_err(|e| fail(status_of(&e), &e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, DcStatus> {
    // SAFETY: caller passes a handle from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| fail(DcStatus::NullPointer, &format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), DcStatus> {
    if p.is_null() {
        Err(fail(DcStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Validated parameters `(n, tau, p, q)` with `r = tau p + (1 - tau) q`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dc_params_new(
    n: usize,
    tau: f64,
    p: f64,
    q: f64,
    out: *mut *mut DcParams,
) -> DcStatus {
    guard(|| {
        check_out(out, "out")?;
        let params = Params::new(n, tau, p, q, None).or_status()?;
        // SAFETY: checked non-null above.
        unsafe { *out = boxed(DcParams(params)) };
        Ok(())
    })
}

/// # Safety
/// `params` must come from [`dc_params_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn dc_params_free(params: *mut DcParams) {
    if !params.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dc_params_values(
    params: *const DcParams,
    out: *mut DcParamValues,
) -> DcStatus {
    guard(|| {
        let p = unsafe { deref(params, "params") }?;
        check_out(out, "out")?;
        let v = DcParamValues {
            n: p.0.n(),
            tau: p.0.tau(),
            p: p.0.p(),
            q: p.0.q(),
            r: p.0.r(),
            lambda: p.0.lambda(),
        };
        unsafe { *out = v };
        Ok(())
    })
}

/// Empty graph on `n` vertices.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_new(n: usize, out: *mut *mut DcAdjacency) -> DcStatus {
    guard(|| {
        check_out(out, "out")?;
        if n == 0 {
            return Err(fail(DcStatus::InvalidParams, "n must be positive"));
        }
        unsafe { *out = boxed(DcAdjacency(Adjacency::empty(n))) };
        Ok(())
    })
}

/// # Safety
/// `adj` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_free(adj: *mut DcAdjacency) {
    if !adj.is_null() {
        drop(unsafe { Box::from_raw(adj) });
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `adj` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_n(adj: *const DcAdjacency) -> usize {
    unsafe { adj.as_ref() }.map_or(0, |a| a.0.n())
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `adj` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_edge_count(adj: *const DcAdjacency) -> usize {
    unsafe { adj.as_ref() }.map_or(0, |a| a.0.edge_count())
}

fn check_vertices(a: &Adjacency, i: usize, j: usize) -> Result<(), DcStatus> {
    if i >= a.n() || j >= a.n() {
        return Err(fail(
            DcStatus::Domain,
            &format!("vertex out of range for n = {}", a.n()),
        ));
    }
    Ok(())
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_get(
    adj: *const DcAdjacency,
    i: usize,
    j: usize,
    out: *mut bool,
) -> DcStatus {
    guard(|| {
        let a = unsafe { deref(adj, "adj") }?;
        check_out(out, "out")?;
        check_vertices(&a.0, i, j)?;
        unsafe { *out = a.0.get(i, j) };
        Ok(())
    })
}

/// Sets the symmetric entry `(i, j)`; `i == j` is a domain error.
///
/// # Safety
/// `adj` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_set(
    adj: *mut DcAdjacency,
    i: usize,
    j: usize,
    value: bool,
) -> DcStatus {
    guard(|| {
        let a =
            unsafe { adj.as_mut() }.ok_or_else(|| fail(DcStatus::NullPointer, "adj is null"))?;
        check_vertices(&a.0, i, j)?;
        if i == j {
            return Err(fail(DcStatus::Domain, "diagonal entries are fixed at zero"));
        }
        a.0.set(i, j, value);
        Ok(())
    })
}

/// Serializes to the binary graph format. Writes the required size to
/// `len`; when `buf` is null or `cap` is too small nothing else is written
/// and `Resource` is returned for the short-buffer case.
///
/// # Safety
/// `buf` must have room for `cap` bytes if non-null; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_to_bytes(
    adj: *const DcAdjacency,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> DcStatus {
    guard(|| {
        let a = unsafe { deref(adj, "adj") }?;
        check_out(len, "len")?;
        let bytes = a.0.to_bytes();
        unsafe { *len = bytes.len() };
        if buf.is_null() {
            return Ok(());
        }
        if cap < bytes.len() {
            return Err(fail(
                DcStatus::Resource,
                &format!("buffer needs {} bytes", bytes.len()),
            ));
        }
        unsafe { ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len()) };
        Ok(())
    })
}

/// # Safety
/// `buf` must point to `len` readable bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_adjacency_from_bytes(
    buf: *const u8,
    len: usize,
    out: *mut *mut DcAdjacency,
) -> DcStatus {
    guard(|| {
        check_out(out, "out")?;
        if buf.is_null() {
            return Err(fail(DcStatus::NullPointer, "buf is null"));
        }
        let bytes = unsafe { std::slice::from_raw_parts(buf, len) };
        let a = Adjacency::from_bytes(bytes).or_status()?;
        unsafe { *out = boxed(DcAdjacency(a)) };
        Ok(())
    })
}

/// Draws `(A, X, z)` from the planted model using substream `stream` of
/// `seed`. `out_x` and `out_z` may be null; `out_z` needs room for `n`
/// doubles.
///
/// # Safety
/// Pointers must be valid or null as described.
#[no_mangle]
pub unsafe extern "C" fn dc_sample_planted(
    params: *const DcParams,
    seed: u64,
    stream: u64,
    out_a: *mut *mut DcAdjacency,
    out_x: *mut *mut DcAdjacency,
    out_z: *mut f64,
) -> DcStatus {
    guard(|| {
        let p = unsafe { deref(params, "params") }?;
        check_out(out_a, "out_a")?;
        let s = sample_planted(&p.0, &mut Streams::new(seed).rng(&[stream])).or_status()?;
        if !out_z.is_null() {
            let z = s.z.as_slice();
            unsafe { ptr::copy_nonoverlapping(z.as_ptr(), out_z, z.len()) };
        }
        if !out_x.is_null() {
            unsafe { *out_x = boxed(DcAdjacency(s.x)) };
        }
        unsafe { *out_a = boxed(DcAdjacency(s.a)) };
        Ok(())
    })
}

/// Draws `A` from `G(n, r)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_sample_null(
    params: *const DcParams,
    seed: u64,
    stream: u64,
    out_a: *mut *mut DcAdjacency,
) -> DcStatus {
    guard(|| {
        let p = unsafe { deref(params, "params") }?;
        check_out(out_a, "out_a")?;
        let a = sample_null(&p.0, &mut Streams::new(seed).rng(&[stream]));
        unsafe { *out_a = boxed(DcAdjacency(a)) };
        Ok(())
    })
}

/// Log-likelihood ratio of `A` under cycle `X` against the null.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_log_likelihood_ratio(
    a: *const DcAdjacency,
    x: *const DcAdjacency,
    params: *const DcParams,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let a = unsafe { deref(a, "a") }?;
        let x = unsafe { deref(x, "x") }?;
        let p = unsafe { deref(params, "params") }?;
        check_out(out, "out")?;
        let v = log_likelihood_ratio(&a.0, &x.0, &p.0).or_status()?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Per-pair factor of the second moment of the likelihood ratio.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_pair_second_moment_factor(
    x: bool,
    x_prime: bool,
    params: *const DcParams,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let p = unsafe { deref(params, "params") }?;
        check_out(out, "out")?;
        unsafe { *out = pair_second_moment_factor(x, x_prime, &p.0) };
        Ok(())
    })
}

/// Circular distance between two points of `[0, 1)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_circ_dist(a: f64, b: f64, out: *mut f64) -> DcStatus {
    guard(|| {
        check_out(out, "out")?;
        let d = circ_dist(a, b).or_status()?;
        unsafe { *out = d };
        Ok(())
    })
}

/// Scan test by local search with `restarts` random starts.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_detect(
    a: *const DcAdjacency,
    params: *const DcParams,
    restarts: usize,
    seed: u64,
    out: *mut DcDetection,
) -> DcStatus {
    guard(|| {
        let a = unsafe { deref(a, "a") }?;
        let p = unsafe { deref(params, "params") }?;
        check_out(out, "out")?;
        let res = local_search(
            &a.0,
            &p.0,
            restarts,
            None,
            &mut Streams::new(seed).rng(&[0]),
        )
        .or_status()?;
        let d = DcDetection {
            l_hat: res.l_hat,
            kappa: kappa(&p.0),
            detected: detect(&res, &p.0),
        };
        unsafe { *out = d };
        Ok(())
    })
}

/// Phase-diagram region (`'A'` to `'D'`) for exponents `p = n^-a`,
/// `tau = n^-b`.
#[no_mangle]
pub extern "C" fn dc_region_label(a: f64, b: f64) -> c_char {
    region_label(a, b).letter() as c_char
}
