//! C ABI for `santalo-lab`.
//!
//! Every fallible function returns an [`SlStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`sl_last_error_message`]. Bodies and random streams are
//! opaque handles released with their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use santalo_lab::bodies::{make_euclid_ball, make_half_ball, make_lp_ball, Body, HullBodyParams};
use santalo_lab::moments::{hull_centroid_height, minkowski_volume};
use santalo_lab::profile::{polar_centroid_height, separation_report, window_constants, CentroidOptions};
use santalo_lab::santalo::{half_ball_centroid, polar_log_volume, santalo_axis_search, SantaloOptions};
use santalo_lab::specfun::{log_gamma, lp_ball_log_volume, Exponent};
use santalo_lab::stream::RandomStream;
use santalo_lab::volmc::{intersect_volume, Method, VolumeEstimate};
use santalo_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    DimensionMismatch = 3,
    Unsupported = 4,
    Diagnostics = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlMethod {
    MonteCarlo = 0,
    Grid = 1,
    ClosedForm = 2,
    AnalyticBound = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlVolumeEstimate {
    /// Natural log of the volume.
    pub log_value: f64,
    pub std_err_log: f64,
    pub samples: u64,
    pub method: SlMethod,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlWindowConstants {
    pub s0: f64,
    pub s1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlPolarCentroid {
    pub height: f64,
    pub err: f64,
    pub tail_fraction: f64,
    pub ratio_over_polar_chord: f64,
    pub ratio_over_hull_height: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlSantaloResult {
    pub polar_log_volume: f64,
    pub residual: f64,
    pub residual_std_err: f64,
    pub iterations: u64,
}

/// Opaque convex body.
pub struct SlBody(Body);

/// Opaque seeded random stream.
pub struct SlStream(RandomStream);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::Domain(_) => SlStatus::Domain,
        Error::DimensionMismatch { .. } => SlStatus::DimensionMismatch,
        Error::Unsupported(_) => SlStatus::Unsupported,
        Error::Diagnostics(_) => SlStatus::Diagnostics,
    }
}

fn method_of(m: Method) -> SlMethod {
    match m {
        Method::MonteCarlo => SlMethod::MonteCarlo,
        Method::Grid => SlMethod::Grid,
        Method::ClosedForm => SlMethod::ClosedForm,
        Method::AnalyticBound => SlMethod::AnalyticBound,
    }
}

fn estimate(v: VolumeEstimate) -> SlVolumeEstimate {
    SlVolumeEstimate {
        log_value: v.log_value.ln(),
        std_err_log: v.std_err_log,
        samples: v.samples,
        method: method_of(v.method),
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

// Runs `f`, stores its value in `out`, and maps errors and panics to a status.
fn guarded<T, F>(out: *mut T, f: F) -> SlStatus
where
    F: FnOnce() -> Result<T, Fail>,
{
    if out.is_null() {
        set_error("output pointer is null".into());
        return SlStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            SlStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            SlStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SlStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn exponent(p: f64) -> Result<Exponent, Fail> {
    Ok(Exponent::new(p)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sl_stream_new(seed: u64, stream_id: u64) -> *mut SlStream {
    Box::into_raw(Box::new(SlStream(RandomStream::new(seed, stream_id))))
}

/// # Safety
/// `stream` must come from [`sl_stream_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sl_stream_free(stream: *mut SlStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// `B_p^n` scaled by `scale`; pass `p = INFINITY` for the cube.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_body_lp_ball(p: f64, n: usize, scale: f64, out: *mut *mut SlBody) -> SlStatus {
    guarded(out, || {
        let b = make_lp_ball(exponent(p)?, n, scale)?;
        Ok(Box::into_raw(Box::new(SlBody(b))))
    })
}

/// Euclidean ball with centre `center[0..n]`.
///
/// # Safety
/// `center` must point to `n` doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_body_euclid_ball(center: *const f64, n: usize, radius: f64, out: *mut *mut SlBody) -> SlStatus {
    guarded(out, || {
        let c = slice(center, n, "center")?;
        let b = make_euclid_ball(c, radius)?;
        Ok(Box::into_raw(Box::new(SlBody(b))))
    })
}

/// `{x ∈ B_2^n : x_1 ≥ 0}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_body_half_ball(n: usize, out: *mut *mut SlBody) -> SlStatus {
    guarded(out, || Ok(Box::into_raw(Box::new(SlBody(make_half_ball(n)?)))))
}

/// # Safety
/// `body` must come from an `sl_body_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sl_body_free(body: *mut SlBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// Dimension of the body, or 0 for NULL.
///
/// # Safety
/// `body` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_body_dim(body: *const SlBody) -> usize {
    body.as_ref().map_or(0, |b| b.0.dim())
}

fn check_dim(body: &Body, len: usize) -> Result<(), Fail> {
    if len != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: len }.into());
    }
    Ok(())
}

/// Gauge of `y` about the body's anchor point.
///
/// # Safety
/// `body` must be a live handle, `y` must point to `len` doubles and `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_body_gauge(body: *const SlBody, y: *const f64, len: usize, out: *mut f64) -> SlStatus {
    guarded(out, || {
        let b = &deref(body, "body")?.0;
        check_dim(b, len)?;
        Ok(b.gauge(slice(y, len, "y")?))
    })
}

/// Support function `h_K(u)`.
///
/// # Safety
/// As for [`sl_body_gauge`].
#[no_mangle]
pub unsafe extern "C" fn sl_body_support(body: *const SlBody, u: *const f64, len: usize, out: *mut f64) -> SlStatus {
    guarded(out, || {
        let b = &deref(body, "body")?.0;
        check_dim(b, len)?;
        let u = slice(u, len, "u")?;
        b.support(u).ok_or_else(|| Error::Unsupported("body has no support function".into()).into())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_log_gamma(x: f64, out: *mut f64) -> SlStatus {
    guarded(out, || Ok(log_gamma(x)?.ln()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_lp_ball_log_volume(p: f64, n: usize, out: *mut f64) -> SlStatus {
    guarded(out, || Ok(lp_ball_log_volume(exponent(p)?, n)?.ln()))
}

/// `ln vol(B_2^n + t B_∞^n)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_minkowski_log_volume(n: usize, t: f64, out: *mut f64) -> SlStatus {
    guarded(out, || Ok(minkowski_volume(n, t)?.ln()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_hull_centroid_height(n: usize, c: f64, out: *mut f64) -> SlStatus {
    guarded(out, || Ok(hull_centroid_height(n, c)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_window_constants(a: f64, b: f64, out: *mut SlWindowConstants) -> SlStatus {
    guarded(out, || {
        let w = window_constants(a, b)?;
        Ok(SlWindowConstants { s0: w.s0, s1: w.s1 })
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_half_ball_centroid(n: usize, out: *mut f64) -> SlStatus {
    guarded(out, || Ok(half_ball_centroid(n)?))
}

/// `vol(B_p^n ∩ s B_q^n)`.
///
/// # Safety
/// `stream` must be a live handle and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_intersect_volume(
    p: f64,
    q: f64,
    n: usize,
    s: f64,
    samples: usize,
    stream: *const SlStream,
    out: *mut SlVolumeEstimate,
) -> SlStatus {
    guarded(out, || {
        let st = &deref(stream, "stream")?.0;
        Ok(estimate(intersect_volume(exponent(p)?, exponent(q)?, n, s, samples, st)?))
    })
}

/// `vol((K − x)°)`.
///
/// # Safety
/// `body` and `stream` must be live handles, `x` must point to `len`
/// doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_polar_log_volume(
    body: *const SlBody,
    x: *const f64,
    len: usize,
    angular_samples: usize,
    stream: *const SlStream,
    out: *mut SlVolumeEstimate,
) -> SlStatus {
    guarded(out, || {
        let b = &deref(body, "body")?.0;
        let st = &deref(stream, "stream")?.0;
        Ok(estimate(polar_log_volume(b, slice(x, len, "x")?, angular_samples, st)?))
    })
}

/// Centroid height of the polar ball-cube hull and the separation ratios.
///
/// # Safety
/// `stream` must be a live handle and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_polar_centroid_height(
    n: usize,
    a: f64,
    b: f64,
    grid_points: usize,
    samples: usize,
    stream: *const SlStream,
    out: *mut SlPolarCentroid,
) -> SlStatus {
    guarded(out, || {
        let st = &deref(stream, "stream")?.0;
        let params = HullBodyParams::new(n, a, b)?;
        let opts = CentroidOptions { grid_points, samples, ..Default::default() };
        let c = polar_centroid_height(&params, &opts, st, None)?;
        let sep = separation_report(&params, &c)?;
        Ok(SlPolarCentroid {
            height: c.height,
            err: c.err,
            tail_fraction: c.tail_fraction,
            ratio_over_polar_chord: sep.ratio_over_polar_chord,
            ratio_over_hull_height: sep.ratio_over_hull_height,
        })
    })
}

/// Santaló point along the symmetry axis; the point is written to
/// `point[0..len]` with `len` equal to the body dimension.
///
/// # Safety
/// `body` and `stream` must be live handles, `point` must be valid for `len`
/// writes and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_santalo_axis_search(
    body: *const SlBody,
    tolerance: f64,
    samples: usize,
    stream: *const SlStream,
    point: *mut f64,
    len: usize,
    out: *mut SlSantaloResult,
) -> SlStatus {
    guarded(out, || {
        let b = &deref(body, "body")?.0;
        let st = &deref(stream, "stream")?.0;
        check_dim(b, len)?;
        if point.is_null() {
            return Err(Fail::Null("point"));
        }
        let opts = SantaloOptions { tolerance, angular_samples: samples, verify_samples: samples, ..Default::default() };
        let rep = santalo_axis_search(b, &opts, st)?;
        std::slice::from_raw_parts_mut(point, len).copy_from_slice(&rep.point);
        Ok(SlSantaloResult {
            polar_log_volume: rep.polar_log_volume.ln(),
            residual: rep.residual,
            residual_std_err: rep.residual_std_err,
            iterations: rep.iterations as u64,
        })
    })
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `cap`) and returns the full message length, or 0 if there is none.
///
/// # Safety
/// `buf` must be NULL or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn sl_copy_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
