//! C ABI for `phasecore`.
//!
//! Every fallible function returns a [`PcStatus`]. On failure a message is
//! available from [`pc_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use phasecore::bounds::{self, BoundParams, Dims};
use phasecore::estimators::{self, Estimate, IndexSplit, MeasurementEnsemble, SignalSpec};
use phasecore::linalg::{ComplexMatrix, ComplexVector, RngStream};
use phasecore::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Convergence = 4,
    NormMismatch = 5,
    Internal = 6,
    Panic = 7,
}

impl From<&Error> for PcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => PcStatus::Dimension,
            Error::InvalidParameter(_) => PcStatus::InvalidArgument,
            Error::Convergence { .. } => PcStatus::Convergence,
            Error::NormMismatch { .. } => PcStatus::NormMismatch,
            Error::Contract(_) => PcStatus::Internal,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PcStatus, msg: impl Into<String>) -> PcStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), PcStatus>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PcStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> PcStatus {
    let status = PcStatus::from(&e);
    fail(status, e.to_string())
}

fn null(name: &str) -> PcStatus {
    fail(PcStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, PcStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, PcStatus> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], PcStatus> {
    if p.is_null() {
        Err(null(name))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn complex_vec(
    re: *const f64,
    im: *const f64,
    len: usize,
    name: &str,
) -> Result<Vec<Complex64>, PcStatus> {
    let re = slice(re, len, name)?;
    let im = slice(im, len, name)?;
    Ok(re
        .iter()
        .zip(im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect())
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A measurement ensemble: sensing matrix, signal and magnitudes.
pub struct PcEnsemble {
    inner: MeasurementEnsemble,
}

/// An estimate together with the weak set it was computed from, if any.
pub struct PcEstimate {
    inner: Estimate,
    split: Option<IndexSplit>,
}

/// Draw a random ensemble (unit-norm random signal) from `(seed, stream)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pc_ensemble_new_random(
    seed: u64,
    stream: u64,
    n: usize,
    big_n: usize,
    out: *mut *mut PcEnsemble,
) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let e = estimators::make_ensemble(
            &RngStream::new(seed, stream),
            n,
            big_n,
            SignalSpec::RandomUnit,
        )
        .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PcEnsemble { inner: e }));
        Ok(())
    })
}

/// Build an ensemble from a row-major `n x big_n` sensing matrix and a
/// length-`n` signal, each given as separate real and imaginary arrays.
///
/// # Safety
/// `a_re`/`a_im` must point to `n * big_n` doubles, `x_re`/`x_im` to `n`
/// doubles, and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pc_ensemble_from_parts(
    n: usize,
    big_n: usize,
    a_re: *const f64,
    a_im: *const f64,
    x_re: *const f64,
    x_im: *const f64,
    out: *mut *mut PcEnsemble,
) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let len = n
            .checked_mul(big_n)
            .ok_or_else(|| fail(PcStatus::Dimension, "n * big_n overflows"))?;
        let a = complex_vec(a_re, a_im, len, "a")?;
        let x = complex_vec(x_re, x_im, n, "x0")?;
        let a = ComplexMatrix::from_row_major(n, big_n, a).map_err(lib_err)?;
        let x = ComplexVector::new(x).map_err(lib_err)?;
        let e = MeasurementEnsemble::from_parts(a, x).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PcEnsemble { inner: e }));
        Ok(())
    })
}

/// Release an ensemble. Null is ignored.
///
/// # Safety
/// `e` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_ensemble_free(e: *mut PcEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Signal dimension and number of measurements.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_ensemble_dims(
    e: *const PcEnsemble,
    n: *mut usize,
    big_n: *mut usize,
) -> PcStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        *out_ref(n, "n")? = e.inner.n();
        *out_ref(big_n, "big_n")? = e.inner.num_measurements();
        Ok(())
    })
}

/// Copy the measurement magnitudes `b` into `out` (length `big_n`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_ensemble_magnitudes(
    e: *const PcEnsemble,
    out: *mut f64,
    len: usize,
) -> PcStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        let b = e.inner.magnitudes();
        if len != b.len() {
            return Err(fail(
                PcStatus::Dimension,
                format!("buffer holds {len}, need {}", b.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(b);
        Ok(())
    })
}

/// Null-vector estimate from the `i_size` weakest measurements.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_estimate_null(
    e: *const PcEnsemble,
    i_size: usize,
    out: *mut *mut PcEstimate,
) -> PcStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        let out = out_ref(out, "out")?;
        let split = estimators::select_weak(&e.inner, i_size).map_err(lib_err)?;
        let est = estimators::null_vector(&e.inner, &split).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PcEstimate {
            inner: est,
            split: Some(split),
        }));
        Ok(())
    })
}

/// Spectral estimate (top eigenvector of `A diag(b^2) A*`).
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_estimate_spectral(
    e: *const PcEnsemble,
    out: *mut *mut PcEstimate,
) -> PcStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        let out = out_ref(out, "out")?;
        let est = estimators::spectral_vector(&e.inner).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PcEstimate {
            inner: est,
            split: None,
        }));
        Ok(())
    })
}

/// Release an estimate. Null is ignored.
///
/// # Safety
/// `est` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_estimate_free(est: *mut PcEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// Error metrics of an estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PcMetrics {
    pub err_sq: f64,
    pub rel_err: f64,
    pub align_inner: f64,
    pub iterations: usize,
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_estimate_metrics(
    est: *const PcEstimate,
    out: *mut PcMetrics,
) -> PcStatus {
    guard(|| {
        let est = &deref(est, "estimate")?.inner;
        *out_ref(out, "out")? = PcMetrics {
            err_sq: est.err_sq,
            rel_err: est.rel_err,
            align_inner: est.align_inner,
            iterations: est.iterations,
        };
        Ok(())
    })
}

/// Copy the estimated vector (scaled to `||x0||`) into `re` and `im`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_estimate_vector(
    est: *const PcEstimate,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PcStatus {
    guard(|| {
        let x = &deref(est, "estimate")?.inner.x_hat;
        if len != x.len() {
            return Err(fail(
                PcStatus::Dimension,
                format!("buffer holds {len}, need {}", x.len()),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let im = std::slice::from_raw_parts_mut(im, len);
        for (k, z) in x.entries().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Per-instance error certificate of a null-vector estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PcCertificate {
    pub beta: f64,
    pub lhs: f64,
    /// Infinite when degenerate.
    pub rhs: f64,
    pub holds: bool,
    pub degenerate: bool,
}

/// Evaluate the certificate. `est` must come from [`pc_estimate_null`] on
/// the same ensemble.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_certify(
    e: *const PcEnsemble,
    est: *const PcEstimate,
    out: *mut PcCertificate,
) -> PcStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        let est = deref(est, "estimate")?;
        let out = out_ref(out, "out")?;
        let split = est.split.as_ref().ok_or_else(|| {
            fail(
                PcStatus::InvalidArgument,
                "certificates apply to null-vector estimates only",
            )
        })?;
        let c = estimators::certify(&e.inner, split, &est.inner).map_err(lib_err)?;
        *out = PcCertificate {
            beta: c.beta,
            lhs: c.lhs,
            rhs: c.rhs,
            holds: c.holds(),
            degenerate: c.is_degenerate(),
        };
        Ok(())
    })
}

/// Bound inputs. Set `n`, `big_n` and `i_size` all nonzero to evaluate the
/// probability terms; `sigma` and `nu` are then derived from them.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PcBoundParams {
    pub sigma: f64,
    pub nu: f64,
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    pub c: f64,
    pub n: usize,
    pub big_n: usize,
    pub i_size: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PcBoundResult {
    pub err_rhs: f64,
    pub order_term: f64,
    pub count_term: f64,
    pub q_term: f64,
    pub prob_lower: f64,
    pub prob_lower_clamped: f64,
    /// False when dimensions were not given; probability fields are NaN.
    pub has_probability: bool,
    pub small_sigma_warning: bool,
}

/// Evaluate the error bound and, when dimensions are given, its success
/// probability.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bound_evaluate(
    params: *const PcBoundParams,
    out: *mut PcBoundResult,
) -> PcStatus {
    guard(|| {
        let p = *deref(params, "params")?;
        let out = out_ref(out, "out")?;
        let with_dims = p.n != 0 && p.big_n != 0 && p.i_size != 0;
        let bp = if with_dims {
            let dims = Dims {
                n: p.n,
                big_n: p.big_n,
                i_size: p.i_size,
            };
            BoundParams::from_dims(dims, p.eps, p.delta, p.t, p.c)
        } else {
            BoundParams::from_ratios(p.sigma, p.nu, p.eps, p.delta, p.t, p.c)
        }
        .map_err(lib_err)?;
        *out = if with_dims {
            let r = bounds::theorem_prob_lower(&bp).map_err(lib_err)?;
            PcBoundResult {
                err_rhs: r.err_rhs,
                order_term: r.order_term,
                count_term: r.count_term,
                q_term: r.q_term,
                prob_lower: r.prob_lower,
                prob_lower_clamped: r.prob_lower_clamped(),
                has_probability: true,
                small_sigma_warning: r.small_sigma_warning,
            }
        } else {
            PcBoundResult {
                err_rhs: bounds::theorem_error_rhs(&bp).map_err(lib_err)?,
                order_term: f64::NAN,
                count_term: f64::NAN,
                q_term: f64::NAN,
                prob_lower: f64::NAN,
                prob_lower_clamped: f64::NAN,
                has_probability: false,
                small_sigma_warning: bp.small_sigma_warning(),
            }
        };
        Ok(())
    })
}

/// `tau* = -2 ln(1 - sigma)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_tau_star(sigma: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        *out_ref(out, "out")? = bounds::tau_star(sigma).map_err(lib_err)?;
        Ok(())
    })
}

/// `1 - exp(-tau/2)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_chi2_cdf(tau: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        *out_ref(out, "out")? = bounds::chi2_cdf(tau).map_err(lib_err)?;
        Ok(())
    })
}
