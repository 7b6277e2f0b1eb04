//! C ABI for the `hellinger` crate.
//!
//! Matrices cross the boundary as opaque [`HlSpd`] handles created by
//! [`hl_spd_new`] and released with [`hl_spd_free`]. Every fallible function
//! returns an [`HlStatus`]; on failure [`hl_last_error`] describes the cause.
//! Dense data is row-major `dim * dim` arrays of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hellinger::barycentre::{solve, MeanKind, SolverConfig};
use hellinger::bregman::relative_entropy;
use hellinger::distances::{distance, divergence, DistanceKind};
use hellinger::linalg::{HermitianMatrix, SpdMatrix};
use hellinger::means::{arithmetic_mean, geometric_mean_t, log_euclidean_multi, q_half, WeightVector};
use hellinger::Error;

/// Status returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPositiveDefinite = 3,
    DimensionMismatch = 4,
    /// The barycentre solver stopped at `max_iter`; the output holds the last iterate.
    NotConverged = 5,
    NumericalFailure = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlDistanceKind {
    D1 = 1,
    D2 = 2,
    D3 = 3,
    D4 = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlMeanKind {
    Arithmetic = 0,
    /// Two matrices only; uses the `t` argument (`½` gives `A#B`).
    Geometric = 1,
    LogEuclidean = 2,
    QHalf = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlBarycentreKind {
    Wasserstein = 0,
    /// Uses the `t` argument, `0 < t < 1`.
    PowerT = 1,
    LogEuclidType = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HlSolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HlSolverReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub bracket_respected: bool,
    pub final_damping: f64,
    /// Smallest eigenvalue over all iterates.
    pub iterate_min: f64,
    /// Largest eigenvalue over all iterates.
    pub iterate_max: f64,
}

/// Opaque positive definite matrix.
pub struct HlSpd {
    inner: SpdMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure {
    status: HlStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotPositiveDefinite { .. } | Error::NotPositiveSemidefinite { .. } => HlStatus::NotPositiveDefinite,
            Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } | Error::EntryCount { .. } => {
                HlStatus::DimensionMismatch
            }
            Error::EigenNoConvergence { .. }
            | Error::SvdNoConvergence { .. }
            | Error::QuadratureNoConvergence { .. }
            | Error::Singular { .. }
            | Error::SpectralDomain { .. }
            | Error::NegativeRadicand { .. }
            | Error::BracketViolation { .. } => HlStatus::NumericalFailure,
            _ => HlStatus::InvalidArgument,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: HlStatus::NullPointer,
        message: format!("{what} is NULL"),
    }
}

fn guard(f: impl FnOnce() -> Result<HlStatus, Failure>) -> HlStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            HlStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const HlSpd, what: &str) -> Result<&'a SpdMatrix, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

unsafe fn family(mats: *const *const HlSpd, count: usize) -> Result<Vec<SpdMatrix>, Failure> {
    if mats.is_null() {
        return Err(null("mats"));
    }
    slice::from_raw_parts(mats, count)
        .iter()
        .enumerate()
        .map(|(i, &p)| p.as_ref().map(|h| h.inner.clone()).ok_or_else(|| null(&format!("mats[{i}]"))))
        .collect()
}

unsafe fn weights(w: *const f64, count: usize) -> Result<WeightVector, Failure> {
    if w.is_null() {
        Ok(WeightVector::uniform(count)?)
    } else {
        Ok(WeightVector::new(slice::from_raw_parts(w, count).to_vec())?)
    }
}

fn into_handle(m: SpdMatrix) -> *mut HlSpd {
    Box::into_raw(Box::new(HlSpd { inner: m }))
}

fn distance_kind(kind: HlDistanceKind) -> DistanceKind {
    match kind {
        HlDistanceKind::D1 => DistanceKind::D1,
        HlDistanceKind::D2 => DistanceKind::D2,
        HlDistanceKind::D3 => DistanceKind::D3,
        HlDistanceKind::D4 => DistanceKind::D4,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `hl_*` call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hl_solver_config_default() -> HlSolverConfig {
    let d = SolverConfig::default();
    HlSolverConfig {
        tol: d.tol,
        max_iter: d.max_iter,
        damping: d.damping,
    }
}

/// Build a positive definite matrix from row-major parts. `imag` may be NULL
/// for a real symmetric matrix.
///
/// # Safety
/// `real` (and `imag` when not NULL) must point to `dim * dim` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_spd_new(dim: usize, real: *const f64, imag: *const f64, out: *mut *mut HlSpd) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if real.is_null() {
            return Err(null("real"));
        }
        let len = dim.checked_mul(dim).ok_or_else(|| Failure {
            status: HlStatus::InvalidArgument,
            message: format!("dim {dim} overflows"),
        })?;
        let re = slice::from_raw_parts(real, len);
        let im = (!imag.is_null()).then(|| slice::from_raw_parts(imag, len));
        let m = SpdMatrix::new(HermitianMatrix::from_parts(dim, re, im)?)?;
        *out = into_handle(m);
        Ok(HlStatus::Ok)
    })
}

/// Release a handle. NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_spd_free(m: *mut HlSpd) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_spd_dim(m: *const HlSpd) -> usize {
    m.as_ref().map_or(0, |h| h.inner.dim())
}

/// Copy the entries of `m` into row-major buffers. `imag` may be NULL.
///
/// # Safety
/// `m` must be a live handle; `real` (and `imag` when not NULL) must have
/// room for `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_spd_entries(m: *const HlSpd, real: *mut f64, imag: *mut f64) -> HlStatus {
    guard(|| {
        let m = handle(m, "m")?;
        if real.is_null() {
            return Err(null("real"));
        }
        let n = m.dim();
        let mat = m.matrix();
        for i in 0..n {
            for j in 0..n {
                let z = mat[(i, j)];
                *real.add(i * n + j) = z.re;
                if !imag.is_null() {
                    *imag.add(i * n + j) = z.im;
                }
            }
        }
        Ok(HlStatus::Ok)
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_spd_clone(m: *const HlSpd, out: *mut *mut HlSpd) -> HlStatus {
    guard(|| {
        let m = handle(m, "m")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_handle(m.clone());
        Ok(HlStatus::Ok)
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_distance(kind: HlDistanceKind, a: *const HlSpd, b: *const HlSpd, out: *mut f64) -> HlStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = distance(distance_kind(kind), a, b)?;
        Ok(HlStatus::Ok)
    })
}

/// Squared distance `Φ_k(A, B)`.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_divergence(kind: HlDistanceKind, a: *const HlSpd, b: *const HlSpd, out: *mut f64) -> HlStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = divergence(distance_kind(kind), a, b)?;
        Ok(HlStatus::Ok)
    })
}

/// Umegaki relative entropy `tr A(log A - log B)`.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_relative_entropy(a: *const HlSpd, b: *const HlSpd, out: *mut f64) -> HlStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = relative_entropy(a, b)?;
        Ok(HlStatus::Ok)
    })
}

/// Weighted mean of `count` matrices. `weights` may be NULL for uniform
/// weights; they are normalized. `t` is only read for `Geometric`.
///
/// # Safety
/// `mats` must hold `count` live handles, `weights` (when not NULL) `count`
/// doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_mean(
    kind: HlMeanKind,
    mats: *const *const HlSpd,
    count: usize,
    weights: *const f64,
    t: f64,
    out: *mut *mut HlSpd,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family = family(mats, count)?;
        let w = weights_for(weights, count)?;
        let mean = match kind {
            HlMeanKind::Arithmetic => arithmetic_mean(&family, &w)?,
            HlMeanKind::Geometric => match family.as_slice() {
                [a, b] => geometric_mean_t(a, b, t)?,
                _ => {
                    return Err(Failure {
                        status: HlStatus::InvalidArgument,
                        message: format!("geometric mean takes two matrices, got {count}"),
                    })
                }
            },
            HlMeanKind::LogEuclidean => log_euclidean_multi(&family, &w)?,
            HlMeanKind::QHalf => q_half(&family, &w)?,
        };
        *out = into_handle(mean);
        Ok(HlStatus::Ok)
    })
}

unsafe fn weights_for(w: *const f64, count: usize) -> Result<WeightVector, Failure> {
    if count == 0 {
        return Err(Error::NoMatrices.into());
    }
    weights(w, count)
}

/// Barycentre by damped fixed-point iteration from the arithmetic mean.
/// `config` and `report` may be NULL. Returns `NotConverged` with `*out` set
/// to the last iterate when `max_iter` is reached.
///
/// # Safety
/// Pointer requirements as for [`hl_mean`]; `config` and `report`, when not
/// NULL, must point to valid structs.
#[no_mangle]
pub unsafe extern "C" fn hl_barycentre(
    kind: HlBarycentreKind,
    t: f64,
    mats: *const *const HlSpd,
    count: usize,
    weights: *const f64,
    config: *const HlSolverConfig,
    out: *mut *mut HlSpd,
    report: *mut HlSolverReport,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family = family(mats, count)?;
        let w = weights_for(weights, count)?;
        let cfg = config.as_ref().copied().unwrap_or_else(|| hl_solver_config_default());
        let cfg = SolverConfig {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            damping: cfg.damping,
        };
        let mk = match kind {
            HlBarycentreKind::Wasserstein => MeanKind::Wasserstein,
            HlBarycentreKind::PowerT => MeanKind::power(t)?,
            HlBarycentreKind::LogEuclidType => MeanKind::LogEuclidType,
        };
        let (x, r) = solve(mk, &family, &w, &cfg)?;
        if let Some(slot) = report.as_mut() {
            *slot = HlSolverReport {
                iterations: r.iterations,
                final_residual: r.final_residual,
                converged: r.converged,
                bracket_respected: r.bracket_respected,
                final_damping: r.final_damping,
                iterate_min: r.iterate_range.0,
                iterate_max: r.iterate_range.1,
            };
        }
        *out = into_handle(x);
        if r.converged {
            Ok(HlStatus::Ok)
        } else {
            set_last_error(format!(
                "not converged after {} iterations, residual {:e}",
                r.iterations, r.final_residual
            ));
            Ok(HlStatus::NotConverged)
        }
    })
}
