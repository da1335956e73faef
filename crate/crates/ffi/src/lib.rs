//! C ABI over `tsc-core`.
//!
//! Objects cross the boundary as opaque heap handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns a
//! [`TscStatus`]; on failure a human-readable message is available from
//! [`tsc_last_error_message`] on the same thread until the next failing call.
//! Panics are caught at the boundary and reported as `TSC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tsc_core::data::{normalize_rows, read_points_csv};
use tsc_core::metrics::clustering_error;
use tsc_core::nalgebra::DMatrix;
use tsc_core::threshold::tsc_cluster as run_tsc;
use tsc_core::{
    cluster_with_outliers, detect_outliers, outlier_threshold, ClusterResult, DataSet, Seed,
    TscError, TscOptions,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidQ = 3,
    ZeroPoint = 4,
    ConvergenceFailure = 5,
    EmptyAfterRemoval = 6,
    DegenerateErasure = 7,
    LengthMismatch = 8,
    NotOrthonormal = 9,
    ParseError = 10,
    IoError = 11,
    BufferTooSmall = 12,
    Panic = 99,
}

/// Opaque dataset handle.
pub struct TscDataset(DataSet);

/// Opaque clustering result handle.
pub struct TscClusterResult(ClusterResult);

/// Options for [`tsc_cluster`]. Zero in `l_hat` or `max_clusters` selects the
/// library default (eigengap estimate, search up to N/2).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TscClusterOptions {
    pub l_hat: usize,
    pub max_clusters: usize,
    pub seed: u64,
    pub remove_outliers: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &TscError) -> TscStatus {
    match err {
        TscError::ZeroPoint { .. } => TscStatus::ZeroPoint,
        TscError::InvalidQ { .. } => TscStatus::InvalidQ,
        TscError::ConvergenceFailure(_) => TscStatus::ConvergenceFailure,
        TscError::EmptyAfterRemoval(_) => TscStatus::EmptyAfterRemoval,
        TscError::DegenerateErasure(_) => TscStatus::DegenerateErasure,
        TscError::LengthMismatch { .. } => TscStatus::LengthMismatch,
        TscError::NotOrthonormal(_) => TscStatus::NotOrthonormal,
        TscError::InvalidData(_) | TscError::InvalidArgument(_) => TscStatus::InvalidArgument,
        TscError::Parse { .. } => TscStatus::ParseError,
        TscError::Io(_) => TscStatus::IoError,
    }
}

fn fail(status: TscStatus, msg: impl Into<String>) -> TscStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), TscStatus>) -> TscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TscStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TscStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift<T>(r: Result<T, TscError>) -> Result<T, TscStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), TscStatus> {
    if p.is_null() {
        Err(fail(TscStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `n * m` row-major doubles into a new dataset.
///
/// # Safety
/// `points` must reference `n * m` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_dataset_new(
    points: *const f64,
    n: usize,
    m: usize,
    out: *mut *mut TscDataset,
) -> TscStatus {
    guard(|| {
        non_null(points, "points")?;
        non_null(out, "out")?;
        let len = n
            .checked_mul(m)
            .ok_or_else(|| fail(TscStatus::InvalidArgument, "n * m overflows"))?;
        let slice = std::slice::from_raw_parts(points, len);
        let data = lift(DataSet::new(DMatrix::from_row_slice(n, m, slice), None))?;
        *out = Box::into_raw(Box::new(TscDataset(data)));
        Ok(())
    })
}

/// Loads a headerless CSV dataset.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_dataset_from_csv(
    path: *const c_char,
    out: *mut *mut TscDataset,
) -> TscStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(TscStatus::InvalidArgument, "path is not UTF-8"))?;
        let data = lift(read_points_csv(Path::new(path)))?;
        *out = Box::into_raw(Box::new(TscDataset(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsc_dataset_free(data: *mut TscDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_dataset_len(data: *const TscDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_dataset_dim(data: *const TscDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.dim())
}

#[no_mangle]
pub extern "C" fn tsc_cluster_options_default() -> TscClusterOptions {
    TscClusterOptions {
        l_hat: 0,
        max_clusters: 0,
        seed: 0,
        remove_outliers: false,
    }
}

/// Runs thresholding-based subspace clustering with `q` neighbors per point.
///
/// # Safety
/// `data` must be a live handle, `options` null (defaults) or readable, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster(
    data: *const TscDataset,
    q: usize,
    options: *const TscClusterOptions,
    out: *mut *mut TscClusterResult,
) -> TscStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| tsc_cluster_options_default());
        let core_opts = TscOptions {
            l_hat: (opts.l_hat > 0).then_some(opts.l_hat),
            max_clusters: (opts.max_clusters > 0).then_some(opts.max_clusters),
            seed: Seed(opts.seed),
            ..TscOptions::default()
        };
        let data = &(*data).0;
        let result = if opts.remove_outliers {
            lift(cluster_with_outliers(data, q, &core_opts))?
        } else {
            lift(run_tsc(data, q, &core_opts))?
        };
        *out = Box::into_raw(Box::new(TscClusterResult(result)));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster_result_free(result: *mut TscClusterResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of labels (points), or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster_result_len(result: *const TscClusterResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.labels.len())
}

/// Estimated (or pinned) number of clusters, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster_result_l_hat(result: *const TscClusterResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.l_hat)
}

/// Copies the labels (-1 marks a removed outlier) into `labels`, which must
/// hold at least `tsc_cluster_result_len` entries.
///
/// # Safety
/// `result` must be a live handle and `labels` writable for `capacity` ints.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster_result_labels(
    result: *const TscClusterResult,
    labels: *mut i32,
    capacity: usize,
) -> TscStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(labels, "labels")?;
        let src = &(*result).0.labels;
        if capacity < src.len() {
            return Err(fail(
                TscStatus::BufferTooSmall,
                format!("need {} labels, buffer holds {capacity}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), labels, src.len());
        Ok(())
    })
}

/// Copies up to `capacity` of the smallest Laplacian eigenvalues (ascending)
/// and stores the count in `written`.
///
/// # Safety
/// `result` must be a live handle, `values` writable for `capacity` doubles
/// and `written` writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_cluster_result_eigenvalues(
    result: *const TscClusterResult,
    values: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> TscStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(values, "values")?;
        non_null(written, "written")?;
        let ev = &(*result).0.spectrum.eigenvalues;
        let k = capacity.min(ev.len());
        ptr::copy_nonoverlapping(ev.as_ptr(), values, k);
        *written = k;
        Ok(())
    })
}

/// Flags outliers (1) after normalizing the rows, writing one byte per point
/// into `flags` and the threshold into `threshold` (may be null).
///
/// # Safety
/// `data` must be a live handle, `flags` writable for `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn tsc_detect_outliers(
    data: *const TscDataset,
    flags: *mut u8,
    capacity: usize,
    threshold: *mut f64,
) -> TscStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(flags, "flags")?;
        let data = &(*data).0;
        if capacity < data.len() {
            return Err(fail(
                TscStatus::BufferTooSmall,
                format!("need {} flags, buffer holds {capacity}", data.len()),
            ));
        }
        let report = lift(normalize_rows(data).and_then(|d| detect_outliers(&d)))?;
        for (i, &f) in report.flags.iter().enumerate() {
            *flags.add(i) = u8::from(f);
        }
        if !threshold.is_null() {
            *threshold = report.threshold;
        }
        Ok(())
    })
}

/// `sqrt(6 ln n) / sqrt(m)`.
#[no_mangle]
pub extern "C" fn tsc_outlier_threshold(n: usize, m: usize) -> f64 {
    outlier_threshold(n, m)
}

/// Clustering error of `predicted` against `truth` under the best label
/// matching.
///
/// # Safety
/// Both arrays must hold `len` readable ints; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_clustering_error(
    predicted: *const i32,
    truth: *const i32,
    len: usize,
    out: *mut f64,
) -> TscStatus {
    guard(|| {
        non_null(out, "out")?;
        let (p, t): (&[i32], &[i32]) = if len == 0 {
            (&[], &[])
        } else {
            non_null(predicted, "predicted")?;
            non_null(truth, "truth")?;
            (
                std::slice::from_raw_parts(predicted, len),
                std::slice::from_raw_parts(truth, len),
            )
        };
        *out = lift(clustering_error(p, t))?;
        Ok(())
    })
}
