//! C ABI over the `gkmeans` library.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every fallible call returns a
//! [`GkmStatus`]; on failure a message is kept per thread and can be read
//! with [`gkm_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gkmeans::metrics::ari;
use gkmeans::{Algorithm, CentroidSet, DataMatrix, Error, InitMethod, OpCounters, Solution, SolverParams};

pub const GKM_ALGORITHM_LLOYD: u32 = 0;
pub const GKM_ALGORITHM_GKMEANS: u32 = 1;
pub const GKM_ALGORITHM_HAMERLY: u32 = 2;

pub const GKM_INIT_RANDOM: u32 = 0;
pub const GKM_INIT_KMEANSPP: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Data = 4,
    DimensionMismatch = 5,
    Degenerate = 6,
    BufferTooSmall = 7,
    Io = 8,
    Panic = 9,
}

/// Solver parameters. Obtain defaults from [`gkm_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GkmParams {
    pub max_iters: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Distance and projection counts of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GkmCounters {
    /// Every full distance evaluation.
    pub dc_total: u64,
    /// Centroid-to-centroid distances (included in `dc_total`).
    pub dc_centroid_pairs: u64,
    /// Own-centroid refreshes (included in `dc_total`).
    pub dc_own_refresh: u64,
    pub projections: u64,
}

/// Row-major `m × d` data matrix.
pub struct GkmDataset(DataMatrix);

/// Result of a clustering run.
pub struct GkmSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: GkmStatus, msg: impl Into<String>) -> GkmStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> GkmStatus {
    let status = match e {
        Error::DimensionMismatch { .. } => GkmStatus::DimensionMismatch,
        Error::Config(_) => GkmStatus::Config,
        Error::Data(_) | Error::Parse { .. } => GkmStatus::Data,
        Error::Degenerate(_) => GkmStatus::Degenerate,
        Error::Io { .. } | Error::Json(_) => GkmStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> GkmStatus) -> GkmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(GkmStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn input<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], GkmStatus> {
    if ptr.is_null() {
        return Err(fail(GkmStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

fn algorithm(code: u32) -> Result<Algorithm, GkmStatus> {
    match code {
        GKM_ALGORITHM_LLOYD => Ok(Algorithm::Lloyd),
        GKM_ALGORITHM_GKMEANS => Ok(Algorithm::Gkmeans),
        GKM_ALGORITHM_HAMERLY => Ok(Algorithm::Hamerly),
        _ => Err(fail(GkmStatus::InvalidArgument, format!("unknown algorithm code {code}"))),
    }
}

fn init_method(code: u32) -> Result<InitMethod, GkmStatus> {
    match code {
        GKM_INIT_RANDOM => Ok(InitMethod::Random),
        GKM_INIT_KMEANSPP => Ok(InitMethod::Kmeanspp),
        _ => Err(fail(GkmStatus::InvalidArgument, format!("unknown init code {code}"))),
    }
}

/// # Safety
/// `p` must be null or point to a valid [`GkmParams`].
unsafe fn params(p: *const GkmParams) -> SolverParams {
    let p = p.as_ref().copied().unwrap_or_else(|| gkm_params_default());
    SolverParams {
        max_iters: p.max_iters,
        epsilon: p.epsilon,
        seed: p.seed,
        ..Default::default()
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

#[no_mangle]
pub extern "C" fn gkm_params_default() -> GkmParams {
    let d = SolverParams::default();
    GkmParams {
        max_iters: d.max_iters,
        epsilon: d.epsilon,
        seed: d.seed,
    }
}

/// Copies `m·d` row-major values into a new dataset.
///
/// # Safety
/// `values` must be valid for `m·d` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn gkm_dataset_new(values: *const f64, m: usize, d: usize, out: *mut *mut GkmDataset) -> GkmStatus {
    guard(|| {
        if out.is_null() {
            return fail(GkmStatus::NullPointer, "out is null");
        }
        let Some(len) = m.checked_mul(d) else {
            return fail(GkmStatus::InvalidArgument, "m·d overflows");
        };
        let vals = tri!(input(values, len, "values"));
        match DataMatrix::from_flat(vals.to_vec(), d) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(GkmDataset(data)));
                GkmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `data` must be null or a handle from [`gkm_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gkm_dataset_free(data: *mut GkmDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_dataset_rows(data: *const GkmDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.m())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_dataset_cols(data: *const GkmDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.d())
}

unsafe fn finish(result: gkmeans::Result<Solution>, out: *mut *mut GkmSolution) -> GkmStatus {
    match result {
        Ok(sol) => {
            *out = Box::into_raw(Box::new(GkmSolution(sol)));
            GkmStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

/// Seeds `k` centroids with `init` (`GKM_INIT_*`) from `params->seed` and
/// clusters with `algorithm` (`GKM_ALGORITHM_*`). `params` may be null for
/// defaults.
///
/// # Safety
/// `data` must be a live dataset handle, `params` null or valid, `out`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gkm_run(
    data: *const GkmDataset,
    k: usize,
    algorithm_code: u32,
    init_code: u32,
    params_ptr: *const GkmParams,
    out: *mut *mut GkmSolution,
) -> GkmStatus {
    guard(|| {
        let Some(data) = data.as_ref() else {
            return fail(GkmStatus::NullPointer, "data is null");
        };
        if out.is_null() {
            return fail(GkmStatus::NullPointer, "out is null");
        }
        let alg = tri!(algorithm(algorithm_code));
        let init = tri!(init_method(init_code));
        let params = params(params_ptr);
        let centroids = match init.init(&data.0, k, params.seed, &mut OpCounters::new()) {
            Ok(c) => c,
            Err(e) => return from_error(&e),
        };
        finish(alg.run(&data.0, &centroids, &params), out)
    })
}

/// Clusters from caller-supplied initial centroids (`k × d`, row-major).
///
/// # Safety
/// `data` must be a live dataset handle, `centroids` valid for `k·d` reads,
/// `params` null or valid, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gkm_run_from_centroids(
    data: *const GkmDataset,
    centroids: *const f64,
    k: usize,
    algorithm_code: u32,
    params_ptr: *const GkmParams,
    out: *mut *mut GkmSolution,
) -> GkmStatus {
    guard(|| {
        let Some(data) = data.as_ref() else {
            return fail(GkmStatus::NullPointer, "data is null");
        };
        if out.is_null() {
            return fail(GkmStatus::NullPointer, "out is null");
        }
        let alg = tri!(algorithm(algorithm_code));
        let Some(len) = k.checked_mul(data.0.d()) else {
            return fail(GkmStatus::InvalidArgument, "k·d overflows");
        };
        let init = tri!(input(centroids, len, "centroids"));
        let init = match CentroidSet::from_flat(init.to_vec(), data.0.d()) {
            Ok(c) => c,
            Err(e) => return from_error(&e),
        };
        finish(alg.run(&data.0, &init, &params(params_ptr)), out)
    })
}

/// # Safety
/// `sol` must be null or a handle from a run function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_free(sol: *mut GkmSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_iterations(sol: *const GkmSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.iterations)
}

/// Final SSE, or NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_sse(sol: *const GkmSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.sse)
}

/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_converged(sol: *const GkmSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.0.converged)
}

/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_k(sol: *const GkmSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.centroids.k())
}

/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_len(sol: *const GkmSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.assign.len())
}

/// # Safety
/// `sol` must be a live solution handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_counters(sol: *const GkmSolution, out: *mut GkmCounters) -> GkmStatus {
    guard(|| {
        let (Some(sol), false) = (sol.as_ref(), out.is_null()) else {
            return fail(GkmStatus::NullPointer, "null argument");
        };
        let c = sol.0.counters;
        *out = GkmCounters {
            dc_total: c.dc_full,
            dc_centroid_pairs: c.dc_neighbor,
            dc_own_refresh: c.dc_le,
            projections: c.proj_count,
        };
        GkmStatus::Ok
    })
}

/// Copies the `m` cluster indices into `out` (capacity `len`).
///
/// # Safety
/// `sol` must be a live solution handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_copy_assign(sol: *const GkmSolution, out: *mut usize, len: usize) -> GkmStatus {
    guard(|| {
        let (Some(sol), false) = (sol.as_ref(), out.is_null()) else {
            return fail(GkmStatus::NullPointer, "null argument");
        };
        let src = &sol.0.assign;
        if len < src.len() {
            return fail(GkmStatus::BufferTooSmall, format!("need {} slots, got {len}", src.len()));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        GkmStatus::Ok
    })
}

/// Copies the `k·d` final centroid coordinates into `out` (capacity `len`).
///
/// # Safety
/// `sol` must be a live solution handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gkm_solution_copy_centroids(sol: *const GkmSolution, out: *mut f64, len: usize) -> GkmStatus {
    guard(|| {
        let (Some(sol), false) = (sol.as_ref(), out.is_null()) else {
            return fail(GkmStatus::NullPointer, "null argument");
        };
        let src = sol.0.centroids.as_flat();
        if len < src.len() {
            return fail(GkmStatus::BufferTooSmall, format!("need {} slots, got {len}", src.len()));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        GkmStatus::Ok
    })
}

/// Adjusted Rand index of two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn gkm_ari(a: *const usize, b: *const usize, n: usize, out: *mut f64) -> GkmStatus {
    guard(|| {
        if out.is_null() {
            return fail(GkmStatus::NullPointer, "out is null");
        }
        let a = tri!(input(a, n, "a"));
        let b = tri!(input(b, n, "b"));
        match ari(a, b) {
            Ok(v) => {
                *out = v;
                GkmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to fit, into `buf`. Returns the full message length without
/// the terminator; 0 when there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gkm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gkm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
