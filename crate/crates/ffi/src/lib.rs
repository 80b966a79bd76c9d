//! C interface to distill-lab.
//!
//! Every entry point returns a [`DlStatus`]. On failure the message for the
//! calling thread is available from [`dl_last_error`] until the next failing
//! call. Matrices and search reports are opaque handles owned by the caller
//! and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distill_lab::distill::q_functional;
use distill_lab::linalg::{min_eigenvalue_hermitian, ComplexMatrix};
use distill_lab::optimize::{minimize_q, witness_tensor, SearchConfig, SearchReport};
use distill_lab::states::{beta_bound, werner_partial_transpose, werner_state, WernerParams};
use distill_lab::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlStatus {
    Ok = 0,
    Shape = 1,
    DimensionLimit = 2,
    Symmetry = 3,
    Argument = 4,
    Precondition = 5,
    Parse = 6,
    Io = 7,
    Json = 8,
    NullPointer = 9,
    Panic = 10,
}

impl From<&Error> for DlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Shape(_) => DlStatus::Shape,
            Error::DimensionLimit(_) => DlStatus::DimensionLimit,
            Error::Symmetry { .. } => DlStatus::Symmetry,
            Error::Argument(_) => DlStatus::Argument,
            Error::Precondition(_) => DlStatus::Precondition,
            Error::Parse(_) => DlStatus::Parse,
            Error::Io(_) => DlStatus::Io,
            Error::Json(_) => DlStatus::Json,
        }
    }
}

/// Opaque complex matrix with tensor-factor dimensions.
pub struct DlMatrix(ComplexMatrix);

/// Opaque result of a rank-two search.
pub struct DlReport(SearchReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    // interior NULs would truncate the C string anyway
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn fail(status: DlStatus, msg: impl Into<String>) -> DlStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), DlStatus>) -> DlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DlStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DlStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: distill_lab::Result<T>) -> Result<T, DlStatus> {
    r.map_err(|e| fail(DlStatus::from(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), DlStatus> {
    if p.is_null() {
        Err(fail(DlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn werner(d: usize, beta: f64) -> Result<WernerParams, DlStatus> {
    lift(WernerParams::new(d, beta))
}

unsafe fn emit_matrix(out: *mut *mut DlMatrix, m: ComplexMatrix) {
    *out = Box::into_raw(Box::new(DlMatrix(m)));
}

/// Message of the most recent failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Universal undistillability threshold for `n` copies.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn dl_beta_bound(n: u32, tol: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(1..=64).contains(&n) {
            return Err(fail(DlStatus::Argument, format!("copy count {n} outside 1..=64")));
        }
        if !(tol > 0.0) {
            return Err(fail(DlStatus::Argument, "tolerance must be positive"));
        }
        *out = beta_bound(n, tol);
        Ok(())
    })
}

/// Werner state `(1 + β·F) / (d² + β·d)` on `d x d`.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_werner_state(d: usize, beta: f64, out: *mut *mut DlMatrix) -> DlStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = werner(d, beta)?;
        emit_matrix(out, werner_state(&p));
        Ok(())
    })
}

/// Partial transpose of the Werner state on its second factor.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_werner_partial_transpose(d: usize, beta: f64, out: *mut *mut DlMatrix) -> DlStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = werner(d, beta)?;
        emit_matrix(out, werner_partial_transpose(&p));
        Ok(())
    })
}

/// Builds a matrix from row-major entries stored as interleaved
/// `(re, im)` pairs, so `data` holds `2 * rows * cols` doubles.
///
/// # Safety
/// `row_dims`, `col_dims` and `data` must point to `n_row`, `n_col` and
/// `data_len` readable elements. `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dl_matrix_new(
    row_dims: *const usize,
    n_row: usize,
    col_dims: *const usize,
    n_col: usize,
    data: *const f64,
    data_len: usize,
    out: *mut *mut DlMatrix,
) -> DlStatus {
    guard(|| {
        non_null(row_dims, "row_dims")?;
        non_null(col_dims, "col_dims")?;
        non_null(data, "data")?;
        non_null(out, "out")?;
        if data_len % 2 != 0 {
            return Err(fail(DlStatus::Shape, "interleaved data has odd length"));
        }
        let rows = std::slice::from_raw_parts(row_dims, n_row).to_vec();
        let cols = std::slice::from_raw_parts(col_dims, n_col).to_vec();
        let entries = std::slice::from_raw_parts(data, data_len)
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        emit_matrix(out, lift(ComplexMatrix::new(rows, cols, entries))?);
        Ok(())
    })
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dl_matrix_rows(m: *const DlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Column count, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dl_matrix_cols(m: *const DlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Reads entry `(i, j)` of the flattened matrix.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dl_matrix_get(m: *const DlMatrix, i: usize, j: usize, re: *mut f64, im: *mut f64) -> DlStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let m = &(*m).0;
        if i >= m.rows() || j >= m.cols() {
            return Err(fail(
                DlStatus::Shape,
                format!("index ({i}, {j}) outside {}x{}", m.rows(), m.cols()),
            ));
        }
        let z = m.entries()[i * m.cols() + j];
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_matrix_free(m: *mut DlMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Subset-sum functional of a square composite matrix.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dl_q_functional(m: *const DlMatrix, beta: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(out, "out")?;
        *out = lift(q_functional(&(*m).0, beta))?;
        Ok(())
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dl_min_eigenvalue(m: *const DlMatrix, out: *mut f64) -> DlStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(out, "out")?;
        *out = lift(min_eigenvalue_hermitian(&(*m).0))?;
        Ok(())
    })
}

/// Two-copy operator with a negative functional for `-1 < β < -1/2`.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_witness_tensor(beta: f64, d: usize, out: *mut *mut DlMatrix) -> DlStatus {
    guard(|| {
        non_null(out, "out")?;
        emit_matrix(out, lift(witness_tensor(beta, d))?);
        Ok(())
    })
}

/// Multi-start search for the minimum of the functional over rank-two
/// operators on `n` copies of `d x d`.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_minimize_q(
    d: usize,
    n: usize,
    beta: f64,
    restarts: usize,
    seed: u64,
    out: *mut *mut DlReport,
) -> DlStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut cfg = SearchConfig::new(d, n, beta);
        cfg.restarts = restarts;
        cfg.seed = seed;
        let report = lift(minimize_q(&cfg))?;
        *out = Box::into_raw(Box::new(DlReport(report)));
        Ok(())
    })
}

/// # Safety
/// `r` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dl_report_best_value(r: *const DlReport, out: *mut f64) -> DlStatus {
    guard(|| {
        non_null(r, "report")?;
        non_null(out, "out")?;
        *out = (*r).0.best_value;
        Ok(())
    })
}

/// Singular-value angle of the best point.
///
/// # Safety
/// `r` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dl_report_best_angle(r: *const DlReport, out: *mut f64) -> DlStatus {
    guard(|| {
        non_null(r, "report")?;
        non_null(out, "out")?;
        *out = (*r).0.best_angle;
        Ok(())
    })
}

/// Serializes the report as JSON. Release the string with [`dl_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dl_report_to_json(r: *const DlReport, out: *mut *mut c_char) -> DlStatus {
    guard(|| {
        non_null(r, "report")?;
        non_null(out, "out")?;
        let text = lift(serde_json::to_string(&(*r).0).map_err(Error::from))?;
        let c = CString::new(text).map_err(|e| fail(DlStatus::Json, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_report_free(r: *mut DlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
