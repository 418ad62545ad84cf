//! C ABI over `curvhom`.
//!
//! Fields are opaque handles created by [`curvhom_field_new`] or
//! [`curvhom_canonical_field_new`] and released with [`curvhom_field_free`].
//! Every other function returns a [`CurvhomStatus`]; on failure a
//! description is kept per thread and can be read with
//! [`curvhom_last_error_message`]. Points are `2p` doubles (`x` then `y`);
//! tensors are written row-major into caller-provided buffers whose
//! required length is stated on each function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curvhom::field::{canonical_f, parse_field, FieldSpec};
use curvhom::frames::admissible_basis_at;
use curvhom::geometry::{LocalGeometry, Point};
use curvhom::invariant::{alpha_at, alpha_closed_form};
use curvhom::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvhomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    HypothesisViolation = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Opaque field handle.
pub struct CurvhomField {
    spec: FieldSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure {
    status: CurvhomStatus,
    message: String,
}

fn status_of(err: &Error) -> CurvhomStatus {
    match err {
        Error::Syntax { .. } | Error::VariableOutOfRange { .. } => CurvhomStatus::ParseError,
        Error::Domain(_) => CurvhomStatus::DomainError,
        Error::NotPositiveDefinite { .. }
        | Error::Hypothesis(_)
        | Error::DimensionTooSmall(_)
        | Error::ResidualTooLarge(_) => CurvhomStatus::HypothesisViolation,
        Error::DimensionMismatch { .. } | Error::NotSymmetric(_) | Error::InvalidArgument(_) => {
            CurvhomStatus::InvalidArgument
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure { status: status_of(&e), message: e.to_string() }
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CurvhomStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_last_error();
            CurvhomStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("internal panic");
            CurvhomStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure { status: CurvhomStatus::NullPointer, message: format!("{what} is null") }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure { status: CurvhomStatus::InvalidUtf8, message: format!("{what} is not valid UTF-8") })
}

unsafe fn field_ref<'a>(field: *const CurvhomField) -> Result<&'a CurvhomField, Failure> {
    field.as_ref().ok_or_else(|| null("field"))
}

unsafe fn local_at(field: &CurvhomField, point: *const f64) -> Result<LocalGeometry, Failure> {
    if point.is_null() {
        return Err(null("point"));
    }
    let p = field.spec.dim();
    let coords = std::slice::from_raw_parts(point, 2 * p);
    let point = Point::from_coords(coords)?;
    Ok(LocalGeometry::new(&field.spec, &point)?)
}

unsafe fn write_out(out: *mut f64, values: &[f64]) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn store_handle(out: *mut *mut CurvhomField, spec: FieldSpec) {
    *out = Box::into_raw(Box::new(CurvhomField { spec }));
}

/// Parses `expr` as a field in `x1..xp`.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn curvhom_field_new(expr: *const c_char, p: usize, out: *mut *mut CurvhomField) -> CurvhomStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec = parse_field(read_str(expr, "expr")?, p)?;
        store_handle(out, spec);
        Ok(())
    })
}

/// Builds `f = (x1² + … + xp²)/2 + Θ(x1)` from the profile `theta`.
///
/// # Safety
/// `theta` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn curvhom_canonical_field_new(
    theta: *const c_char,
    p: usize,
    out: *mut *mut CurvhomField,
) -> CurvhomStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let theta = parse_field(read_str(theta, "theta")?, 1)?;
        store_handle(out, canonical_f(&theta, p)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn curvhom_field_free(field: *mut CurvhomField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `p` of the field, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvhom_field_dim(field: *const CurvhomField) -> usize {
    field.as_ref().map_or(0, |f| f.spec.dim())
}

/// Metric `g` at `point`; `out` holds `(2p)²` doubles.
///
/// # Safety
/// `point` must hold `2p` doubles and `out` `(2p)²`.
#[no_mangle]
pub unsafe extern "C" fn curvhom_metric(field: *const CurvhomField, point: *const f64, out: *mut f64) -> CurvhomStatus {
    guard(|| {
        let local = local_at(field_ref(field)?, point)?;
        let g = local.metric.matrix().transpose();
        write_out(out, g.as_slice())
    })
}

/// `R_ijkl` on the `x` block; `out` holds `p⁴` doubles.
///
/// # Safety
/// `point` must hold `2p` doubles and `out` `p⁴`.
#[no_mangle]
pub unsafe extern "C" fn curvhom_curvature(field: *const CurvhomField, point: *const f64, out: *mut f64) -> CurvhomStatus {
    guard(|| {
        let local = local_at(field_ref(field)?, point)?;
        write_out(out, local.curvature.as_slice())
    })
}

/// `∇R_ijkl;n` on the `x` block; `out` holds `p⁵` doubles.
///
/// # Safety
/// `point` must hold `2p` doubles and `out` `p⁵`.
#[no_mangle]
pub unsafe extern "C" fn curvhom_nabla_curvature(
    field: *const CurvhomField,
    point: *const f64,
    out: *mut f64,
) -> CurvhomStatus {
    guard(|| {
        let local = local_at(field_ref(field)?, point)?;
        write_out(out, local.nabla.as_slice())
    })
}

/// The invariant `α` at `point`.
///
/// # Safety
/// `point` must hold `2p` doubles and `out` one.
#[no_mangle]
pub unsafe extern "C" fn curvhom_alpha(field: *const CurvhomField, point: *const f64, out: *mut f64) -> CurvhomStatus {
    guard(|| {
        let local = local_at(field_ref(field)?, point)?;
        write_out(out, &[alpha_at(&local)?])
    })
}

/// Closed-form `α` of the canonical family for profile `theta` at `x1`.
///
/// # Safety
/// `theta` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn curvhom_alpha_closed_form(
    theta: *const c_char,
    x1: f64,
    p: usize,
    out: *mut f64,
) -> CurvhomStatus {
    guard(|| {
        let theta = parse_field(read_str(theta, "theta")?, 1)?;
        write_out(out, &[alpha_closed_form(&theta, x1, p)?])
    })
}

/// Admissible basis at `point` as a `2p × 2p` row-major matrix whose
/// columns are `X_1..X_p, Y_1..Y_p` in the coordinate frame.
///
/// # Safety
/// `point` must hold `2p` doubles and `out` `(2p)²`.
#[no_mangle]
pub unsafe extern "C" fn curvhom_admissible_basis(
    field: *const CurvhomField,
    point: *const f64,
    out: *mut f64,
) -> CurvhomStatus {
    guard(|| {
        let local = local_at(field_ref(field)?, point)?;
        let basis = admissible_basis_at(&local)?;
        write_out(out, basis.matrix().transpose().as_slice())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns its full length in
/// bytes, excluding the terminator. Returns 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn curvhom_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn curvhom_status_str(status: CurvhomStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CurvhomStatus::Ok => c"ok",
        CurvhomStatus::NullPointer => c"null pointer",
        CurvhomStatus::InvalidUtf8 => c"invalid UTF-8",
        CurvhomStatus::ParseError => c"parse error",
        CurvhomStatus::DomainError => c"domain error",
        CurvhomStatus::HypothesisViolation => c"hypothesis violation",
        CurvhomStatus::InvalidArgument => c"invalid argument",
        CurvhomStatus::Panic => c"panic",
    };
    s.as_ptr()
}
