//! C ABI over the `quantumness` crate.
//!
//! Every function returns a [`QnStatus`]; results come back through out
//! pointers. Models and spectra are opaque heap handles owned by the caller
//! and released with the matching `_free`. After a non-`Ok` status,
//! `qn_last_error_message` describes the failure (per thread).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use quantumness::analysis::{delta_qc, Route};
use quantumness::thermo::classical::{fc_closed, fc_quadrature, QuadratureSpec};
use quantumness::thermo::quantum::{fq_closed, fq_numeric, quantum_spectrum, NumericOptions};
use quantumness::{Error, ModelParams, Spectrum};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ModelMismatch = 3,
    Critical = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnTreatment {
    Quantum = 0,
    Classical = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnMethod {
    Numeric = 0,
    Closed = 1,
}

/// Opaque model handle.
pub struct QnModel {
    params: ModelParams,
}

/// Opaque spectrum handle.
pub struct QnSpectrum {
    spectrum: Spectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QnStatus {
    match e {
        Error::InvalidParams(_) | Error::EmptySpectrum => QnStatus::InvalidArgument,
        Error::ModelMismatch(_) => QnStatus::ModelMismatch,
        Error::Critical(_) => QnStatus::Critical,
        Error::Io(_) => QnStatus::Io,
        _ => QnStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), QnFail>>(f: F) -> QnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QnStatus::Ok
        }
        Ok(Err(QnFail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            QnStatus::NullPointer
        }
        Ok(Err(QnFail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QnStatus::Panic
        }
    }
}

enum QnFail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for QnFail {
    fn from(e: Error) -> Self {
        QnFail::Lib(e)
    }
}

fn write_out<T>(ptr: *mut T, value: T, what: &'static str) -> Result<(), QnFail> {
    if ptr.is_null() {
        return Err(QnFail::Null(what));
    }
    // SAFETY: non-null and, per the API contract, valid for writes
    unsafe { ptr.write(value) };
    Ok(())
}

fn model_ref<'a>(m: *const QnModel) -> Result<&'a QnModel, QnFail> {
    // SAFETY: handles come from qn_model_new / qn_model_from_dimensionless
    unsafe { m.as_ref() }.ok_or(QnFail::Null("model"))
}

/// Creates a model from physical parameters.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qn_model_new(
    omega: f64,
    big_omega: f64,
    g1: f64,
    g2: f64,
    hbar: f64,
    beta: f64,
    out: *mut *mut QnModel,
) -> QnStatus {
    guard(|| {
        if out.is_null() {
            return Err(QnFail::Null("out"));
        }
        let params = ModelParams::new(omega, big_omega, g1, g2, hbar, beta)?;
        write_out(out, Box::into_raw(Box::new(QnModel { params })), "out")
    })
}

/// Creates a model from x = Ω/ω, q = (g1+g2)/gc and η = g1/(g1+g2).
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qn_model_from_dimensionless(
    x: f64,
    q: f64,
    eta: f64,
    gc: f64,
    beta: f64,
    hbar: f64,
    out: *mut *mut QnModel,
) -> QnStatus {
    guard(|| {
        if out.is_null() {
            return Err(QnFail::Null("out"));
        }
        let params = ModelParams::from_dimensionless(x, q, eta, gc, beta, hbar)?;
        write_out(out, Box::into_raw(Box::new(QnModel { params })), "out")
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a live handle from a model constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qn_model_free(model: *mut QnModel) {
    if !model.is_null() {
        // SAFETY: the pointer came from Box::into_raw in a constructor
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Free energy of one treatment. `eps` is the tail tolerance of the
/// numeric route and is ignored by the closed forms.
///
/// # Safety
/// `model` must be null or a live model handle; each output pointer must be
/// null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qn_free_energy(
    model: *const QnModel,
    beta: f64,
    treatment: QnTreatment,
    method: QnMethod,
    eps: f64,
    out_value: *mut f64,
    out_err: *mut f64,
) -> QnStatus {
    guard(|| {
        let p = model_ref(model)?.params;
        let f = match (treatment, method) {
            (QnTreatment::Quantum, QnMethod::Numeric) => fq_numeric(&p, beta, eps)?,
            (QnTreatment::Classical, QnMethod::Numeric) => {
                fc_quadrature(&p, beta, &QuadratureSpec { rel_tol: eps.clamp(1e-13, 0.5), ..Default::default() })?
            }
            (QnTreatment::Quantum, QnMethod::Closed) => {
                let d = p.derive()?;
                fq_closed(p.kind(), d.phase, d.x, d.q, beta, d.gc, p.hbar)?
            }
            (QnTreatment::Classical, QnMethod::Closed) => {
                let d = p.derive()?;
                fc_closed(d.phase, d.x, d.q, beta, d.gc, p.hbar)?
            }
        };
        write_out(out_value, f.value, "out_value")?;
        if !out_err.is_null() {
            write_out(out_err, f.err_estimate, "out_err")?;
        }
        Ok(())
    })
}

/// ΔQC = F_Q − F_C. `out_err` may be null.
///
/// # Safety
/// `model` must be null or a live model handle; each output pointer must be
/// null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn qn_delta_qc(
    model: *const QnModel,
    beta: f64,
    method: QnMethod,
    eps: f64,
    out_value: *mut f64,
    out_err: *mut f64,
) -> QnStatus {
    guard(|| {
        let p = model_ref(model)?.params;
        let route = match method {
            QnMethod::Numeric => Route::Numeric,
            QnMethod::Closed => Route::ClosedForm,
        };
        let v = delta_qc(&p, beta, route, eps)?;
        write_out(out_value, v.value, "out_value")?;
        if !out_err.is_null() {
            write_out(out_err, v.err, "out_err")?;
        }
        Ok(())
    })
}

/// The quantum spectrum summed by the numeric free energy, truncated so
/// that the Boltzmann tail at `beta` is below `eps`.
///
/// # Safety
/// `model` must be null or a live model handle; `out` must be null or valid
/// for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qn_spectrum_new(model: *const QnModel, beta: f64, eps: f64, out: *mut *mut QnSpectrum) -> QnStatus {
    guard(|| {
        if out.is_null() {
            return Err(QnFail::Null("out"));
        }
        let p = model_ref(model)?.params;
        let spectrum = quantum_spectrum(&p, beta, eps, &NumericOptions::default())?;
        write_out(out, Box::into_raw(Box::new(QnSpectrum { spectrum })), "out")
    })
}

/// Number of levels; 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle from `qn_spectrum_new`.
#[no_mangle]
pub unsafe extern "C" fn qn_spectrum_len(spectrum: *const QnSpectrum) -> usize {
    // SAFETY: handle from qn_spectrum_new or null
    unsafe { spectrum.as_ref() }.map_or(0, |s| s.spectrum.levels.len())
}

/// Copies the ascending levels into `buf`, which must hold `len` values;
/// `len` must equal `qn_spectrum_len`.
///
/// # Safety
/// `spectrum` must be null or a live spectrum handle; `buf` must be null or
/// valid for writing `len` values.
#[no_mangle]
pub unsafe extern "C" fn qn_spectrum_copy(spectrum: *const QnSpectrum, buf: *mut f64, len: usize) -> QnStatus {
    guard(|| {
        // SAFETY: handle from qn_spectrum_new or null
        let s = unsafe { spectrum.as_ref() }.ok_or(QnFail::Null("spectrum"))?;
        if buf.is_null() {
            return Err(QnFail::Null("buf"));
        }
        let levels = &s.spectrum.levels;
        if len != levels.len() {
            return Err(Error::InvalidParams(format!("buffer holds {len} values, spectrum has {}", levels.len())).into());
        }
        // SAFETY: caller guarantees buf is valid for len writes
        unsafe { std::ptr::copy_nonoverlapping(levels.as_ptr(), buf, len) };
        Ok(())
    })
}

/// Releases a spectrum. Null is ignored.
///
/// # Safety
/// `spectrum` must be null or a live handle from `qn_spectrum_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qn_spectrum_free(spectrum: *mut QnSpectrum) {
    if !spectrum.is_null() {
        // SAFETY: the pointer came from Box::into_raw in qn_spectrum_new
        drop(unsafe { Box::from_raw(spectrum) });
    }
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
