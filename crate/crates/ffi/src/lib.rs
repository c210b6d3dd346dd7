//! C ABI over `gcm-peres`.
//!
//! Every function returns a [`GcmStatus`]; results go through out-pointers.
//! On failure the message is available from [`gcm_last_error_message`] on the
//! same thread. Solutions are opaque handles released with [`gcm_solution_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gcm_peres::classical::{freg, IntegratorSettings, SaliSettings};
use gcm_peres::spectra::{self, EigenSolution, Quantization};
use gcm_peres::{model, GcmError, ModelParams, Operator};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Panic = 4,
}

/// `V = Aβ² + Bβ³cos3γ + Cβ⁴`, mass `K` and `ħ`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcmParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl From<GcmParams> for ModelParams {
    fn from(p: GcmParams) -> Self {
        ModelParams { a: p.a, b: p.b, c: p.c, hbar: p.hbar, mass: p.mass }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcmQuantization {
    TwoDEven = 0,
    TwoDOdd = 1,
    FiveD = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcmOperator {
    L2 = 0,
    HPrime = 1,
    H0 = 2,
    H = 3,
}

/// Harmonic expansion around the global minimum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GcmWell {
    pub beta0: f64,
    pub gamma0: f64,
    pub v0: f64,
    pub k_beta: f64,
    pub k_gamma: f64,
}

/// Opaque diagonalization result.
pub struct GcmSolution {
    inner: EigenSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Invalid(String),
    Null(&'static str),
    Numerical(GcmError),
}

impl From<GcmError> for Failure {
    fn from(e: GcmError) -> Self {
        match e {
            GcmError::InvalidParameter(m) => Failure::Invalid(m),
            other => Failure::Numerical(other),
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GcmStatus::Ok
        }
        Ok(Err(Failure::Invalid(m))) => {
            set_error(format!("invalid argument: {m}"));
            GcmStatus::InvalidArgument
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GcmStatus::NullPointer
        }
        Ok(Err(Failure::Numerical(e))) => {
            set_error(e.to_string());
            GcmStatus::Numerical
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GcmStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(ptr: *mut T, what: &'static str, value: T) -> Result<(), Failure> {
    let slot = ptr.as_mut().ok_or(Failure::Null(what))?;
    *slot = value;
    Ok(())
}

/// Copies `values` into `buf[..len]` and stores the full count in `total`.
unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize, total: *mut usize) -> Result<(), Failure> {
    write(total, "total", values.len())?;
    if len > 0 {
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let n = len.min(values.len());
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, n);
    }
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
///
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gcm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default parameters `A = −1`, `C = 1`, `K = 1` with the given `B` and `ħ`.
#[no_mangle]
pub extern "C" fn gcm_params_default(b: f64, hbar: f64) -> GcmParams {
    let p = ModelParams::new(b, hbar);
    GcmParams { a: p.a, b: p.b, c: p.c, hbar: p.hbar, mass: p.mass }
}

/// # Safety
/// `params` must point to a valid `GcmParams`, `out` to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gcm_potential(params: *const GcmParams, beta: f64, gamma: f64, out: *mut f64) -> GcmStatus {
    guard(|| {
        let p: ModelParams = (*read(params, "params")?).into();
        p.validate()?;
        write(out, "out", p.potential(beta, gamma))
    })
}

/// # Safety
/// `params` must point to a valid `GcmParams`, `out` to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gcm_quadratic_well(params: *const GcmParams, out: *mut GcmWell) -> GcmStatus {
    guard(|| {
        let p: ModelParams = (*read(params, "params")?).into();
        p.validate()?;
        let w = model::quadratic_well(&p)?;
        write(out, "out", GcmWell { beta0: w.beta0, gamma0: w.gamma0, v0: w.v0, k_beta: w.k_beta, k_gamma: w.k_gamma })
    })
}

/// Diagonalizes `H` in a basis of `n_max` shells. A non-positive `length`
/// selects the harmonic length of the well.
///
/// # Safety
/// `params` must point to a valid `GcmParams`; `out` must be writable. The
/// handle written to `*out` must be released with `gcm_solution_free`.
#[no_mangle]
pub unsafe extern "C" fn gcm_solve(
    params: *const GcmParams,
    quantization: GcmQuantization,
    n_max: u32,
    length: f64,
    out: *mut *mut GcmSolution,
) -> GcmStatus {
    guard(|| {
        let p: ModelParams = (*read(params, "params")?).into();
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let q = match quantization {
            GcmQuantization::TwoDEven => Quantization::TwoDEven,
            GcmQuantization::TwoDOdd => Quantization::TwoDOdd,
            GcmQuantization::FiveD => Quantization::FiveD,
        };
        let length = if length > 0.0 { length } else { spectra::default_length(&p)? };
        let inner = spectra::solve(&p, q, n_max, length)?;
        *out = Box::into_raw(Box::new(GcmSolution { inner }));
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle from `gcm_solve`.
#[no_mangle]
pub unsafe extern "C" fn gcm_solution_dimension(solution: *const GcmSolution, out: *mut usize) -> GcmStatus {
    guard(|| write(out, "out", read(solution, "solution")?.inner.dimension()))
}

/// Number of leading levels that passed the convergence test.
///
/// # Safety
/// `solution` must be a live handle from `gcm_solve`.
#[no_mangle]
pub unsafe extern "C" fn gcm_solution_converged(solution: *const GcmSolution, out: *mut usize) -> GcmStatus {
    guard(|| write(out, "out", read(solution, "solution")?.inner.n_converged))
}

/// Copies up to `len` ascending energies into `buf`; `*total` receives the dimension.
/// Pass `len = 0` to query the size.
///
/// # Safety
/// `buf` must hold `len` doubles; `total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gcm_solution_energies(
    solution: *const GcmSolution,
    buf: *mut f64,
    len: usize,
    total: *mut usize,
) -> GcmStatus {
    guard(|| copy_out(&read(solution, "solution")?.inner.energies, buf, len, total))
}

/// Expectation values of `operator` over the converged levels.
///
/// # Safety
/// As for `gcm_solution_energies`.
#[no_mangle]
pub unsafe extern "C" fn gcm_solution_peres(
    solution: *const GcmSolution,
    operator: GcmOperator,
    buf: *mut f64,
    len: usize,
    total: *mut usize,
) -> GcmStatus {
    guard(|| {
        let sol = &read(solution, "solution")?.inner;
        let op = match operator {
            GcmOperator::L2 => Operator::L2,
            GcmOperator::HPrime => Operator::HPrime,
            GcmOperator::H0 => Operator::H0,
            GcmOperator::H => Operator::H,
        };
        let lattice = spectra::peres_lattice(sol, op)?;
        let values: Vec<f64> = lattice.rows.iter().map(|r| r.value).collect();
        copy_out(&values, buf, len, total)
    })
}

/// # Safety
/// `solution` must come from `gcm_solve` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gcm_solution_free(solution: *mut GcmSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// SALI regular fraction of `n_samples` section points at `energy`, with the
/// default integrator. A non-positive `duration` selects the default SALI time.
///
/// # Safety
/// `params` must be valid; `value` and `std_error` writable.
#[no_mangle]
pub unsafe extern "C" fn gcm_regular_fraction(
    params: *const GcmParams,
    energy: f64,
    n_samples: usize,
    seed: u64,
    duration: f64,
    value: *mut f64,
    std_error: *mut f64,
) -> GcmStatus {
    guard(|| {
        let p: ModelParams = (*read(params, "params")?).into();
        if value.is_null() || std_error.is_null() {
            return Err(Failure::Null("value/std_error"));
        }
        let mut sali = SaliSettings::default();
        if duration > 0.0 {
            sali.duration = duration;
        }
        let f = freg(&p, energy, n_samples, seed, &sali, &IntegratorSettings::default())?;
        write(value, "value", f.value)?;
        write(std_error, "std_error", f.stderr)
    })
}
