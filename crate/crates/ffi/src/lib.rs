//! C interface to the maximal-operator estimator, the counterexample
//! verifier and the experiment runner.
//!
//! Every fallible function returns an [`MlStatus`]; on failure
//! [`ml_last_error`] describes the problem on the calling thread. Objects are
//! opaque handles released with their `_free` function. Panics never cross
//! the boundary: they are reported as [`MlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use marcin_lab::counterexamples::verify_counterexample;
use marcin_lab::error::Error;
use marcin_lab::experiments::{self, ConfigFile, Overrides};
use marcin_lab::matrix::Matrix;
use marcin_lab::maximal::{self, EstimateOptions, Mode, NormEstimate, UpperRequest};
use marcin_lab::Complex64 as C64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    Index = 4,
    Size = 5,
    Aliasing = 6,
    Numerical = 7,
    Io = 8,
    /// Requested value is absent, e.g. no certified upper bound for mixed exponents.
    Unavailable = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlMode {
    Strong = 0,
    Weak = 1,
    Mixed = 2,
}

/// Complex matrix, row-major.
pub struct MlMatrix(Matrix);

/// Result of a maximal-operator estimate.
pub struct MlEstimate(NormEstimate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MlStatus {
    match e {
        Error::Index(_) => MlStatus::Index,
        Error::Shape(_) => MlStatus::Shape,
        Error::Argument(_) | Error::Json(_) => MlStatus::InvalidArgument,
        Error::Size(_) => MlStatus::Size,
        Error::Aliasing(_) => MlStatus::Aliasing,
        Error::Numerical(_) => MlStatus::Numerical,
        Error::Io(_) | Error::Csv(_) => MlStatus::Io,
    }
}

struct Fail(MlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MlStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MlStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(MlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a `rows x cols` matrix from row-major real and imaginary parts.
/// `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut MlMatrix,
) -> MlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if re.is_null() {
            return Err(null("re"));
        }
        let len = rows.checked_mul(cols).ok_or(Fail(MlStatus::Size, "rows * cols overflows".into()))?;
        let re = std::slice::from_raw_parts(re, len);
        let data = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
        };
        *out = Box::into_raw(Box::new(MlMatrix(Matrix::new(rows, cols, data)?)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`ml_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_matrix_free(m: *mut MlMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ml_matrix_rows(m: *const MlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ml_matrix_cols(m: *const MlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Twice the largest row variation, a certified upper bound for the strong
/// `p = 2` constant.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_bv_upper_bound(m: *const MlMatrix, out: *mut f64) -> MlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = maximal::bv_upper_bound(&m.0);
        Ok(())
    })
}

/// Estimate the maximal-operator constant of `m`. `q` is read only for
/// [`MlMode::Mixed`]. `restarts = 0` selects the default. The best valid
/// certified upper bound is attached when one exists.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_h(
    m: *const MlMatrix,
    mode: MlMode,
    p: f64,
    q: f64,
    seed: u64,
    restarts: usize,
    out: *mut *mut MlEstimate,
) -> MlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let mode = match mode {
            MlMode::Strong => Mode::Strong { p },
            MlMode::Weak => Mode::Weak { p },
            MlMode::Mixed => Mode::Mixed { p, q },
        };
        let mut opts = EstimateOptions { seed, upper: UpperRequest::Best, ..Default::default() };
        if restarts > 0 {
            opts.restarts = restarts;
        }
        let est = maximal::estimate_h(&m.0, mode, &opts)?;
        *out = Box::into_raw(Box::new(MlEstimate(est)));
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a handle from [`ml_estimate_h`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_free(e: *mut MlEstimate) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Certified lower bound; NaN for a null handle.
///
/// # Safety
/// `e` must be a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_lower_bound(e: *const MlEstimate) -> f64 {
    e.as_ref().map_or(f64::NAN, |e| e.0.lower_bound)
}

/// Certified upper bound, or [`MlStatus::Unavailable`] if none applies.
///
/// # Safety
/// `e` must be a live estimate handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_upper_bound(e: *const MlEstimate, out: *mut f64) -> MlStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        match e.0.upper_bound {
            Some(u) => {
                *out = u;
                Ok(())
            }
            None => Err(Fail(MlStatus::Unavailable, "no certified upper bound for this mode".into())),
        }
    })
}

/// Number of samples in the witness vector.
///
/// # Safety
/// `e` must be a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_witness_len(e: *const MlEstimate) -> usize {
    e.as_ref().and_then(|e| e.0.witness.first()).map_or(0, |w| w.values().len())
}

/// Copy the witness into `re` and `im`, each of length `len`, which must
/// equal [`ml_estimate_witness_len`].
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_witness(e: *const MlEstimate, re: *mut f64, im: *mut f64, len: usize) -> MlStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let w = e.0.witness.first().ok_or(Fail(MlStatus::Unavailable, "estimate has no witness".into()))?;
        let v = w.values();
        if v.len() != len {
            return Err(Fail(MlStatus::Shape, format!("witness has {} samples, buffer {len}", v.len())));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        for (i, z) in v.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// The estimate as a JSON document; release with [`ml_string_free`].
///
/// # Safety
/// `e` must be a live estimate handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_estimate_to_json(e: *const MlEstimate, out: *mut *mut c_char) -> MlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        let s = CString::new(e.0.to_json()?).map_err(|_| Fail(MlStatus::Numerical, "interior nul".into()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluate the sign-pattern counterexample of size `n` at the Rademacher
/// witness, returning the achieved ratio and its closed form.
///
/// # Safety
/// `ratio` and `target` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_verify_counterexample(n: usize, theta: f64, ratio: *mut f64, target: *mut f64) -> MlStatus {
    guard(|| {
        let (ratio, target) = (ratio.as_mut().ok_or_else(|| null("ratio"))?, target.as_mut().ok_or_else(|| null("target"))?);
        let r = verify_counterexample(n, theta)?;
        *ratio = r.ratio;
        *target = r.target;
        Ok(())
    })
}

/// Run an experiment described by a JSON config (the same format as the
/// command-line `--config` file) into `out_dir`, which overrides any `out`
/// key. `exit_code` receives the command-line exit code. A run that completes
/// with a failed quality check returns [`MlStatus::Numerical`].
///
/// # Safety
/// Strings must be nul-terminated; `out_dir` may be null; `exit_code` may be null.
#[no_mangle]
pub unsafe extern "C" fn ml_run_experiment(config_json: *const c_char, out_dir: *const c_char, exit_code: *mut i32) -> MlStatus {
    let mut code = experiments::exit::INVALID_ARGUMENTS;
    let status = guard(|| {
        let file = ConfigFile::parse(text(config_json, "config_json")?)?;
        let out = if out_dir.is_null() { None } else { Some(PathBuf::from(text(out_dir, "out_dir")?)) };
        let config = experiments::resolve(Some(file), Overrides { out, ..Default::default() })?;
        let report = experiments::run(&config).map_err(|e| {
            code = experiments::exit_code(&e);
            Fail::from(e)
        })?;
        code = report.exit_code();
        match (&report.error, &report.manifest.message) {
            (Some(e), _) => Err(Fail(status_of(e), e.to_string())),
            (None, Some(m)) => Err(Fail(MlStatus::Numerical, m.clone())),
            (None, None) => Ok(()),
        }
    });
    if status == MlStatus::Panic {
        code = experiments::exit::NUMERICAL_FAILURE;
    }
    if let Some(c) = exit_code.as_mut() {
        *c = code;
    }
    status
}
