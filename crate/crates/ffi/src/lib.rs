//! C ABI over `polya-core`.
//!
//! Every fallible call returns a [`PolyaStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and can be read
//! with [`polya_last_error`]. Handles are opaque and must be released with
//! their `_free` function; passing null to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polya_core::analytic::{
    conditional_count_pmf, d1_crossing_law, expected_crossings, shell_law, state_kernel, Direction, KernelFamily,
    RateIndexing,
};
use polya_core::harness::{verify, VerificationReport, VerifyConfig};
use polya_core::lattice::{shell_combinatorics, shell_size};
use polya_core::pmf::{thin_pmf, tv_distance};
use polya_core::{Error, LatticeVector, Pmf, Rational};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ZeroVector = 3,
    Domain = 4,
    InvalidState = 5,
    InvalidTarget = 6,
    EmptySample = 7,
    InsufficientSample = 8,
    Config = 9,
    Parse = 10,
    Io = 11,
    Overflow = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyaDirection {
    Up = 0,
    Down = 1,
    Total = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyaIndexing {
    Destination = 0,
    Source = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyaKernelFamily {
    State = 0,
    Xclass = 1,
}

/// Exact fraction `num / den` with `den > 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PolyaRational {
    pub num: i64,
    pub den: i64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PolyaShell {
    /// Number of states at norm `n`.
    pub size: u64,
    /// Nonzero coordinates summed over the shell: the inward steps out of it.
    pub c: u64,
    /// Twice the zero coordinates summed over the shell.
    pub c0: u64,
    /// Probability that the norm process steps up from level `n`.
    pub p_up: PolyaRational,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PolyaExpectations {
    pub up: PolyaRational,
    pub down: PolyaRational,
    pub total: PolyaRational,
    pub up_xclass: PolyaRational,
    pub down_xclass: PolyaRational,
    pub total_xclass: PolyaRational,
}

/// Truncated probability mass function.
pub struct PolyaPmf(Pmf);

/// Result of a verification run.
pub struct PolyaReport(VerificationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PolyaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ZeroVector => PolyaStatus::ZeroVector,
            Error::Domain(_) => PolyaStatus::Domain,
            Error::InvalidState { .. } => PolyaStatus::InvalidState,
            Error::InvalidTarget { .. } => PolyaStatus::InvalidTarget,
            Error::EmptySample => PolyaStatus::EmptySample,
            Error::InsufficientConditionedSample { .. } => PolyaStatus::InsufficientSample,
            Error::Config { .. } => PolyaStatus::Config,
            Error::Parse(_) | Error::Json(_) => PolyaStatus::Parse,
            Error::Io(_) => PolyaStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: PolyaStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PolyaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PolyaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PolyaStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| fail(PolyaStatus::NullPointer, format!("{name} is null")))
}

fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: non-null handles come from this library and are still live.
    unsafe { p.as_ref() }.ok_or_else(|| fail(PolyaStatus::NullPointer, format!("{name} is null")))
}

fn vector(coords: *const i64, len: usize) -> Result<LatticeVector, Failure> {
    if coords.is_null() {
        return Err(fail(PolyaStatus::NullPointer, "coords is null"));
    }
    // SAFETY: the caller guarantees `len` readable elements at `coords`.
    let slice = unsafe { std::slice::from_raw_parts(coords, len) };
    Ok(LatticeVector::new(slice.to_vec())?)
}

fn rational(r: &Rational) -> Result<PolyaRational, Failure> {
    let num = i64::try_from(*r.numer());
    let den = i64::try_from(*r.denom());
    match (num, den) {
        (Ok(num), Ok(den)) => Ok(PolyaRational { num, den }),
        _ => Err(fail(PolyaStatus::Overflow, format!("{r} does not fit in 64-bit integers"))),
    }
}

fn direction(d: PolyaDirection) -> Direction {
    match d {
        PolyaDirection::Up => Direction::Up,
        PolyaDirection::Down => Direction::Down,
        PolyaDirection::Total => Direction::Total,
    }
}

fn put_pmf(dst: *mut *mut PolyaPmf, pmf: Pmf) -> Result<(), Failure> {
    *out(dst, "out")? = Box::into_raw(Box::new(PolyaPmf(pmf)));
    Ok(())
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn polya_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn polya_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn polya_shell(d: usize, n: u64, out_shell: *mut PolyaShell) -> PolyaStatus {
    guard(|| {
        let s = shell_combinatorics(d, n)?;
        let narrow = |x: u128| u64::try_from(x).map_err(|_| fail(PolyaStatus::Overflow, "shell count exceeds 64 bits"));
        *out(out_shell, "out_shell")? = PolyaShell {
            size: narrow(shell_size(d, n, false))?,
            c: narrow(s.c)?,
            c0: narrow(s.c0)?,
            p_up: rational(&s.p_up)?,
        };
        Ok(())
    })
}

/// Expected crossing counts of the state `coords` and of its X-class.
///
/// # Safety
/// `coords` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn polya_expectations(coords: *const i64, len: usize, out_e: *mut PolyaExpectations) -> PolyaStatus {
    guard(|| {
        let e = expected_crossings(&vector(coords, len)?)?;
        *out(out_e, "out_e")? = PolyaExpectations {
            up: rational(&e.e_up)?,
            down: rational(&e.e_down)?,
            total: rational(&e.e_total)?,
            up_xclass: rational(&e.e_up_xclass)?,
            down_xclass: rational(&e.e_down_xclass)?,
            total_xclass: rational(&e.e_total_xclass)?,
        };
        Ok(())
    })
}

/// Crossing law of the norm shell `n` in dimension `d`.
#[no_mangle]
pub extern "C" fn polya_pmf_shell_law(
    d: usize,
    n: usize,
    dir: PolyaDirection,
    indexing: PolyaIndexing,
    k_max: usize,
    out_pmf: *mut *mut PolyaPmf,
) -> PolyaStatus {
    guard(|| {
        let indexing = match indexing {
            PolyaIndexing::Destination => RateIndexing::Destination,
            PolyaIndexing::Source => RateIndexing::Source,
        };
        put_pmf(out_pmf, shell_law(d, n, direction(dir), k_max, indexing)?)
    })
}

/// Crossing law of the level `level` of the simple walk on `Z`.
#[no_mangle]
pub extern "C" fn polya_pmf_d1_level_law(
    level: i64,
    dir: PolyaDirection,
    k_max: usize,
    out_pmf: *mut *mut PolyaPmf,
) -> PolyaStatus {
    guard(|| put_pmf(out_pmf, d1_crossing_law(level, direction(dir), k_max)?))
}

/// Law of the count at `coords` given `m` crossings of its parents.
///
/// # Safety
/// `coords` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn polya_pmf_state_kernel(
    coords: *const i64,
    len: usize,
    dir: PolyaDirection,
    family: PolyaKernelFamily,
    m: usize,
    k_max: usize,
    out_pmf: *mut *mut PolyaPmf,
) -> PolyaStatus {
    guard(|| {
        let family = match family {
            PolyaKernelFamily::State => KernelFamily::State,
            PolyaKernelFamily::Xclass => KernelFamily::Xclass,
        };
        let kernel = state_kernel(&vector(coords, len)?, direction(dir), family)?;
        put_pmf(out_pmf, conditional_count_pmf(&kernel, m, k_max)?)
    })
}

/// Builds a pmf from `len` masses on `0..len` plus the unresolved `tail`.
///
/// # Safety
/// `masses` must point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn polya_pmf_from_masses(
    masses: *const f64,
    len: usize,
    tail: f64,
    out_pmf: *mut *mut PolyaPmf,
) -> PolyaStatus {
    guard(|| {
        if masses.is_null() {
            return Err(fail(PolyaStatus::NullPointer, "masses is null"));
        }
        if len == 0 {
            return Err(fail(PolyaStatus::InvalidArgument, "a pmf needs at least one mass"));
        }
        // SAFETY: the caller guarantees `len` readable elements.
        let m = unsafe { std::slice::from_raw_parts(masses, len) };
        put_pmf(out_pmf, Pmf::from_parts(m.to_vec(), tail, "ffi")?)
    })
}

/// Binomial thinning of `pmf` with retention probability `z`.
#[no_mangle]
pub extern "C" fn polya_pmf_thin(pmf: *const PolyaPmf, z: f64, k_max: usize, out_pmf: *mut *mut PolyaPmf) -> PolyaStatus {
    guard(|| {
        let p = handle(pmf, "pmf")?;
        put_pmf(out_pmf, thin_pmf(&p.0, z, k_max)?)
    })
}

/// Largest resolved value; masses are defined on `0..=k_max`.
#[no_mangle]
pub extern "C" fn polya_pmf_k_max(pmf: *const PolyaPmf, out_k: *mut usize) -> PolyaStatus {
    guard(|| {
        *out(out_k, "out_k")? = handle(pmf, "pmf")?.0.k_max();
        Ok(())
    })
}

/// Mass at `k`; zero beyond `k_max`.
#[no_mangle]
pub extern "C" fn polya_pmf_mass(pmf: *const PolyaPmf, k: usize, out_mass: *mut f64) -> PolyaStatus {
    guard(|| {
        *out(out_mass, "out_mass")? = handle(pmf, "pmf")?.0.mass(k);
        Ok(())
    })
}

/// Mass not resolved on `0..=k_max`.
#[no_mangle]
pub extern "C" fn polya_pmf_tail(pmf: *const PolyaPmf, out_tail: *mut f64) -> PolyaStatus {
    guard(|| {
        *out(out_tail, "out_tail")? = handle(pmf, "pmf")?.0.tail();
        Ok(())
    })
}

/// Mean over the resolved part.
#[no_mangle]
pub extern "C" fn polya_pmf_mean(pmf: *const PolyaPmf, out_mean: *mut f64) -> PolyaStatus {
    guard(|| {
        *out(out_mean, "out_mean")? = handle(pmf, "pmf")?.0.mean().0;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn polya_pmf_tv(a: *const PolyaPmf, b: *const PolyaPmf, out_tv: *mut f64) -> PolyaStatus {
    guard(|| {
        *out(out_tv, "out_tv")? = tv_distance(&handle(a, "a")?.0, &handle(b, "b")?.0);
        Ok(())
    })
}

/// # Safety
/// `pmf` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn polya_pmf_free(pmf: *mut PolyaPmf) {
    if !pmf.is_null() {
        // SAFETY: see above.
        drop(unsafe { Box::from_raw(pmf) });
    }
}

/// Runs a verification described by a JSON config.
///
/// Fails with `Config` or `Parse` for a malformed config. Identity failures are
/// not call failures; query them with [`polya_report_has_failures`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn polya_verify(config_json: *const c_char, out_report: *mut *mut PolyaReport) -> PolyaStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(fail(PolyaStatus::NullPointer, "config_json is null"));
        }
        // SAFETY: the caller passes a NUL-terminated string.
        let text = unsafe { CStr::from_ptr(config_json) }
            .to_str()
            .map_err(|_| fail(PolyaStatus::Parse, "config is not UTF-8"))?;
        let report = verify(&VerifyConfig::from_json(text)?)?;
        *out(out_report, "out_report")? = Box::into_raw(Box::new(PolyaReport(report)));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn polya_report_has_failures(report: *const PolyaReport, out_flag: *mut bool) -> PolyaStatus {
    guard(|| {
        *out(out_flag, "out_flag")? = handle(report, "report")?.0.has_failures();
        Ok(())
    })
}

fn put_string(dst: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| fail(PolyaStatus::InvalidArgument, "string contains NUL"))?;
    *out(dst, "out_text")? = c.into_raw();
    Ok(())
}

/// Report rows as CSV. Release the string with [`polya_string_free`].
#[no_mangle]
pub extern "C" fn polya_report_csv(report: *const PolyaReport, out_text: *mut *mut c_char) -> PolyaStatus {
    guard(|| put_string(out_text, handle(report, "report")?.0.to_csv()?))
}

/// Full report as JSON. Release the string with [`polya_string_free`].
#[no_mangle]
pub extern "C" fn polya_report_json(report: *const PolyaReport, out_text: *mut *mut c_char) -> PolyaStatus {
    guard(|| put_string(out_text, handle(report, "report")?.0.to_json()?))
}

/// # Safety
/// `report` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn polya_report_free(report: *mut PolyaReport) {
    if !report.is_null() {
        // SAFETY: see above.
        drop(unsafe { Box::from_raw(report) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn polya_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: see above.
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_overflow_is_reported() {
        let big = Rational::new(1, i128::from(i64::MAX) + 2);
        assert!(matches!(rational(&big), Err(Failure(PolyaStatus::Overflow, _))));
        assert_eq!(rational(&Rational::new(3, 4)).ok(), Some(PolyaRational { num: 3, den: 4 }));
    }

    #[test]
    fn error_is_cleared_by_next_success() {
        assert_eq!(polya_shell(0, 1, &mut PolyaShell::default()), PolyaStatus::Domain);
        assert!(!polya_last_error().is_null());
        assert_eq!(polya_shell(2, 1, &mut PolyaShell::default()), PolyaStatus::Ok);
        assert!(polya_last_error().is_null());
    }
}
