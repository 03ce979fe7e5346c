//! C ABI over `delaunay_glue`.
//!
//! Every function returns a [`DgStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`dg_last_error_message`]. Profiles are opaque handles released with
//! [`dg_profile_free`]; strings returned by the library are released with
//! [`dg_string_free`].

use delaunay_glue::delaunay::{default_step, period_s, period_t, solve_profile, DelaunayProfile, NeckParams};
use delaunay_glue::gluing::{assemble_glued, write_glued, GlueConfig, GlueOptions};
use delaunay_glue::jacobi::floquet;
use delaunay_glue::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DgStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or index out of bounds.
    InvalidArgument = 1,
    Domain = 2,
    Range = 3,
    Config = 4,
    Precondition = 5,
    /// Integration, convergence or other numerical failure.
    Numerical = 6,
    Consistency = 7,
    Io = 8,
    Panic = 9,
}

impl From<&Error> for DgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => DgStatus::Domain,
            Error::Range(_) => DgStatus::Range,
            Error::Config(_) | Error::Json(_) => DgStatus::Config,
            Error::Precondition(_) => DgStatus::Precondition,
            Error::Consistency(_) => DgStatus::Consistency,
            Error::Io(_) => DgStatus::Io,
            _ => DgStatus::Numerical,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DgNeckParams {
    pub epsilon: f64,
    pub tau: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DgProfileSample {
    pub s: f64,
    pub sigma: f64,
    pub sigma_s: f64,
    pub k: f64,
    pub rho: f64,
}

/// Opaque profile handle.
pub struct DgProfile(DelaunayProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Lib(Error),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DgStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            let status = DgStatus::from(&e);
            set_error(e.to_string());
            status
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            DgStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".into());
            DgStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Fail::Arg(format!("{name} is null")))
}

fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Arg(format!("{name} is null")));
    }
    // SAFETY: non-null and nul-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Fail::Arg(format!("{name} is not UTF-8")))
}

/// Neck parameters (epsilon, tau) of necksize `epsilon` in (0, 1].
#[no_mangle]
pub extern "C" fn dg_neck_params(epsilon: f64, params: *mut DgNeckParams) -> DgStatus {
    guard(|| {
        let p = NeckParams::new(epsilon)?;
        *out(params, "params")? = DgNeckParams { epsilon: p.epsilon, tau: p.tau };
        Ok(())
    })
}

/// Profile on [-s_max, s_max]; `step <= 0` selects the default step.
#[no_mangle]
pub extern "C" fn dg_profile_new(epsilon: f64, s_max: f64, step: f64, profile: *mut *mut DgProfile) -> DgStatus {
    guard(|| {
        let slot = out(profile, "profile")?;
        let params = NeckParams::new(epsilon)?;
        let h = if step > 0.0 { step } else { default_step(params)? };
        let pr = solve_profile(params, s_max, h)?;
        *slot = Box::into_raw(Box::new(DgProfile(pr)));
        Ok(())
    })
}

/// Releases a profile; null is ignored.
#[no_mangle]
pub extern "C" fn dg_profile_free(profile: *mut DgProfile) {
    if !profile.is_null() {
        // SAFETY: produced by dg_profile_new and not freed before.
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Number of grid points, 0 for null.
#[no_mangle]
pub extern "C" fn dg_profile_len(profile: *const DgProfile) -> usize {
    // SAFETY: null or a live handle.
    unsafe { profile.as_ref() }.map_or(0, |p| p.0.len())
}

#[no_mangle]
pub extern "C" fn dg_profile_sample(profile: *const DgProfile, index: usize, sample: *mut DgProfileSample) -> DgStatus {
    guard(|| {
        // SAFETY: null or a live handle.
        let p = &unsafe { profile.as_ref() }.ok_or_else(|| Fail::Arg("profile is null".into()))?.0;
        if index >= p.len() {
            return Err(Fail::Arg(format!("index {index} out of bounds for {} points", p.len())));
        }
        *out(sample, "sample")? =
            DgProfileSample { s: p.grid[index], sigma: p.sigma[index], sigma_s: p.sigma_s[index], k: p.k[index], rho: p.rho(index) };
        Ok(())
    })
}

/// Isothermal period S of necksize `epsilon` in (0, 1).
#[no_mangle]
pub extern "C" fn dg_period_s(epsilon: f64, period: *mut f64) -> DgStatus {
    guard(|| {
        let slot = out(period, "period")?;
        *slot = period_s(NeckParams::new(epsilon)?)?;
        Ok(())
    })
}

/// Axial period T of necksize `epsilon` in (0, 1).
#[no_mangle]
pub extern "C" fn dg_period_t(epsilon: f64, period: *mut f64) -> DgStatus {
    guard(|| {
        let slot = out(period, "period")?;
        let params = NeckParams::new(epsilon)?;
        let s = period_s(params)?;
        let pr = solve_profile(params, 1.01 * s, default_step(params)?)?;
        *slot = period_t(&pr)?;
        Ok(())
    })
}

/// Floquet exponent of angular mode `j` at necksize `epsilon`.
#[no_mangle]
pub extern "C" fn dg_floquet_exponent(epsilon: f64, j: i32, gamma: *mut f64) -> DgStatus {
    guard(|| {
        let slot = out(gamma, "gamma")?;
        *slot = floquet(NeckParams::new(epsilon)?, j)?.gamma;
        Ok(())
    })
}

/// Runs the two-ended gluing for a JSON config and returns the residual
/// report as a JSON string (free with [`dg_string_free`]). When `out_dir`
/// is not null the OBJ pieces and the report are written there as well.
#[no_mangle]
pub extern "C" fn dg_glue_run_json(config: *const c_char, out_dir: *const c_char, report: *mut *mut c_char) -> DgStatus {
    guard(|| {
        let slot = out(report, "report")?;
        let cfg = GlueConfig::from_json(text(config, "config")?)?;
        let dir = if out_dir.is_null() { None } else { Some(text(out_dir, "out_dir")?) };
        let surface = assemble_glued(&cfg, &GlueOptions::default())?;
        if let Some(d) = dir {
            write_glued(&surface, Path::new(d))?;
        }
        let json = serde_json::to_string(&surface.report).map_err(Error::from)?;
        *slot = CString::new(json).map_err(|e| Fail::Arg(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
#[no_mangle]
pub extern "C" fn dg_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Copies the last error message of this thread into `buf` (truncated and
/// nul-terminated) and returns the full message length plus one, or 0 when
/// the last call succeeded.
#[no_mangle]
pub extern "C" fn dg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len) - 1;
                // SAFETY: buf holds at least len bytes per the API contract.
                unsafe {
                    std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                    *buf.add(n) = 0;
                }
            }
            bytes.len()
        }
    })
}
