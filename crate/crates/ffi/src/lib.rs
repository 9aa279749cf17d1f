//! C ABI for `ruinwalk`.
//!
//! Models and solutions are opaque handles created by `rw_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`RwStatus`]; on failure a message is available from [`rw_last_error`]
//! until the next call on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ruinwalk::initial_values::{self, InitialValues};
use ruinwalk::modelfile::ModelFile;
use ruinwalk::pgf::{unit_disk_roots, RootConfig, RootSet};
use ruinwalk::survival::{self, UltimateOptions};
use ruinwalk::{Error, Pmf, RiskModel};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidModel = 2,
    NetProfit = 3,
    Numerical = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Opaque risk model.
pub struct RwModel {
    model: RiskModel,
}

/// Opaque solved model: roots, initial values and `phi(0..=u_max)`.
pub struct RwSolution {
    roots: RootSet,
    init: InitialValues,
    phis: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(RwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NetProfit { .. } => RwStatus::NetProfit,
            ref e if e.is_numerical() => RwStatus::Numerical,
            _ => RwStatus::InvalidModel,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RwStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RwStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RwStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn model_ref<'a>(model: *const RwModel) -> Result<&'a RwModel, Fail> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn solution_ref<'a>(sol: *const RwSolution) -> Result<&'a RwSolution, Fail> {
    sol.as_ref().ok_or_else(|| null("solution"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `rw_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from a JSON model document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rw_model_from_json(json: *const c_char, out: *mut *mut RwModel) -> RwStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(RwStatus::InvalidModel, format!("json is not UTF-8: {e}")))?;
        let loaded = ModelFile::parse(text)?.build()?;
        let handle = Box::into_raw(Box::new(RwModel { model: loaded.model }));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Builds a model from explicit weights: `claim[k] = P(X = claim_offset + k)`
/// and `interarrival[k] = P(c*theta = interarrival_offset + k)`.
///
/// # Safety
/// Each weight pointer must reference `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rw_model_from_pmfs(
    claim_offset: i64,
    claim: *const f64,
    claim_len: usize,
    interarrival_offset: i64,
    interarrival: *const f64,
    interarrival_len: usize,
    out: *mut *mut RwModel,
) -> RwStatus {
    guard(|| {
        let claim = Pmf::new(claim_offset, slice(claim, claim_len, "claim")?.to_vec(), 0.0)?;
        let inter = Pmf::new(
            interarrival_offset,
            slice(interarrival, interarrival_len, "interarrival")?.to_vec(),
            0.0,
        )?;
        let model = RiskModel::new(claim, inter)?;
        let handle = Box::into_raw(Box::new(RwModel { model }));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `model` must come from a `rw_model_from_*` call and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn rw_model_free(model: *mut RwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Depth `m` of the largest downward step, 0 for a NULL model.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rw_model_m(model: *const RwModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.m())
}

/// `E(X - c*theta)`, NaN for a NULL model.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rw_model_drift(model: *const RwModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.model.drift())
}

/// Finds the roots, the initial values and `phi(0..=u_max)`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rw_solve(model: *const RwModel, u_max: usize, out: *mut *mut RwSolution) -> RwStatus {
    guard(|| {
        let model = &model_ref(model)?.model;
        model.require_net_profit()?;
        let roots = unit_disk_roots(model, &RootConfig::default())?;
        let init = initial_values::solve(model, &roots)?;
        let table = survival::ultimate_survival(model, &roots, &init, u_max, &UltimateOptions::default())?;
        let handle = Box::into_raw(Box::new(RwSolution { roots, init, phis: table.phis }));
        write_out(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `sol` must come from [`rw_solve`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_free(sol: *mut RwSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of entries in the survival table (`u_max + 1`).
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_phi_len(sol: *const RwSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.phis.len())
}

/// `phi(u)` from the solved table.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_phi(sol: *const RwSolution, u: usize, out: *mut f64) -> RwStatus {
    guard(|| {
        let s = solution_ref(sol)?;
        let v = *s.phis.get(u).ok_or_else(|| {
            Fail(RwStatus::OutOfRange, format!("u = {u} beyond table of {}", s.phis.len()))
        })?;
        write_out(out, v, "out")
    })
}

/// Number of initial values `pi_0..pi_{m-1}`.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_pi_len(sol: *const RwSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.init.pi.len())
}

/// `pi_k = phi(k + 1) - phi(k)` for `k < m`.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_pi(sol: *const RwSolution, k: usize, out: *mut f64) -> RwStatus {
    guard(|| {
        let s = solution_ref(sol)?;
        let v = *s.init.pi.get(k).ok_or_else(|| {
            Fail(RwStatus::OutOfRange, format!("k = {k} beyond {} initial values", s.init.pi.len()))
        })?;
        write_out(out, v, "out")
    })
}

/// Number of distinct unit-disk roots.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_root_count(sol: *const RwSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.roots.roots.len())
}

/// Root `i` as real part, imaginary part and multiplicity.
///
/// # Safety
/// `sol` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rw_solution_root(
    sol: *const RwSolution,
    i: usize,
    re: *mut f64,
    im: *mut f64,
    multiplicity: *mut usize,
) -> RwStatus {
    guard(|| {
        let s = solution_ref(sol)?;
        let r = s.roots.roots.get(i).ok_or_else(|| {
            Fail(RwStatus::OutOfRange, format!("root {i} beyond {}", s.roots.roots.len()))
        })?;
        write_out(re, r.value.re, "re")?;
        write_out(im, r.value.im, "im")?;
        write_out(multiplicity, r.multiplicity, "multiplicity")
    })
}

/// Writes `phi(u, t)` for `u = 0..=u_max` into `out`, which must hold
/// `u_max + 1` doubles.
///
/// # Safety
/// `model` must be a live handle; `out` must reference `out_len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rw_finite_survival(
    model: *const RwModel,
    u_max: usize,
    t: usize,
    out: *mut f64,
    out_len: usize,
) -> RwStatus {
    guard(|| {
        let model = &model_ref(model)?.model;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len <= u_max {
            return Err(Fail(RwStatus::OutOfRange, format!("buffer of {out_len} for {} values", u_max + 1)));
        }
        let table = survival::finite_survival(model, u_max, t)?;
        std::slice::from_raw_parts_mut(out, out_len)[..=u_max].copy_from_slice(&table.phis);
        Ok(())
    })
}
