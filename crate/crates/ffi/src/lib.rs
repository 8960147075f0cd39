//! C ABI over `warpsyn`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`WsStatus`]; on failure the message is available from
//! [`ws_last_error`] until the next failing call on the same thread.
//! Rotations and matrices are 9 doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use warpsyn::scenario::{ControllerKind, ResolveOptions, Scenario};
use warpsyn::sim::{self, TrajectoryLog};
use warpsyn::so3::{Mat3, Rotation, Vec3};
use warpsyn::trace_potential::WeightMatrix;
use warpsyn::warping::{self, WarpedPotential};
use warpsyn::{csvio, Error};

/// Status codes. Values 1 to 4 match the process exit codes of the CLI.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    Io = 1,
    Parse = 2,
    Precondition = 3,
    ZenoGuard = 4,
    NullPointer = 5,
    OutOfRange = 6,
    Panic = 7,
}

pub struct WsWeight(WeightMatrix);

pub struct WsPotential(WarpedPotential);

pub struct WsTrajectory {
    log: TrajectoryLog,
    header: String,
}

/// One trajectory sample; mirrors a CSV row.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WsRecord {
    pub t: f64,
    pub j: u64,
    pub q: [u32; 2],
    pub e: [f64; 2],
    pub omega: [f64; 3],
    pub tau: [f64; 3],
    pub v: f64,
    pub u: [f64; 2],
    pub mu: [f64; 2],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WsStatus {
    match e {
        Error::Io(_) => WsStatus::Io,
        Error::Parse { .. } => WsStatus::Parse,
        Error::ZenoGuard(_) => WsStatus::ZenoGuard,
        _ => WsStatus::Precondition,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Range(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            WsStatus::NullPointer
        }
        Ok(Err(Fail::Range(msg))) => {
            set_error(msg);
            WsStatus::OutOfRange
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn read9(p: *const f64, what: &'static str) -> Result<Mat3, Fail> {
    let a = deref(p as *const [f64; 9], what)?;
    Ok(Mat3::from_row_slice(a))
}

unsafe fn read3(p: *const f64, what: &'static str) -> Result<Vec3, Fail> {
    Ok(Vec3::from_array(*deref(p as *const [f64; 3], what)?))
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Lib(Error::parse(0, format!("{what} is not UTF-8: {e}"))))
}

fn check_q(p: &WarpedPotential, q: u32) -> Result<usize, Fail> {
    let q = q as usize;
    if q == 0 || q > p.gains().len() {
        return Err(Fail::Range(format!("logic index {q} outside 1..={}", p.gains().len())));
    }
    Ok(q)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `a` points to 9 doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_weight_new(a: *const f64, out: *mut *mut WsWeight) -> WsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w = WeightMatrix::new(read9(a, "a")?)?;
        *out = Box::into_raw(Box::new(WsWeight(w)));
        Ok(())
    })
}

/// # Safety
/// `w` is NULL or came from [`ws_weight_new`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn ws_weight_free(w: *mut WsWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Admissible gain bound `k̄`.
///
/// # Safety
/// `w` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_weight_k_bound(w: *const WsWeight, out: *mut f64) -> WsStatus {
    guard(|| {
        *out_ptr(out, "out")? = warping::k_bound(&deref(w, "w")?.0);
        Ok(())
    })
}

/// Gap-maximizing warping axis and the resulting `min Δ`.
///
/// # Safety
/// `w` is a live handle; `u` has room for 3 doubles; `min_delta` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ws_weight_optimal_u(
    w: *const WsWeight,
    u: *mut f64,
    min_delta: *mut f64,
) -> WsStatus {
    guard(|| {
        let o = warping::optimal_u(&deref(w, "w")?.0)?;
        *out_ptr(u as *mut [f64; 3], "u")? = o.u.to_array();
        if let Some(m) = min_delta.as_mut() {
            *m = o.min_delta;
        }
        Ok(())
    })
}

/// Warped family with gains `{k, −k}` about the unit axis `u`.
///
/// # Safety
/// `w` is a live handle; `u` points to 3 doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_potential_new(
    w: *const WsWeight,
    u: *const f64,
    k: f64,
    out: *mut *mut WsPotential,
) -> WsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p = WarpedPotential::symmetric(deref(w, "w")?.0.clone(), read3(u, "u")?, k)?;
        *out = Box::into_raw(Box::new(WsPotential(p)));
        Ok(())
    })
}

/// # Safety
/// `p` is NULL or came from [`ws_potential_new`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn ws_potential_free(p: *mut WsPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Synergistic gap.
///
/// # Safety
/// `p` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_potential_gap(p: *const WsPotential, out: *mut f64) -> WsStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(p, "p")?.0.gap()?;
        Ok(())
    })
}

/// `U(R, q)`; `q` is 1-based.
///
/// # Safety
/// `p` is a live handle; `r` points to 9 doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_potential_value(
    p: *const WsPotential,
    r: *const f64,
    q: u32,
    out: *mut f64,
) -> WsStatus {
    guard(|| {
        let p = &deref(p, "p")?.0;
        let q = check_q(p, q)?;
        let r = Rotation::from_matrix(read9(r, "r")?)?;
        *out_ptr(out, "out")? = p.value(&r, q);
        Ok(())
    })
}

/// `μ(R, q) = U(R, q) − min_p U(R, p)`; `q` is 1-based.
///
/// # Safety
/// `p` is a live handle; `r` points to 9 doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_potential_mu(
    p: *const WsPotential,
    r: *const f64,
    q: u32,
    out: *mut f64,
) -> WsStatus {
    guard(|| {
        let p = &deref(p, "p")?.0;
        let q = check_q(p, q)?;
        let r = Rotation::from_matrix(read9(r, "r")?)?;
        *out_ptr(out, "out")? = p.mu(&r, q);
        Ok(())
    })
}

/// Runs a scenario file. `controller` is NULL (use the file), `"hybrid"`
/// or `"smooth"`. `seed` overrides the file seed when `has_seed` is nonzero.
///
/// # Safety
/// `path` is a NUL-terminated string; `controller` is NULL or one; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_run(
    path: *const c_char,
    controller: *const c_char,
    paper_exact: c_int,
    has_seed: c_int,
    seed: u64,
    out: *mut *mut WsTrajectory,
) -> WsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = read_str(path, "path")?;
        let kind = if controller.is_null() {
            None
        } else {
            Some(match read_str(controller, "controller")? {
                "hybrid" => ControllerKind::Hybrid,
                "smooth" => ControllerKind::Smooth,
                other => {
                    return Err(Fail::Range(format!("controller must be hybrid or smooth, got `{other}`")))
                }
            })
        };
        let res = Scenario::from_path(Path::new(path))?.resolve(ResolveOptions {
            paper_exact: paper_exact != 0,
            seed: (has_seed != 0).then_some(seed),
        })?;
        let kind = kind.unwrap_or(res.scenario.controller);
        let log = sim::run(&res.sim_config(kind)?)?;
        *out = Box::into_raw(Box::new(WsTrajectory {
            log,
            header: res.header(kind),
        }));
        Ok(())
    })
}

/// # Safety
/// `t` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_len(t: *const WsTrajectory, out: *mut usize) -> WsStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(t, "t")?.log.records.len();
        Ok(())
    })
}

/// # Safety
/// `t` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_record(
    t: *const WsTrajectory,
    index: usize,
    out: *mut WsRecord,
) -> WsStatus {
    guard(|| {
        let recs = &deref(t, "t")?.log.records;
        let r = recs
            .get(index)
            .ok_or_else(|| Fail::Range(format!("record {index} of {}", recs.len())))?;
        *out_ptr(out, "out")? = WsRecord {
            t: r.t,
            j: r.j,
            q: [r.q[0] as u32, r.q[1] as u32],
            e: r.e,
            omega: r.omega.to_array(),
            tau: r.tau.to_array(),
            v: r.v,
            u: r.u,
            mu: r.mu,
        };
        Ok(())
    })
}

/// Writes the trajectory in the CLI's CSV format, header comments included.
///
/// # Safety
/// `t` is a live handle; `path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_write_csv(
    t: *const WsTrajectory,
    path: *const c_char,
) -> WsStatus {
    guard(|| {
        let t = deref(t, "t")?;
        let path = read_str(path, "path")?;
        let f = std::fs::File::create(path).map_err(Error::from)?;
        csvio::write_log(std::io::BufWriter::new(f), &t.header, &t.log)?;
        Ok(())
    })
}

/// # Safety
/// `t` is NULL or came from [`ws_scenario_run`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_free(t: *mut WsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
