//! C ABI for girg-lab.
//!
//! Every fallible call returns a [`GirgLabStatus`]; on failure the message is
//! available from [`girg_lab_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use girg_lab::dynamics::{
    default_max_steps, largest_blue_component, simulate, InitialShape, RunOptions, SurvivalCriterion,
};
use girg_lab::girg::{build_graph, calibrate_k, Graph, GirgParams};
use girg_lab::meanfield::{self, MeanFieldParams, Profile};
use girg_lab::{theory, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GirgLabStatus {
    Ok = 0,
    InvalidArgument = 1,
    Numerical = 2,
    Io = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque graph handle.
pub struct GirgLabGraph {
    graph: Graph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GirgLabRunResult {
    pub steps_taken: u64,
    pub flips: u64,
    pub final_blue_count: u64,
    pub largest_blue_component: u64,
    pub stable: bool,
    pub survived: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GirgLabStatus {
    match e {
        Error::Io(_) => GirgLabStatus::Io,
        e if e.is_numerical() => GirgLabStatus::Numerical,
        _ => GirgLabStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), (GirgLabStatus, String)>>(f: F) -> GirgLabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GirgLabStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            GirgLabStatus::Panic
        }
    }
}

fn lift<T>(r: girg_lab::Result<T>) -> Result<T, (GirgLabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GirgLabStatus, String) {
    (GirgLabStatus::NullPointer, format!("{what} is null"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn girg_lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn girg_lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_calibrate_k(avg_degree: f64, d: u32, tau: f64, out: *mut f64) -> GirgLabStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = lift(calibrate_k(avg_degree, d as usize, tau))?;
        Ok(())
    })
}

/// Sample a graph. On success `*out` owns a new handle.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_new(
    n: u64,
    d: u32,
    tau: f64,
    k: f64,
    seed: u64,
    out: *mut *mut GirgLabGraph,
) -> GirgLabStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let params = lift(GirgParams::new(n as usize, d as usize, tau, k, seed))?;
        let graph = lift(build_graph(&params))?;
        *out = Box::into_raw(Box::new(GirgLabGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `g` must come from [`girg_lab_graph_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_free(g: *mut GirgLabGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_num_vertices(g: *const GirgLabGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.graph.n() as u64)
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_num_edges(g: *const GirgLabGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.graph.edge_count() as u64)
}

/// The caller guarantees `g` outlives `'a`.
unsafe fn vertex<'a>(g: *const GirgLabGraph, v: u64) -> Result<&'a Graph, (GirgLabStatus, String)> {
    let g = unsafe { g.as_ref() }.ok_or_else(|| null("graph"))?;
    if v >= g.graph.n() as u64 {
        return Err((GirgLabStatus::InvalidArgument, format!("vertex {v} out of range")));
    }
    Ok(&g.graph)
}

/// Copy the neighbours of `v` into `buf`. `*len` receives the degree; when it
/// exceeds `cap` nothing is copied and `BufferTooSmall` is returned.
///
/// # Safety
/// `g` must be a live handle, `buf` valid for `cap` writes, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_neighbors(
    g: *const GirgLabGraph,
    v: u64,
    buf: *mut u32,
    cap: u64,
    len: *mut u64,
) -> GirgLabStatus {
    guard(|| {
        let graph = unsafe { vertex(g, v) }?;
        let len = unsafe { len.as_mut() }.ok_or_else(|| null("len"))?;
        let nb = graph.neighbors(v as usize);
        *len = nb.len() as u64;
        if nb.len() as u64 > cap {
            return Err((GirgLabStatus::BufferTooSmall, format!("need {} slots", nb.len())));
        }
        if !nb.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            unsafe { ptr::copy_nonoverlapping(nb.as_ptr(), buf, nb.len()) };
        }
        Ok(())
    })
}

/// Weight of `v` and its `d` coordinates into `pos` (length at least `d`).
///
/// # Safety
/// `g` must be a live handle; `weight` and `pos` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_graph_vertex(
    g: *const GirgLabGraph,
    v: u64,
    weight: *mut f64,
    pos: *mut f64,
    cap: u64,
) -> GirgLabStatus {
    guard(|| {
        let graph = unsafe { vertex(g, v) }?;
        let weight = unsafe { weight.as_mut() }.ok_or_else(|| null("weight"))?;
        let x = graph.position(v as usize);
        if (x.len() as u64) > cap {
            return Err((GirgLabStatus::BufferTooSmall, format!("need {} slots", x.len())));
        }
        if pos.is_null() {
            return Err(null("pos"));
        }
        *weight = graph.weight(v as usize);
        unsafe { ptr::copy_nonoverlapping(x.as_ptr(), pos, x.len()) };
        Ok(())
    })
}

/// Majority dynamics from a centred square; `max_steps = 0` picks the
/// default `100·n·ln n`.
///
/// # Safety
/// `g` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_simulate_square(
    g: *const GirgLabGraph,
    side: f64,
    seed: u64,
    max_steps: u64,
    out: *mut GirgLabRunResult,
) -> GirgLabStatus {
    guard(|| {
        let g = unsafe { g.as_ref() }.ok_or_else(|| null("graph"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let opts = RunOptions {
            max_steps: if max_steps == 0 { default_max_steps(g.graph.n()) } else { max_steps },
            criterion: SurvivalCriterion::default(),
        };
        let (cfg, stats) = lift(simulate(&g.graph, &InitialShape::Square { side }, seed, &opts))?;
        *out = GirgLabRunResult {
            steps_taken: stats.steps_taken,
            flips: stats.flips,
            final_blue_count: stats.final_blue_count as u64,
            largest_blue_component: largest_blue_component(&g.graph, &cfg) as u64,
            stable: stats.stable,
            survived: stats.survived,
        };
        Ok(())
    })
}

/// Smallest `k` for which the explicit subsolution exists.
#[no_mangle]
pub extern "C" fn girg_lab_k_min(d: u32, tau: f64) -> f64 {
    if d == 0 || !(tau > 2.0) {
        return f64::NAN;
    }
    theory::k_min(d as usize, tau)
}

/// Root of `δ = Φ(y(δ - 1/2))` above 1/2; `InvalidArgument` when `y <= √π`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_delta_star(y: f64, out: *mut f64) -> GirgLabStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = theory::solve_delta_star(y)
            .ok_or_else(|| (GirgLabStatus::InvalidArgument, format!("no root above 1/2 for y = {y}")))?;
        Ok(())
    })
}

/// Iterate the half-space operator from the indicator and report the
/// survival margin and the number of iterations.
///
/// # Safety
/// `margin` and `iterations` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn girg_lab_halfspace_margin(
    d: u32,
    tau: f64,
    k: f64,
    w_cap: f64,
    max_iter: u64,
    tol: f64,
    margin: *mut f64,
    iterations: *mut u64,
) -> GirgLabStatus {
    guard(|| {
        let margin = unsafe { margin.as_mut() }.ok_or_else(|| null("margin"))?;
        let iterations = unsafe { iterations.as_mut() }.ok_or_else(|| null("iterations"))?;
        let p = lift(MeanFieldParams::halfspace(d as usize, tau, k, w_cap))?;
        let f0 = lift(Profile::halfspace_indicator(p))?;
        let it = lift(meanfield::iterate(&f0, max_iter as usize, tol))?;
        *margin = lift(meanfield::survival_margin(&it.profile))?;
        *iterations = it.iterations as u64;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last() -> String {
        unsafe { CStr::from_ptr(girg_lab_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn error_string_follows_status() {
        let mut g = ptr::null_mut();
        let s = unsafe { girg_lab_graph_new(100, 2, 2.0, 1.0, 1, &mut g) };
        assert_eq!(s, GirgLabStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(last().contains("tau > 2"));
        let s = unsafe { girg_lab_graph_new(100, 2, 3.0, 1.0, 1, &mut g) };
        assert_eq!(s, GirgLabStatus::Ok);
        assert_eq!(last(), "");
        unsafe { girg_lab_graph_free(g) };
    }

    #[test]
    fn null_pointers_rejected() {
        assert_eq!(unsafe { girg_lab_delta_star(2.0, ptr::null_mut()) }, GirgLabStatus::NullPointer);
        assert_eq!(unsafe { girg_lab_graph_num_vertices(ptr::null()) }, 0);
        unsafe { girg_lab_graph_free(ptr::null_mut()) };
    }
}
