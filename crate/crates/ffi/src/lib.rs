//! C ABI over the `softsched` crate.
//!
//! Every fallible function returns an [`SsStatus`]; on anything but
//! `SS_STATUS_OK` a message is stored for the calling thread and can be
//! fetched with [`ss_last_error_message`]. Objects cross the boundary as
//! opaque handles that the caller releases with the matching `*_free`
//! function. Strings returned to C are owned by the caller and released with
//! [`ss_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use softsched::coloring::{coloring_slots, default_order, greedy_color};
use softsched::components::DEFAULT_COMPONENT_CAP;
use softsched::conflict::{ConflictFixture, ConflictGraph};
use softsched::game::{soft_schedule, OracleConfig, SoftSchedule, Solver, SolverConfig};
use softsched::harness::{render_table_csv, Experiment, ExperimentConfig};
use softsched::topology::RateVector;
use softsched::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ResourceLimit = 3,
    Unsupported = 4,
    Io = 5,
    Parse = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsSolver {
    FictitiousPlay = 0,
    Exact = 1,
}

/// Opaque conflict graph.
pub struct SsConflictGraph {
    inner: ConflictGraph,
}

/// Opaque soft-coloring result: components, game solution and slot list.
pub struct SsSchedule {
    inner: SoftSchedule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SsStatus {
    match e.root() {
        Error::InvalidArgument(_) => SsStatus::InvalidArgument,
        Error::ResourceLimit { .. } => SsStatus::ResourceLimit,
        Error::Unsupported(_) => SsStatus::Unsupported,
        Error::Io { .. } => SsStatus::Io,
        Error::Parse { .. } => SsStatus::Parse,
        Error::Instance { .. } => unreachable!("root strips instance context"),
    }
}

struct Failure(SsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SsStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_owned());
            SsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(SsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn read_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SsStatus::InvalidArgument, "output contains a NUL byte".to_owned()))
}

/// Message for the last failed call on this thread, or NULL when the last
/// call succeeded. Release with [`ss_string_free`].
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a conflict graph on `n_links` links from `n_pairs` index pairs
/// stored flat in `pairs` (`2 * n_pairs` entries).
///
/// # Safety
/// `pairs` must point to `2 * n_pairs` readable values (it may be NULL when
/// `n_pairs` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_conflict_graph_new(
    n_links: usize,
    pairs: *const usize,
    n_pairs: usize,
    out: *mut *mut SsConflictGraph,
) -> SsStatus {
    guard(|| {
        let flat = read_slice(pairs, n_pairs * 2, "pairs")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let inner = ConflictGraph::from_pairs(n_links, &pairs)?;
        write_out(out, Box::into_raw(Box::new(SsConflictGraph { inner })), "out")
    })
}

/// Parses a conflict-graph JSON document (`n_links`, `conflicts`, optional
/// `rates`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_conflict_graph_from_json(json: *const c_char, out: *mut *mut SsConflictGraph) -> SsStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let inner = ConflictFixture::from_json(text)?.graph()?;
        write_out(out, Box::into_raw(Box::new(SsConflictGraph { inner })), "out")
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_conflict_graph_free(g: *mut SsConflictGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of links, or 0 for a NULL handle.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_conflict_graph_n_links(g: *const SsConflictGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n_links())
}

/// Writes whether links `a` and `b` conflict.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_conflict_graph_conflicts(
    g: *const SsConflictGraph,
    a: usize,
    b: usize,
    out: *mut bool,
) -> SsStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        let n = g.n_links();
        if a >= n || b >= n {
            return Err(Failure(
                SsStatus::InvalidArgument,
                format!("link pair ({a}, {b}) outside 0..{n}"),
            ));
        }
        write_out(out, g.conflicts(a, b), "out")
    })
}

/// Slots used by greedy coloring in link-index order.
///
/// # Safety
/// `g` must be a live handle, `rates` must point to one value per link and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_coloring_slots(
    g: *const SsConflictGraph,
    rates: *const u32,
    n_rates: usize,
    out: *mut u64,
) -> SsStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        let rates = rate_vector(g, rates, n_rates)?;
        let coloring = greedy_color(g, &default_order(g.n_links()))?;
        write_out(out, coloring_slots(&coloring, &rates), "out")
    })
}

unsafe fn rate_vector(g: &ConflictGraph, rates: *const u32, n_rates: usize) -> Result<RateVector, Failure> {
    if n_rates != g.n_links() {
        return Err(Failure(
            SsStatus::InvalidArgument,
            format!("{n_rates} rates for {} links", g.n_links()),
        ));
    }
    Ok(RateVector::new(read_slice(rates, n_rates, "rates")?.to_vec()))
}

/// Soft-colors `g` for the given link rates. `delta` and `max_iterations`
/// configure fictitious play and are ignored by the exact solver; pass 0 for
/// either to use its default.
///
/// # Safety
/// `g` must be a live handle, `rates` must point to one value per link and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_soft_schedule(
    g: *const SsConflictGraph,
    rates: *const u32,
    n_rates: usize,
    solver: SsSolver,
    delta: f64,
    max_iterations: u64,
    out: *mut *mut SsSchedule,
) -> SsStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        let rates = rate_vector(g, rates, n_rates)?;
        let solver = match solver {
            SsSolver::FictitiousPlay => {
                let defaults = SolverConfig::default();
                let cfg = SolverConfig {
                    delta: if delta == 0.0 { defaults.delta } else { delta },
                    max_iterations: if max_iterations == 0 {
                        defaults.max_iterations
                    } else {
                        max_iterations
                    },
                };
                cfg.validate()?;
                Solver::FictitiousPlay(cfg)
            }
            SsSolver::Exact => Solver::Exact(OracleConfig::default()),
        };
        let inner = soft_schedule(g, &rates, &solver, DEFAULT_COMPONENT_CAP)?;
        write_out(out, Box::into_raw(Box::new(SsSchedule { inner })), "out")
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_free(s: *mut SsSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Schedule length in slots, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_length(s: *const SsSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.inner.schedule.length())
}

/// Number of maximal components the schedule draws from, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_n_components(s: *const SsSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.inner.components.len())
}

/// Component index active in slot `slot`.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_slot(s: *const SsSchedule, slot: usize, out: *mut usize) -> SsStatus {
    guard(|| {
        let slots = &s.as_ref().ok_or_else(|| null("schedule"))?.inner.schedule.slots;
        let c = *slots.get(slot).ok_or_else(|| {
            Failure(
                SsStatus::InvalidArgument,
                format!("slot {slot} outside 0..{}", slots.len()),
            )
        })?;
        write_out(out, c, "out")
    })
}

/// Copies the links of component `component` into `buf` (capacity `cap`)
/// and writes the member count to `len`. When `cap` is too small nothing is
/// copied, `len` still receives the size, and the call fails with
/// `SS_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `s` must be a live handle, `buf` must have room for `cap` values (it may
/// be NULL when `cap` is 0) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_component(
    s: *const SsSchedule,
    component: usize,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> SsStatus {
    guard(|| {
        let comps = &s.as_ref().ok_or_else(|| null("schedule"))?.inner.components;
        let members = comps
            .get(component)
            .ok_or_else(|| {
                Failure(
                    SsStatus::InvalidArgument,
                    format!("component {component} outside 0..{}", comps.len()),
                )
            })?
            .members();
        write_out(len, members.len(), "len")?;
        if members.len() > cap {
            return Err(Failure(
                SsStatus::InvalidArgument,
                format!("component has {} links, buffer holds {cap}", members.len()),
            ));
        }
        if !members.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(members.as_ptr(), buf, members.len());
        }
        Ok(())
    })
}

/// Bracket on the game value and the iteration count (0 for the exact
/// solver). Any output pointer may be NULL.
///
/// # Safety
/// `s` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_game_value(
    s: *const SsSchedule,
    lower: *mut f64,
    upper: *mut f64,
    iterations: *mut u64,
) -> SsStatus {
    guard(|| {
        let sol = &s.as_ref().ok_or_else(|| null("schedule"))?.inner.solution;
        if !lower.is_null() {
            lower.write(sol.value_lower);
        }
        if !upper.is_null() {
            upper.write(sol.value_upper);
        }
        if !iterations.is_null() {
            iterations.write(sol.iterations);
        }
        Ok(())
    })
}

/// Runs a full sweep described by a JSON experiment config and returns the
/// aggregated CSV table in `out_csv`. Release it with [`ss_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run_sweep_json(config_json: *const c_char, out_csv: *mut *mut c_char) -> SsStatus {
    guard(|| {
        if out_csv.is_null() {
            return Err(null("out_csv"));
        }
        let cfg = ExperimentConfig::from_json(read_str(config_json, "config_json")?)?;
        let output = Experiment::new(cfg)?.run_sweep()?;
        write_out(out_csv, to_c_string(render_table_csv(&output.table))?, "out_csv")
    })
}
