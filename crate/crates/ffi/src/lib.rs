//! C bindings for `sensopt`.
//!
//! Every function returns a [`SoptStatus`]; on failure a message is available
//! from [`sopt_last_error`] on the calling thread. Handles are opaque and
//! must be released with their `_free` function. Coordinate lists for Sobol
//! subsets are 1-based; QCQP ball positions are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensopt::constraints::Ball;
use sensopt::optimizer::{self, RunConfig, RunResult, Termination};
use sensopt::{basis, qcqp, saltelli, BasisConfig, Error, Experiment, QcqpProblem, SobolConstraint, SolveStatus};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A point lies outside `[-1, 1]^d`.
    Domain = 3,
    /// The objective returned NaN or infinity.
    NonFinite = 4,
    /// The input carries no information, e.g. a constant objective.
    Degenerate = 5,
    IndexOutOfRange = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoptTermination {
    Budget = 0,
    ModelInconsistent = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoptSolveStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
    MaxIter = 3,
}

/// Scalar results of [`sopt_qcqp_solve`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SoptQcqpOutcome {
    pub status: SoptSolveStatus,
    pub value: f64,
    pub gap: f64,
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

/// Objective callback: `x` has `dim` entries in `[-1, 1]`.
pub type SoptObjective = Option<unsafe extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

/// List of Sobol constraints for a fixed dimension.
pub struct SoptConstraints {
    dim: usize,
    list: Vec<SobolConstraint>,
}

/// Outcome of [`sopt_run`].
pub struct SoptRunResult {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> SoptStatus {
    match err {
        Error::Domain { .. } => SoptStatus::Domain,
        Error::NonFinite(_) | Error::NonFiniteObjective { .. } => SoptStatus::NonFinite,
        Error::Degenerate(_) => SoptStatus::Degenerate,
        _ => SoptStatus::InvalidArgument,
    }
}

fn fail(status: SoptStatus, msg: impl Into<String>) -> SoptStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> SoptStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `f`, turning panics into [`SoptStatus::Panic`].
fn guard(f: impl FnOnce() -> SoptStatus) -> SoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SoptStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn slice_or_empty<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn wrap_objective(f: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64, user_data: *mut c_void) -> impl Fn(&[f64]) -> f64 {
    let ud = user_data as usize;
    move |x: &[f64]| unsafe { f(x.as_ptr(), x.len(), ud as *mut c_void) }
}

/// Message describing the last failure on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sopt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sopt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Unit-variance Legendre polynomial of degree `n` at `x`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sopt_psi(n: usize, x: f64, out: *mut f64) -> SoptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoptStatus::NullPointer, "out is null");
        }
        match basis::psi(n, x) {
            Ok(v) => {
                *out = v;
                SoptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Empty constraint list for dimension `dim`; null on invalid `dim`.
#[no_mangle]
pub extern "C" fn sopt_constraints_new(dim: usize) -> *mut SoptConstraints {
    if dim == 0 || dim > sensopt::Subset::MAX_DIM {
        set_error(format!("unsupported dimension {dim}"));
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(SoptConstraints { dim, list: Vec::new() }))
}

/// Constraints of experiment `tag` (`'A'` to `'D'`, dimension 3).
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sopt_constraints_preset(tag: c_char, out: *mut *mut SoptConstraints) -> SoptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoptStatus::NullPointer, "out is null");
        }
        let tag = (tag as u8 as char).to_string();
        match tag.parse::<Experiment>() {
            Ok(e) => {
                *out = Box::into_raw(Box::new(SoptConstraints {
                    dim: 3,
                    list: e.constraints(),
                }));
                SoptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Appends the constraint `sum_{u in family} S_u <= bound`. The family has
/// `n_sets` subsets; subset `k` has `set_lengths[k]` 1-based coordinates,
/// stored consecutively in `members`. A zero bound eliminates the family.
///
/// # Safety
/// `h` must come from this library; `members` must hold the sum of
/// `set_lengths` entries and `set_lengths` must hold `n_sets` entries.
#[no_mangle]
pub unsafe extern "C" fn sopt_constraints_add(
    h: *mut SoptConstraints,
    members: *const usize,
    set_lengths: *const usize,
    n_sets: usize,
    bound: f64,
) -> SoptStatus {
    guard(|| {
        let Some(h) = h.as_mut() else {
            return fail(SoptStatus::NullPointer, "constraints handle is null");
        };
        let Some(lengths) = slice_or_empty(set_lengths, n_sets) else {
            return fail(SoptStatus::NullPointer, "set_lengths is null");
        };
        let total: usize = lengths.iter().sum();
        let Some(members) = slice_or_empty(members, total) else {
            return fail(SoptStatus::NullPointer, "members is null");
        };
        let mut family: Vec<&[usize]> = Vec::with_capacity(n_sets);
        let mut offset = 0;
        for &len in lengths {
            family.push(&members[offset..offset + len]);
            offset += len;
        }
        match SobolConstraint::from_members(&family, bound, h.dim) {
            Ok(c) => {
                h.list.push(c);
                SoptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of constraints in the list (0 for a null handle).
///
/// # Safety
/// `h` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sopt_constraints_len(h: *const SoptConstraints) -> usize {
    h.as_ref().map_or(0, |h| h.list.len())
}

/// # Safety
/// `h` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sopt_constraints_free(h: *mut SoptConstraints) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Minimizes `f` over `[-1, 1]^dim` with `budget` certification solves.
/// `constraints` may be null for no constraints; otherwise its dimension must
/// equal `dim`.
///
/// # Safety
/// `constraints` must be null or come from this library; `f` must be safe to
/// call with `user_data`; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sopt_run(
    dim: usize,
    degree: usize,
    budget: usize,
    seed: u64,
    constraints: *const SoptConstraints,
    f: SoptObjective,
    user_data: *mut c_void,
    out: *mut *mut SoptRunResult,
) -> SoptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoptStatus::NullPointer, "out is null");
        }
        let Some(f) = f else {
            return fail(SoptStatus::NullPointer, "objective is null");
        };
        let list = match constraints.as_ref() {
            Some(c) if c.dim != dim => {
                return fail(
                    SoptStatus::InvalidArgument,
                    format!("constraints are for dimension {}, run has {dim}", c.dim),
                )
            }
            Some(c) => c.list.clone(),
            None => Vec::new(),
        };
        let basis = match BasisConfig::new(dim, degree) {
            Ok(b) => b,
            Err(e) => return from_error(e),
        };
        let cfg = RunConfig::new(basis, budget, list, seed);
        match optimizer::run(wrap_objective(f, user_data), &cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SoptRunResult { inner }));
                SoptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `r` must be null or come from [`sopt_run`].
#[no_mangle]
pub unsafe extern "C" fn sopt_result_n_eval(r: *const SoptRunResult) -> usize {
    r.as_ref().map_or(0, |r| r.inner.n_eval)
}

/// Best objective value; NaN for a null handle.
///
/// # Safety
/// `r` must be null or come from [`sopt_run`].
#[no_mangle]
pub unsafe extern "C" fn sopt_result_m_best(r: *const SoptRunResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.m_best)
}

/// # Safety
/// `r` must be null or come from [`sopt_run`].
#[no_mangle]
pub unsafe extern "C" fn sopt_result_solves_used(r: *const SoptRunResult) -> usize {
    r.as_ref().map_or(0, |r| r.inner.solves_used)
}

/// # Safety
/// `r` must be null or come from [`sopt_run`].
#[no_mangle]
pub unsafe extern "C" fn sopt_result_termination(r: *const SoptRunResult) -> SoptTermination {
    match r.as_ref().map(|r| r.inner.termination) {
        Some(Termination::ModelInconsistent) => SoptTermination::ModelInconsistent,
        _ => SoptTermination::Budget,
    }
}

/// Copies evaluation `i` (0-based, in evaluation order) into `x_out`
/// (`x_len` entries, at least the dimension) and `y_out`.
///
/// # Safety
/// `r` must come from [`sopt_run`]; `x_out` must be valid for `x_len` writes
/// and `y_out` for one.
#[no_mangle]
pub unsafe extern "C" fn sopt_result_point(
    r: *const SoptRunResult,
    i: usize,
    x_out: *mut f64,
    x_len: usize,
    y_out: *mut f64,
) -> SoptStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(SoptStatus::NullPointer, "result handle is null");
        };
        if x_out.is_null() || y_out.is_null() {
            return fail(SoptStatus::NullPointer, "output buffer is null");
        }
        let points = r.inner.history.points();
        let Some((x, y)) = points.get(i) else {
            return fail(
                SoptStatus::IndexOutOfRange,
                format!("point {i} requested, history has {}", points.len()),
            );
        };
        if x_len < x.len() {
            return fail(SoptStatus::InvalidArgument, format!("x_out needs {} entries", x.len()));
        }
        slice::from_raw_parts_mut(x_out, x.len()).copy_from_slice(x);
        *y_out = *y;
        SoptStatus::Ok
    })
}

/// # Safety
/// `r` must be null or come from [`sopt_run`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sopt_result_free(r: *mut SoptRunResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// First-order and total Sobol indices of `f` by pick-freeze Monte Carlo
/// with `n_base` base samples; writes `dim` entries to each output.
///
/// # Safety
/// `f` must be safe to call with `user_data`; `first_order` and `total` must
/// be valid for `dim` writes.
#[no_mangle]
pub unsafe extern "C" fn sopt_sensitivity(
    f: SoptObjective,
    user_data: *mut c_void,
    dim: usize,
    n_base: usize,
    seed: u64,
    first_order: *mut f64,
    total: *mut f64,
) -> SoptStatus {
    guard(|| {
        let Some(f) = f else {
            return fail(SoptStatus::NullPointer, "objective is null");
        };
        if first_order.is_null() || total.is_null() {
            return fail(SoptStatus::NullPointer, "output buffer is null");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match saltelli::estimate(wrap_objective(f, user_data), dim, n_base, &mut rng) {
            Ok(est) => {
                slice::from_raw_parts_mut(first_order, dim).copy_from_slice(&est.first_order);
                slice::from_raw_parts_mut(total, dim).copy_from_slice(&est.total);
                SoptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Minimizes `c.z` subject to `A z = b` (`A` is `m x n`, row-major) and
/// `n_balls` constraints `sum_{p in P_j} z_p^2 <= radii_sq[j]`. Ball `j` has
/// `ball_lengths[j]` 0-based positions stored consecutively in
/// `ball_positions`. `z_out` (`n` entries, may be null) receives the
/// minimizer when the status is optimal.
///
/// # Safety
/// All arrays must hold the stated number of entries; `out` must be valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn sopt_qcqp_solve(
    n: usize,
    c: *const f64,
    m: usize,
    a: *const f64,
    b: *const f64,
    n_balls: usize,
    ball_positions: *const usize,
    ball_lengths: *const usize,
    radii_sq: *const f64,
    tol: f64,
    out: *mut SoptQcqpOutcome,
    z_out: *mut f64,
) -> SoptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SoptStatus::NullPointer, "out is null");
        }
        let (Some(c), Some(a), Some(b), Some(lengths), Some(radii)) = (
            slice_or_empty(c, n),
            slice_or_empty(a, m * n),
            slice_or_empty(b, m),
            slice_or_empty(ball_lengths, n_balls),
            slice_or_empty(radii_sq, n_balls),
        ) else {
            return fail(SoptStatus::NullPointer, "input array is null");
        };
        let total: usize = lengths.iter().sum();
        let Some(positions) = slice_or_empty(ball_positions, total) else {
            return fail(SoptStatus::NullPointer, "ball_positions is null");
        };
        let mut balls = Vec::with_capacity(n_balls);
        let mut offset = 0;
        for (&len, &r) in lengths.iter().zip(radii) {
            balls.push(Ball {
                positions: positions[offset..offset + len].to_vec(),
                radius_sq: r,
            });
            offset += len;
        }
        let problem = QcqpProblem {
            c: DVector::from_column_slice(c),
            a: DMatrix::from_row_slice(m, n, a),
            b: DVector::from_column_slice(b),
            balls,
        };
        let sol = match qcqp::solve(&problem, tol) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let status = match sol.status {
            SolveStatus::Optimal => SoptSolveStatus::Optimal,
            SolveStatus::Infeasible => SoptSolveStatus::Infeasible,
            SolveStatus::Unbounded => SoptSolveStatus::Unbounded,
            SolveStatus::MaxIter => SoptSolveStatus::MaxIter,
        };
        if let (false, Some(z)) = (z_out.is_null(), &sol.z) {
            slice::from_raw_parts_mut(z_out, n).copy_from_slice(z.as_slice());
        }
        *out = SoptQcqpOutcome {
            status,
            value: sol.value,
            gap: sol.gap,
            kkt_residual: sol.kkt_residual,
            newton_steps: sol.newton_steps,
        };
        SoptStatus::Ok
    })
}

/// Reads a NUL-terminated string; used by tests.
#[doc(hidden)]
pub fn last_error_string() -> String {
    unsafe { CStr::from_ptr(sopt_last_error()) }.to_string_lossy().into_owned()
}
