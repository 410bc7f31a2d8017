//! C interface to `respoly`.
//!
//! Problems and solutions cross the boundary as opaque handles. Every
//! fallible call returns an [`RpStatus`]; on failure the message is kept per
//! thread and read back with [`rp_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use respoly::bands::{band_set, widom_factor};
use respoly::potential::{self, PoleData};
use respoly::realset::NormalizedProblem;
use respoly::solver::{solve_residual, ResidualSolution, SolveOptions};
use respoly::{Complex64, Error};

/// Result codes. The first four match the exit codes of the CLI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    InvalidInput = 1,
    Numerical = 2,
    Invariant = 3,
    NullPointer = 4,
    /// The output buffer is too short; the needed length was written.
    BufferTooSmall = 5,
    Panic = 6,
}

/// A set of intervals with a point `x0` off the set.
pub struct RpProblem {
    problem: NormalizedProblem,
}

/// A solved residual polynomial.
pub struct RpSolution {
    sol: ResidualSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(RpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidInput(_) => RpStatus::InvalidInput,
            Error::Numerical { .. } => RpStatus::Numerical,
            Error::Invariant(_) => RpStatus::Invariant,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RpStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copies `data` into `buf` when it fits. `len` always receives the length.
unsafe fn fill(data: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> Result<(), Fail> {
    put(len, data.len(), "len")?;
    if data.len() > cap {
        return Err(Fail(RpStatus::BufferTooSmall, format!("need {} values, buffer holds {cap}", data.len())));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next `rp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a problem from `count` intervals given as `[lo0, hi0, lo1, hi1, ...]`.
///
/// # Safety
/// `intervals` must point to `2 * count` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_new(intervals: *const f64, count: usize, x0: f64, out: *mut *mut RpProblem) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if intervals.is_null() && count > 0 {
            return Err(null("intervals"));
        }
        let flat = if count == 0 { &[][..] } else { std::slice::from_raw_parts(intervals, 2 * count) };
        let raw: Vec<(f64, f64)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let problem = NormalizedProblem::new(&raw, x0)?;
        out.write(Box::into_raw(Box::new(RpProblem { problem })));
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from `rp_problem_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_free(problem: *mut RpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of intervals after merging overlaps.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_components(problem: *const RpProblem, out: *mut usize) -> RpStatus {
    guard(|| {
        let p = get(problem, "problem")?;
        put(out, p.problem.set.components(), "out")
    })
}

/// Green's function of the set with pole at infinity, at `re + i·im`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_green(problem: *const RpProblem, re: f64, im: f64, out: *mut f64) -> RpStatus {
    guard(|| {
        let p = get(problem, "problem")?;
        let g = potential::equilibrium(&p.problem.set)?.green(Complex64::new(re, im))?;
        put(out, g, "out")
    })
}

/// Logarithmic capacity of the set.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_capacity(problem: *const RpProblem, out: *mut f64) -> RpStatus {
    guard(|| {
        let p = get(problem, "problem")?;
        put(out, potential::equilibrium(&p.problem.set)?.capacity(), "out")
    })
}

/// Parreau–Widom constant of the set for the pole `x0`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_problem_pw(problem: *const RpProblem, out: *mut f64) -> RpStatus {
    guard(|| {
        let p = get(problem, "problem")?;
        put(out, potential::pw_constant(&p.problem.set, p.problem.x0)?, "out")
    })
}

/// Solves for the residual polynomial of degree at most `n`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solve(problem: *const RpProblem, n: usize, out: *mut *mut RpSolution) -> RpStatus {
    guard(|| {
        let p = get(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = solve_residual(&p.problem, n, &SolveOptions::default())?;
        out.write(Box::into_raw(Box::new(RpSolution { sol })));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from `rp_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_free(solution: *mut RpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Sup norm of the residual polynomial on the set.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_norm(solution: *const RpSolution, out: *mut f64) -> RpStatus {
    guard(|| put(out, get(solution, "solution")?.sol.r, "out"))
}

/// Effective degree, `n` or `n - 1`.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_degree(solution: *const RpSolution, out: *mut usize) -> RpStatus {
    guard(|| put(out, get(solution, "solution")?.sol.d_n, "out"))
}

/// Value of the residual polynomial at `x`.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_eval(solution: *const RpSolution, x: f64, out: *mut f64) -> RpStatus {
    guard(|| put(out, get(solution, "solution")?.sol.eval(x), "out"))
}

/// Coefficients in the Chebyshev basis of the hull `[lo, hi]`, see
/// `rp_solution_basis`. Writes the count to `len`; fails with
/// `RP_STATUS_BUFFER_TOO_SMALL` when `cap` is short.
///
/// # Safety
/// `solution` must be a live handle, `buf` must hold `cap` doubles and `len`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_coefficients(solution: *const RpSolution, buf: *mut f64, cap: usize, len: *mut usize) -> RpStatus {
    guard(|| fill(get(solution, "solution")?.sol.poly.coeffs(), buf, cap, len))
}

/// Interval of the Chebyshev basis used by `rp_solution_coefficients`.
///
/// # Safety
/// `solution` must be a live handle, `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_basis(solution: *const RpSolution, lo: *mut f64, hi: *mut f64) -> RpStatus {
    guard(|| {
        let b = get(solution, "solution")?.sol.poly.basis_interval();
        put(lo, b.lo, "lo")?;
        put(hi, b.hi, "hi")
    })
}

/// Bands `{|R| ≤ r}` as `[lo0, hi0, lo1, hi1, ...]`; `len` receives the
/// number of doubles.
///
/// # Safety
/// `solution` must be a live handle, `buf` must hold `cap` doubles and `len`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_bands(solution: *const RpSolution, buf: *mut f64, cap: usize, len: *mut usize) -> RpStatus {
    guard(|| {
        let s = &get(solution, "solution")?.sol;
        let flat: Vec<f64> = if s.d_n == 0 {
            Vec::new()
        } else {
            band_set(s)?.bands.iter().flat_map(|b| [b.lo, b.hi]).collect()
        };
        fill(&flat, buf, cap, len)
    })
}

/// Widom factor `W_n` of the solution.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_solution_widom(solution: *const RpSolution, out: *mut f64) -> RpStatus {
    guard(|| {
        let s = &get(solution, "solution")?.sol;
        let pd = PoleData::new(&s.problem.set, s.problem.x0)?;
        put(out, widom_factor(&s.problem, s, &pd)?.w_n, "out")
    })
}
