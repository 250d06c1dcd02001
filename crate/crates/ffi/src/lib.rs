//! C ABI over the fracuq solver, quadrature and sampling code.
//!
//! Conventions:
//! * every fallible call returns a [`FracuqStatus`]; on failure a message is
//!   kept per thread and read with [`fracuq_last_error`];
//! * objects are opaque handles created by `fracuq_*_new`/constructor calls
//!   and released with the matching `fracuq_*_free`;
//! * array outputs are caller-allocated; the required length is documented
//!   on each function (or queried from the handle).
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fracuq::fractional::{BasisSpec, FractionalOrder};
use fracuq::noise::kl_coefficients;
use fracuq::orthopoly::{gauss_jacobi, JacobiParams};
use fracuq::pgsolver::{
    assemble, evaluate, manufactured_problem, solve_direct, solve_fast, DeterministicProblem, Forcing, ManufacturedCase, OperatorMode,
    SpectralSolution,
};
use fracuq::randomspace::{monte_carlo_set, smolyak_grid, tensor_grid, Dimension, RandomParameterSpace, SampleSet};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracuqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracuqMode {
    TwoSided = 0,
    LeftOnly = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracuqCase {
    IvpPower = 0,
    PdeOneSided = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracuqMethod {
    Fast = 0,
    Direct = 1,
}

/// Forcing `h(t, x)`; called concurrently, so it must be thread-safe.
pub type FracuqForcingFn = Option<unsafe extern "C" fn(t: f64, x: *const f64, dims: usize, user: *mut c_void) -> f64>;

/// A deterministic problem ready to assemble.
pub struct FracuqProblem(DeterministicProblem);

/// Spectral coefficients of a solved problem.
pub struct FracuqSolution(SpectralSolution);

/// Points (and weights, for collocation sets) in a random space.
pub struct FracuqSampleSet(SampleSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FracuqStatus, msg: impl Into<String>) -> FracuqStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> FracuqStatus) -> FracuqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(FracuqStatus::Panic, msg)
        }
    }
}

unsafe fn input<'a, T>(p: *const T, n: usize) -> Option<&'a [T]> {
    if n == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(p, n))
    }
}

unsafe fn output<'a, T>(p: *mut T, n: usize) -> Option<&'a mut [T]> {
    if n == 0 {
        Some(&mut [])
    } else if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts_mut(p, n))
    }
}

fn boxed<T>(value: T, out: *mut *mut T) -> FracuqStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    FracuqStatus::Ok
}

macro_rules! need {
    ($e:expr, $what:literal) => {
        match $e {
            Some(v) => v,
            None => return fail(FracuqStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! check {
    ($e:expr, $status:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail($status, err.to_string()),
        }
    };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fracuq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fracuq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `m`-point Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b`; both output
/// arrays hold `m` values.
#[no_mangle]
pub unsafe extern "C" fn fracuq_gauss_jacobi(a: f64, b: f64, m: usize, nodes: *mut f64, weights: *mut f64) -> FracuqStatus {
    guard(|| {
        let nodes = need!(output(nodes, m), "nodes");
        let weights = need!(output(weights, m), "weights");
        let p = check!(JacobiParams::new(a, b), FracuqStatus::InvalidArgument);
        let rule = check!(gauss_jacobi(p, m), FracuqStatus::InvalidArgument);
        nodes.copy_from_slice(rule.nodes());
        weights.copy_from_slice(rule.weights());
        FracuqStatus::Ok
    })
}

/// First `m` Karhunen-Loève coefficients `a_k` of the sine-Fourier noise model.
#[no_mangle]
pub unsafe extern "C" fn fracuq_kl_coefficients(length: f64, correlation: f64, m: usize, out: *mut f64) -> FracuqStatus {
    guard(|| {
        let out = need!(output(out, m), "out");
        let a = check!(kl_coefficients(length, correlation, m), FracuqStatus::InvalidArgument);
        out.copy_from_slice(&a);
        FracuqStatus::Ok
    })
}

struct Callback {
    f: unsafe extern "C" fn(f64, *const f64, usize, *mut c_void) -> f64,
    user: *mut c_void,
}

// The caller promises a thread-safe callback (see `FracuqForcingFn`).
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, t: f64, x: &[f64]) -> f64 {
        unsafe { (self.f)(t, x.as_ptr(), x.len(), self.user) }
    }
}

/// Problem `D_t^α u ± Σ k_j D^{β_j} u + γ u = h`.
///
/// `intervals` holds `2·dims` values `a_1, b_1, …`; `betas`, `ks` and
/// `spatial_counts` hold `dims` values. `tau < 0` selects `α/2`.
#[no_mangle]
pub unsafe extern "C" fn fracuq_problem_new(
    alpha: f64,
    dims: usize,
    betas: *const f64,
    ks: *const f64,
    intervals: *const f64,
    horizon: f64,
    temporal_count: usize,
    spatial_counts: *const usize,
    tau: f64,
    gamma: f64,
    mode: FracuqMode,
    forcing: FracuqForcingFn,
    user: *mut c_void,
    out: *mut *mut FracuqProblem,
) -> FracuqStatus {
    guard(|| {
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let betas = need!(input(betas, dims), "betas");
        let ks = need!(input(ks, dims), "ks");
        let iv = need!(input(intervals, 2 * dims), "intervals");
        let counts = need!(input(spatial_counts, dims), "spatial_counts");
        let f = need!(forcing, "forcing");
        let tau = if tau < 0.0 { alpha / 2.0 } else { tau };
        let intervals: Vec<(f64, f64)> = iv.chunks(2).map(|c| (c[0], c[1])).collect();
        let basis = check!(
            BasisSpec::new(temporal_count, counts.to_vec(), tau, horizon, intervals),
            FracuqStatus::InvalidArgument
        );
        let a = check!(FractionalOrder::temporal(alpha), FracuqStatus::InvalidArgument);
        let b = check!(
            betas.iter().map(|&v| FractionalOrder::spatial(v)).collect::<Result<Vec<_>, _>>(),
            FracuqStatus::InvalidArgument
        );
        let cb = Callback { f, user };
        let label = format!("ffi_callback:{:x}:{:x}", f as usize, user as usize);
        let h = Forcing::from_fn(label, move |t, x| cb.call(t, x));
        let problem = check!(DeterministicProblem::new(a, b, ks.to_vec(), basis, h), FracuqStatus::InvalidArgument);
        let problem = check!(problem.with_gamma(gamma), FracuqStatus::InvalidArgument).with_mode(match mode {
            FracuqMode::TwoSided => OperatorMode::TwoSided,
            FracuqMode::LeftOnly => OperatorMode::LeftOnly,
        });
        boxed(FracuqProblem(problem), out)
    })
}

/// Manufactured problem with a closed-form solution. The one-sided case
/// lives on `[-1, 1]` and uses `beta`, `k` and `spatial_count`; the IVP
/// ignores them.
#[no_mangle]
pub unsafe extern "C" fn fracuq_problem_manufactured(
    case: FracuqCase,
    alpha: f64,
    beta: f64,
    k: f64,
    temporal_count: usize,
    spatial_count: usize,
    out: *mut *mut FracuqProblem,
) -> FracuqStatus {
    guard(|| {
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let (case, basis) = match case {
            FracuqCase::IvpPower => (ManufacturedCase::IvpPower, BasisSpec::temporal_only(temporal_count, alpha / 2.0, 1.0)),
            FracuqCase::PdeOneSided => (
                ManufacturedCase::PdeOneSided,
                BasisSpec::new(temporal_count, vec![spatial_count], alpha / 2.0, 1.0, vec![(-1.0, 1.0)]),
            ),
        };
        let basis = check!(basis, FracuqStatus::InvalidArgument);
        let beta = (case == ManufacturedCase::PdeOneSided).then_some(beta);
        let (problem, _) = check!(manufactured_problem(case, alpha, beta, k, basis), FracuqStatus::InvalidArgument);
        boxed(FracuqProblem(problem), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracuq_problem_free(problem: *mut FracuqProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Assembles and solves; `quadrature_boost` adds points to every rule.
#[no_mangle]
pub unsafe extern "C" fn fracuq_solve(
    problem: *const FracuqProblem,
    method: FracuqMethod,
    quadrature_boost: usize,
    out: *mut *mut FracuqSolution,
) -> FracuqStatus {
    guard(|| {
        let problem = need!(problem.as_ref(), "problem");
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let system = check!(assemble(&problem.0, quadrature_boost), FracuqStatus::SolverFailure);
        let sol = match method {
            FracuqMethod::Fast => solve_fast(&system),
            FracuqMethod::Direct => solve_direct(&system),
        };
        let sol = check!(sol, FracuqStatus::SolverFailure);
        boxed(FracuqSolution(sol), out)
    })
}

/// `u(t, x)` with `x` holding `dims` coordinates.
#[no_mangle]
pub unsafe extern "C" fn fracuq_solution_evaluate(
    solution: *const FracuqSolution,
    t: f64,
    x: *const f64,
    dims: usize,
    value: *mut f64,
) -> FracuqStatus {
    guard(|| {
        let sol = need!(solution.as_ref(), "solution");
        let x = need!(input(x, dims), "x");
        let value = need!(value.as_mut(), "value");
        *value = check!(evaluate(&sol.0, t, x), FracuqStatus::InvalidArgument);
        FracuqStatus::Ok
    })
}

/// Number of spectral coefficients (`N·Π M_j`).
#[no_mangle]
pub unsafe extern "C" fn fracuq_solution_len(solution: *const FracuqSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.coefficients().len())
}

/// Copies the coefficients (row-major, temporal index slowest).
#[no_mangle]
pub unsafe extern "C" fn fracuq_solution_coefficients(solution: *const FracuqSolution, buf: *mut f64, len: usize) -> FracuqStatus {
    guard(|| {
        let sol = need!(solution.as_ref(), "solution");
        let c = sol.0.coefficients();
        if len < c.len() {
            return fail(FracuqStatus::BufferTooSmall, format!("{} coefficients, buffer holds {len}", c.len()));
        }
        let buf = need!(output(buf, c.len()), "buf");
        buf.copy_from_slice(c);
        FracuqStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracuq_solution_free(solution: *mut FracuqSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

unsafe fn space_from(dims: usize, lo: *const f64, hi: *const f64) -> Result<RandomParameterSpace, (FracuqStatus, String)> {
    let (Some(lo), Some(hi)) = (input(lo, dims), input(hi, dims)) else {
        return Err((FracuqStatus::NullPointer, "bounds are null".into()));
    };
    RandomParameterSpace::new(
        lo.iter()
            .zip(hi)
            .enumerate()
            .map(|(i, (&lo, &hi))| Dimension {
                name: format!("xi_{}", i + 1),
                lo,
                hi,
            })
            .collect(),
    )
    .map_err(|e| (FracuqStatus::InvalidArgument, e.to_string()))
}

macro_rules! space {
    ($dims:expr, $lo:expr, $hi:expr) => {
        match space_from($dims, $lo, $hi) {
            Ok(s) => s,
            Err((status, msg)) => return fail(status, msg),
        }
    };
}

/// Tensor Gauss-Legendre grid over the box `[lo_i, hi_i]` with `orders[i]` points per axis.
#[no_mangle]
pub unsafe extern "C" fn fracuq_grid_tensor(
    dims: usize,
    lo: *const f64,
    hi: *const f64,
    orders: *const usize,
    out: *mut *mut FracuqSampleSet,
) -> FracuqStatus {
    guard(|| {
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let space = space!(dims, lo, hi);
        let orders = need!(input(orders, dims), "orders");
        let set = check!(tensor_grid(&space, orders), FracuqStatus::InvalidArgument);
        boxed(FracuqSampleSet(set), out)
    })
}

/// Smolyak sparse grid of level `w` over the box.
#[no_mangle]
pub unsafe extern "C" fn fracuq_grid_smolyak(dims: usize, lo: *const f64, hi: *const f64, w: usize, out: *mut *mut FracuqSampleSet) -> FracuqStatus {
    guard(|| {
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let space = space!(dims, lo, hi);
        let set = check!(smolyak_grid(&space, w), FracuqStatus::InvalidArgument);
        boxed(FracuqSampleSet(set), out)
    })
}

/// `count` uniform samples; reproducible for a given seed.
#[no_mangle]
pub unsafe extern "C" fn fracuq_grid_monte_carlo(
    dims: usize,
    lo: *const f64,
    hi: *const f64,
    count: usize,
    seed: u64,
    out: *mut *mut FracuqSampleSet,
) -> FracuqStatus {
    guard(|| {
        if out.is_null() {
            return fail(FracuqStatus::NullPointer, "out is null");
        }
        let space = space!(dims, lo, hi);
        let set = check!(monte_carlo_set(&space, count, seed), FracuqStatus::InvalidArgument);
        boxed(FracuqSampleSet(set), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracuq_sample_set_len(set: *const FracuqSampleSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn fracuq_sample_set_dims(set: *const FracuqSampleSet) -> usize {
    set.as_ref().and_then(|s| s.0.points().first()).map_or(0, Vec::len)
}

/// Copies the points row by row (`len·dims` values).
#[no_mangle]
pub unsafe extern "C" fn fracuq_sample_set_points(set: *const FracuqSampleSet, buf: *mut f64, len: usize) -> FracuqStatus {
    guard(|| {
        let set = need!(set.as_ref(), "set");
        let flat: Vec<f64> = set.0.points().iter().flatten().copied().collect();
        if len < flat.len() {
            return fail(FracuqStatus::BufferTooSmall, format!("{} values, buffer holds {len}", flat.len()));
        }
        need!(output(buf, flat.len()), "buf").copy_from_slice(&flat);
        FracuqStatus::Ok
    })
}

/// Copies the weights (`len` values); fails for unweighted Monte Carlo sets.
#[no_mangle]
pub unsafe extern "C" fn fracuq_sample_set_weights(set: *const FracuqSampleSet, buf: *mut f64, len: usize) -> FracuqStatus {
    guard(|| {
        let set = need!(set.as_ref(), "set");
        if !set.0.is_weighted() {
            return fail(FracuqStatus::InvalidArgument, "sample set carries no weights");
        }
        let w = set.0.weights();
        if len < w.len() {
            return fail(FracuqStatus::BufferTooSmall, format!("{} weights, buffer holds {len}", w.len()));
        }
        need!(output(buf, w.len()), "buf").copy_from_slice(w);
        FracuqStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracuq_sample_set_free(set: *mut FracuqSampleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
