//! C ABI over `fracdiff`.
//!
//! Every fallible call returns an [`FdStatus`]. On failure a message for the
//! calling thread is available from [`fd_last_error`]. Matrices and solver
//! runs are opaque handles owned by the caller and released with
//! [`fd_matrix_free`] and [`fd_series_free`]. Output arrays are allocated by
//! the caller, who passes their length; a short buffer yields
//! `FD_STATUS_BUFFER_TOO_SMALL` and nothing is written.
//!
//! Enumerated inputs (derivative form, boundary, method, initial profile) are
//! plain `uint32_t` codes given by the `FD_*` constants, so an out-of-range
//! value from C is reported as `FD_STATUS_INVALID_ARGUMENT` rather than being
//! undefined behaviour.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fracdiff::cli_io::emit_timeseries_csv;
use fracdiff::diagnostics::{decay_rate, negativity_scan};
use fracdiff::operators::row_sums;
use fracdiff::timestepper::stability_limit;
use fracdiff::{
    build_matrix, grunwald_weights, run_simulation, run_simulation_from, BoundaryCondition, DerivativeForm, Error,
    GridFunction, InitialCondition, IterationMatrix, Method, SchemeSpec, SolverConfig, TimeSeries,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The scheme combination or operation is not defined (e.g. Caputo with a
    /// reflecting boundary).
    Unsupported = 3,
    SingularSystem = 4,
    /// Explicit step above the stability limit without `allow_unstable`.
    StabilityViolation = 5,
    Io = 6,
    BufferTooSmall = 7,
    /// A Rust panic was caught at the boundary. Indicates a bug.
    Panic = 8,
}

pub const FD_FORM_RIEMANN_LIOUVILLE: u32 = 0;
pub const FD_FORM_PATIE_SIMON: u32 = 1;
pub const FD_FORM_CAPUTO: u32 = 2;

pub const FD_BOUNDARY_ABSORBING: u32 = 0;
pub const FD_BOUNDARY_REFLECTING: u32 = 1;

pub const FD_METHOD_EXPLICIT: u32 = 0;
pub const FD_METHOD_IMPLICIT: u32 = 1;

pub const FD_INITIAL_TENT: u32 = 0;
pub const FD_INITIAL_SINE_BUMP: u32 = 1;
pub const FD_INITIAL_UNIFORM: u32 = 2;
/// Start from `FdSolveOptions::initial_values` (`n + 1` entries).
pub const FD_INITIAL_VALUES: u32 = 3;

/// Discretisation: derivative form, boundary conditions, order `alpha` in
/// (1, 2), diffusivity `c > 0` and `n` grid intervals on [0, 1].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdScheme {
    pub form: u32,
    pub left: u32,
    pub right: u32,
    pub alpha: f64,
    pub c: f64,
    pub n: usize,
}

/// Inputs to [`fd_solve`]. Array pointers may be null when their length is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdSolveOptions {
    pub scheme: FdScheme,
    pub dt: f64,
    pub t_end: f64,
    pub method: u32,
    pub initial: u32,
    pub initial_values: *const f64,
    pub initial_len: usize,
    /// Sorted output times in [0, t_end]. Each snapshot is taken at the first
    /// step on or after the requested time.
    pub snapshot_times: *const f64,
    pub snapshot_count: usize,
    pub allow_unstable: bool,
}

/// Opaque iteration matrix.
pub struct FdMatrix(IterationMatrix);

/// Opaque record of a solver run.
pub struct FdSeries(TimeSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnsupportedCombination { .. } | Error::UnsupportedForm(_) => FdStatus::Unsupported,
            Error::SingularSystem => FdStatus::SingularSystem,
            Error::StabilityViolation { .. } => FdStatus::StabilityViolation,
            Error::Io { .. } | Error::Parse { .. } => FdStatus::Io,
            _ => FdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FdStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(body: impl FnOnce() -> FfiResult<()>) -> FdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            FdStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Failure(FdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(FdStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `src` into the caller's buffer `out[0..len)`.
unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> FfiResult<()> {
    if len < src.len() {
        return Err(Failure(FdStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Failure(FdStatus::NullPointer, "output buffer is null".into()));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn store<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure(FdStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

fn form_of(code: u32) -> FfiResult<DerivativeForm> {
    match code {
        FD_FORM_RIEMANN_LIOUVILLE => Ok(DerivativeForm::RiemannLiouville),
        FD_FORM_PATIE_SIMON => Ok(DerivativeForm::PatieSimon),
        FD_FORM_CAPUTO => Ok(DerivativeForm::Caputo),
        other => Err(invalid(format!("unknown derivative form code {other}"))),
    }
}

fn boundary_of(code: u32) -> FfiResult<BoundaryCondition> {
    match code {
        FD_BOUNDARY_ABSORBING => Ok(BoundaryCondition::Absorbing),
        FD_BOUNDARY_REFLECTING => Ok(BoundaryCondition::Reflecting),
        other => Err(invalid(format!("unknown boundary code {other}"))),
    }
}

fn method_of(code: u32) -> FfiResult<Method> {
    match code {
        FD_METHOD_EXPLICIT => Ok(Method::Explicit),
        FD_METHOD_IMPLICIT => Ok(Method::Implicit),
        other => Err(invalid(format!("unknown method code {other}"))),
    }
}

fn spec_of(s: &FdScheme) -> FfiResult<SchemeSpec> {
    Ok(SchemeSpec::new(form_of(s.form)?, boundary_of(s.left)?, boundary_of(s.right)?, s.alpha, s.c, s.n)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Largest stable explicit step `h^alpha / (c alpha)`.
#[no_mangle]
pub extern "C" fn fd_stability_limit(alpha: f64, c: f64, h: f64) -> f64 {
    stability_limit(alpha, c, h)
}

/// Writes the Grünwald weights `g_0..=g_m` of `order` to `out`, which must
/// hold at least `m + 1` values.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_grunwald_weights(order: f64, m: usize, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| {
        if !order.is_finite() {
            return Err(invalid("order must be finite"));
        }
        if out_len <= m {
            return Err(Failure(FdStatus::BufferTooSmall, format!("buffer holds {out_len} values, {} needed", m + 1)));
        }
        copy_out(grunwald_weights(order, m).values(), out, out_len)
    })
}

/// Builds the `(n+1) x (n+1)` iteration matrix of `scheme`.
///
/// # Safety
/// `scheme` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_new(scheme: *const FdScheme, out: *mut *mut FdMatrix) -> FdStatus {
    guard(|| {
        let spec = spec_of(borrow(scheme, "scheme")?)?;
        let b = build_matrix(&spec)?;
        store(out, Box::into_raw(Box::new(FdMatrix(b))))
    })
}

/// Number of rows (and columns), or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_dim(m: *const FdMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Entry `b[i][j]`: the rate of mass moving from node `i` to node `j`.
///
/// # Safety
/// `m` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_get(m: *const FdMatrix, i: usize, j: usize, out: *mut f64) -> FdStatus {
    guard(|| {
        let b = &borrow(m, "matrix")?.0;
        if i >= b.dim() || j >= b.dim() {
            return Err(invalid(format!("index ({i}, {j}) outside a {0}x{0} matrix", b.dim())));
        }
        store(out, b.get(i, j))
    })
}

/// Copies all entries in row-major order; `out` needs `dim * dim` values.
///
/// # Safety
/// `m` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_copy(m: *const FdMatrix, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(borrow(m, "matrix")?.0.entries(), out, out_len))
}

/// Row sums; their negation is the absorption rate of each node.
///
/// # Safety
/// `m` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_row_sums(m: *const FdMatrix, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(&row_sums(&borrow(m, "matrix")?.0), out, out_len))
}

/// Releases a matrix. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from [`fd_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_matrix_free(m: *mut FdMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs a simulation and returns its record in `*out`.
///
/// # Safety
/// `options` and the arrays it points to must be valid for their stated
/// lengths; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fd_solve(options: *const FdSolveOptions, out: *mut *mut FdSeries) -> FdStatus {
    guard(|| {
        let o = borrow(options, "options")?;
        let spec = spec_of(&o.scheme)?;
        let times = input(o.snapshot_times, o.snapshot_count, "snapshot_times")?.to_vec();
        let (initial, values) = match o.initial {
            FD_INITIAL_TENT => (InitialCondition::Tent, None),
            FD_INITIAL_SINE_BUMP => (InitialCondition::SineBump, None),
            FD_INITIAL_UNIFORM => (InitialCondition::Uniform, None),
            FD_INITIAL_VALUES => {
                let v = input(o.initial_values, o.initial_len, "initial_values")?;
                if v.len() != spec.n + 1 {
                    return Err(invalid(format!("initial_values has {} entries, {} needed", v.len(), spec.n + 1)));
                }
                // The label is only recorded; the run starts from `v`.
                (InitialCondition::Uniform, Some(GridFunction::new(v.to_vec())?))
            }
            other => return Err(invalid(format!("unknown initial condition code {other}"))),
        };
        let config = SolverConfig {
            spec,
            dt: o.dt,
            t_end: o.t_end,
            method: method_of(o.method)?,
            snapshot_times: times,
            initial,
            allow_unstable: o.allow_unstable,
        };
        config.validate()?;
        let series = match values {
            Some(u0) => run_simulation_from(&config, u0)?,
            None => run_simulation(&config)?,
        };
        store(out, Box::into_raw(Box::new(FdSeries(series))))
    })
}

/// Number of recorded snapshots, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_series_snapshot_count(s: *const FdSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Values per snapshot (`n + 1`), or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_series_node_count(s: *const FdSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.spec.n + 1)
}

/// Number of per-step mass samples (steps + 1), or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_series_step_count(s: *const FdSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.step_mass.len())
}

/// Actual snapshot times.
///
/// # Safety
/// `s` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_series_times(s: *const FdSeries, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(&borrow(s, "series")?.0.times, out, out_len))
}

/// Node values of snapshot `k`.
///
/// # Safety
/// `s` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_series_snapshot(s: *const FdSeries, k: usize, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| {
        let series = &borrow(s, "series")?.0;
        let u = series.snapshots.get(k).ok_or_else(|| invalid(format!("snapshot {k} of {}", series.len())))?;
        copy_out(u.values(), out, out_len)
    })
}

/// Mass `h sum(u)` at each snapshot.
///
/// # Safety
/// `s` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_series_mass_trace(s: *const FdSeries, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(&borrow(s, "series")?.0.mass_trace, out, out_len))
}

/// Cumulative absorbed mass at each snapshot.
///
/// # Safety
/// `s` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_series_absorbed(s: *const FdSeries, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(&borrow(s, "series")?.0.absorbed_cumulative, out, out_len))
}

/// Mass after every step, starting with the initial state.
///
/// # Safety
/// `s` must be null or a live handle; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_series_step_mass(s: *const FdSeries, out: *mut f64, out_len: usize) -> FdStatus {
    guard(|| copy_out(&borrow(s, "series")?.0.step_mass, out, out_len))
}

/// Smallest value over all snapshots and where it occurs.
///
/// # Safety
/// `s` must be null or a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_series_min(
    s: *const FdSeries,
    value: *mut f64,
    snapshot: *mut usize,
    node: *mut usize,
) -> FdStatus {
    guard(|| {
        let (v, k, j) = negativity_scan(&borrow(s, "series")?.0)?;
        store(value, v)?;
        store(snapshot, k)?;
        store(node, j)
    })
}

/// Exponential decay rate of the L1 norm over the later snapshots.
///
/// # Safety
/// `s` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_series_decay_rate(s: *const FdSeries, out: *mut f64) -> FdStatus {
    guard(|| {
        let rate = decay_rate(&borrow(s, "series")?.0)?;
        store(out, rate)
    })
}

/// Writes the `t,x,u` CSV and its `.meta.json` sidecar to `path` (UTF-8).
///
/// # Safety
/// `s` must be null or a live handle; `path` must be null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fd_series_write_csv(s: *const FdSeries, path: *const c_char) -> FdStatus {
    guard(|| {
        let series = &borrow(s, "series")?.0;
        if path.is_null() {
            return Err(Failure(FdStatus::NullPointer, "path is null".into()));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
        Ok(emit_timeseries_csv(series, Path::new(path))?)
    })
}

/// Releases a series. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from [`fd_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_series_free(s: *mut FdSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_map_to_variants() {
        assert_eq!(form_of(FD_FORM_CAPUTO).ok(), Some(DerivativeForm::Caputo));
        assert_eq!(boundary_of(FD_BOUNDARY_REFLECTING).ok(), Some(BoundaryCondition::Reflecting));
        assert_eq!(method_of(FD_METHOD_EXPLICIT).ok(), Some(Method::Explicit));
        assert!(form_of(3).is_err() && boundary_of(2).is_err() && method_of(2).is_err());
    }

    #[test]
    fn errors_map_to_statuses() {
        let status = |e: Error| Failure::from(e).0;
        assert_eq!(status(Error::SingularSystem), FdStatus::SingularSystem);
        assert_eq!(status(Error::InvalidOrder(3.0)), FdStatus::InvalidArgument);
        assert_eq!(status(Error::StabilityViolation { dt: 1.0, limit: 0.5 }), FdStatus::StabilityViolation);
    }

    #[test]
    fn panics_become_status_codes() {
        let hook = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let status = guard(|| panic!("boom"));
        std::panic::set_hook(hook);
        assert_eq!(status, FdStatus::Panic);
        let msg = unsafe { CStr::from_ptr(fd_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "internal error: boom");
    }
}
