//! C interface to the `twodomain` solver.
//!
//! Problems and value fields are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`TdStatus`]; on failure a message for the calling thread is available
//! from [`td_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use twodomain::config::{self, Loaded};
use twodomain::hamiltonians::{hamiltonian_side, hamiltonian_tangential};
use twodomain::{Error, GridSpec, Side, ValueField, Variant};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    /// The solver or interface control construction failed.
    Numerical = 5,
    BudgetExceeded = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdVariant {
    /// All tangent mixtures on the interface.
    Minus = 0,
    /// Regular tangent mixtures only.
    Plus = 1,
    /// Side-1 data everywhere.
    SingleDomain = 2,
}

impl From<TdVariant> for Variant {
    fn from(v: TdVariant) -> Self {
        match v {
            TdVariant::Minus => Variant::Minus,
            TdVariant::Plus => Variant::Plus,
            TdVariant::SingleDomain => Variant::SingleDomain,
        }
    }
}

/// A loaded problem together with the grid from its configuration.
pub struct TdProblem {
    loaded: Loaded,
}

/// A solved value field on a space-time grid.
pub struct TdValueField {
    field: ValueField,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &Error) -> TdStatus {
    match err {
        Error::InvalidArgument(_) => TdStatus::InvalidArgument,
        Error::Config { .. } => TdStatus::Config,
        Error::Io { .. } => TdStatus::Io,
        Error::BudgetExceeded { .. } => TdStatus::BudgetExceeded,
        _ => TdStatus::Numerical,
    }
}

struct Failure(TdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail(status: TdStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TdStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            TdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(fail(TdStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(TdStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(TdStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(TdStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(TdStatus::NullPointer, format!("{name} is null")))
}

fn expect_len(got: usize, want: usize, name: &str) -> Result<(), Failure> {
    if got != want {
        return Err(fail(TdStatus::InvalidArgument, format!("{name} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `len` bytes. Returns the size
/// needed to hold the whole message including the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn td_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML problem document.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_problem_from_toml(toml: *const c_char, out: *mut *mut TdProblem) -> TdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let loaded = config::load_str(str_arg(toml, "toml")?)?;
        *out = Box::into_raw(Box::new(TdProblem { loaded }));
        Ok(())
    })
}

/// Reads and parses a TOML problem file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_problem_from_file(path: *const c_char, out: *mut *mut TdProblem) -> TdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let loaded = config::load_file(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(TdProblem { loaded }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from `td_problem_from_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_problem_free(problem: *mut TdProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes the state dimension and the horizon.
///
/// # Safety
/// `problem` must be a live handle; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn td_problem_info(problem: *const TdProblem, dim: *mut usize, horizon: *mut f64) -> TdStatus {
    guard(|| {
        let spec = &ref_arg(problem, "problem")?.loaded.spec;
        if let Some(d) = dim.as_mut() {
            *d = spec.dim();
        }
        if let Some(h) = horizon.as_mut() {
            *h = spec.horizon();
        }
        Ok(())
    })
}

/// Side Hamiltonian `H_i(x, t, p)` for `side` 1 or 2. `x` and `p` have
/// `dim` entries.
///
/// # Safety
/// Pointers must reference `dim` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_hamiltonian_side(
    problem: *const TdProblem,
    side: c_int,
    x: *const f64,
    t: f64,
    p: *const f64,
    dim: usize,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let spec = &ref_arg(problem, "problem")?.loaded.spec;
        let side = match side {
            1 => Side::One,
            2 => Side::Two,
            _ => return Err(fail(TdStatus::InvalidArgument, format!("side must be 1 or 2, got {side}"))),
        };
        expect_len(dim, spec.dim(), "x")?;
        let x = slice_arg(x, dim, "x")?;
        let p = slice_arg(p, dim, "p")?;
        *out_arg(out, "out")? = hamiltonian_side(spec, side, x, t, p);
        Ok(())
    })
}

/// Tangential Hamiltonian at an interface point `z` (`dim` entries, last
/// one zero) with tangential momentum `p_tan` (`dim - 1` entries). A
/// nonzero `regular_only` restricts to regular interface controls.
///
/// # Safety
/// Pointers must reference the stated number of readable values.
#[no_mangle]
pub unsafe extern "C" fn td_hamiltonian_tangential(
    problem: *const TdProblem,
    z: *const f64,
    dim: usize,
    s: f64,
    p_tan: *const f64,
    regular_only: c_int,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        let spec = &ref_arg(problem, "problem")?.loaded.spec;
        expect_len(dim, spec.dim(), "z")?;
        let z = slice_arg(z, dim, "z")?;
        if z[dim - 1] != 0.0 {
            return Err(fail(TdStatus::InvalidArgument, "z must lie on the interface (last coordinate 0)"));
        }
        let p = slice_arg(p_tan, dim - 1, "p_tan")?;
        *out_arg(out, "out")? = hamiltonian_tangential(spec, z, s, p, regular_only != 0);
        Ok(())
    })
}

fn solve_into(problem: &TdProblem, grid: &GridSpec, variant: TdVariant, out: &mut *mut TdValueField) -> Result<(), Failure> {
    let field = twodomain::solve(&problem.loaded.spec, grid, variant.into())?;
    *out = Box::into_raw(Box::new(TdValueField { field }));
    Ok(())
}

/// Solves on the grid given in the problem's configuration.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_solve(problem: *const TdProblem, variant: TdVariant, out: *mut *mut TdValueField) -> TdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let problem = ref_arg(problem, "problem")?;
        solve_into(problem, &problem.loaded.grid, variant, out)
    })
}

/// Solves on a grid with spacing `dx` over the problem domain and the
/// default time step.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_solve_with_spacing(
    problem: *const TdProblem,
    variant: TdVariant,
    dx: f64,
    out: *mut *mut TdValueField,
) -> TdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let problem = ref_arg(problem, "problem")?;
        let spec = &problem.loaded.spec;
        let (lo, hi) = spec.domain();
        let grid = GridSpec::with_spacing(lo.to_vec(), hi.to_vec(), dx, spec.horizon(), spec.max_speed())?;
        solve_into(problem, &grid, variant, out)
    })
}

/// # Safety
/// `field` must be null or a handle from `td_solve*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_field_free(field: *mut TdValueField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Interpolated value at `(x, t)`; `x` has `dim` entries. Points outside
/// the grid are clamped to it.
///
/// # Safety
/// `field` must be a live handle, `x` readable for `dim` values.
#[no_mangle]
pub unsafe extern "C" fn td_field_value(field: *const TdValueField, x: *const f64, dim: usize, t: f64, out: *mut f64) -> TdStatus {
    guard(|| {
        let field = &ref_arg(field, "field")?.field;
        expect_len(dim, field.grid().grid.dim(), "x")?;
        let x = slice_arg(x, dim, "x")?;
        *out_arg(out, "out")? = field.interpolate_time(x, t);
        Ok(())
    })
}

/// Writes the number of spatial nodes, time steps and the time step.
///
/// # Safety
/// `field` must be a live handle; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn td_field_shape(field: *const TdValueField, nodes: *mut usize, steps: *mut usize, dt: *mut f64) -> TdStatus {
    guard(|| {
        let field = &ref_arg(field, "field")?.field;
        if let Some(n) = nodes.as_mut() {
            *n = field.grid().grid.len();
        }
        if let Some(s) = steps.as_mut() {
            *s = field.steps();
        }
        if let Some(d) = dt.as_mut() {
            *d = field.dt();
        }
        Ok(())
    })
}

/// Copies time layer `n` (first axis varying fastest, as in
/// the CSV output) into `buf`, which must hold `len >= nodes` values.
///
/// # Safety
/// `field` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn td_field_layer(field: *const TdValueField, n: usize, buf: *mut f64, len: usize) -> TdStatus {
    guard(|| {
        let field = &ref_arg(field, "field")?.field;
        if n > field.steps() {
            return Err(fail(TdStatus::InvalidArgument, format!("layer {n} beyond {} steps", field.steps())));
        }
        let layer = field.layer(n);
        if len < layer.len() {
            return Err(fail(TdStatus::BufferTooSmall, format!("buffer holds {len}, layer has {}", layer.len())));
        }
        if buf.is_null() {
            return Err(fail(TdStatus::NullPointer, "buf is null"));
        }
        ptr::copy_nonoverlapping(layer.as_ptr(), buf, layer.len());
        Ok(())
    })
}
