//! C ABI over `sonine`.
//!
//! Every object is an opaque heap handle released with its `*_free`
//! function. Every fallible call returns an [`SnStatus`] and writes its
//! result through an out-pointer; on failure the message is available from
//! [`sn_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sonine::cauchy::{mol_evolve, spectral_evolve, CauchyProblem, EvolutionTrace, OperatorForm};
use sonine::fracops::{
    fractional_integral, inversion_residual, marchaud_derivative, weyl_derivative, ConvolutionQuadrature,
    MarchaudQuadrature, PairQuadratures, SQuad, TailPolicy,
};
use sonine::grid::{transmute, GridFunction, OperationalGrid};
use sonine::kernels::{sonine_residual, SoninePair};
use sonine::semigroup::apply_shift;
use sonine::timescales::{AgingScale, AmnesiaWeight};
use sonine::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    TailPolicy = 5,
    Config = 6,
    GrowthGuard = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnForm {
    Marchaud = 0,
    Weyl = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnMethod {
    Spectral = 0,
    MethodOfLines = 1,
}

pub struct SnScale(AgingScale);
pub struct SnWeight(AmnesiaWeight);
pub struct SnPair(SoninePair);
pub struct SnGridFunction(GridFunction);
pub struct SnTrace(EvolutionTrace);

/// Sample callback for [`sn_transmute`]: returns `u(t)`.
pub type SnSampleFn = Option<unsafe extern "C" fn(t: f64, user_data: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SnStatus {
    match err {
        Error::Validation(_) | Error::NonFiniteSample { .. } => SnStatus::InvalidArgument,
        Error::Domain(_) => SnStatus::Domain,
        Error::Numerical(_) => SnStatus::Numerical,
        Error::TailPolicy(_) => SnStatus::TailPolicy,
        Error::Config(_) => SnStatus::Config,
        Error::GrowthGuard { .. } => SnStatus::GrowthGuard,
    }
}

fn fail(status: SnStatus, msg: &str) -> SnStatus {
    set_error(msg);
    status
}

/// Runs `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SnStatus>) -> SnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SnStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SnStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: sonine::Result<T>) -> Result<T, SnStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, SnStatus> {
    p.as_ref().ok_or_else(|| fail(SnStatus::NullPointer, &format!("{what} is NULL")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), SnStatus> {
    if out.is_null() {
        return Err(fail(SnStatus::NullPointer, "output pointer is NULL"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_f64(out: *mut f64, value: f64) -> Result<(), SnStatus> {
    if out.is_null() {
        return Err(fail(SnStatus::NullPointer, "output pointer is NULL"));
    }
    *out = value;
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn sn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

// ---- aging scales ----

/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sn_scale_identity(out: *mut *mut SnScale) -> SnStatus {
    guard(|| put(out, SnScale(AgingScale::identity())))
}

/// # Safety
/// As [`sn_scale_identity`].
#[no_mangle]
pub unsafe extern "C" fn sn_scale_affine(a: f64, b: f64, out: *mut *mut SnScale) -> SnStatus {
    guard(|| put(out, SnScale(lib(AgingScale::affine(a, b))?)))
}

/// # Safety
/// As [`sn_scale_identity`].
#[no_mangle]
pub unsafe extern "C" fn sn_scale_sinh(out: *mut *mut SnScale) -> SnStatus {
    guard(|| put(out, SnScale(AgingScale::sinh())))
}

/// # Safety
/// As [`sn_scale_identity`].
#[no_mangle]
pub unsafe extern "C" fn sn_scale_wobble(eps: f64, out: *mut *mut SnScale) -> SnStatus {
    guard(|| put(out, SnScale(lib(AgingScale::wobble(eps))?)))
}

/// # Safety
/// `scale` must be NULL or a handle from an `sn_scale_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_scale_free(scale: *mut SnScale) {
    free(scale)
}

/// `psi(t)`.
///
/// # Safety
/// `scale` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_scale_forward(scale: *const SnScale, t: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, get(scale, "scale")?.0.forward(t)))
}

/// `psi^-1(x)`.
///
/// # Safety
/// As [`sn_scale_forward`].
#[no_mangle]
pub unsafe extern "C" fn sn_scale_inverse(scale: *const SnScale, x: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, get(scale, "scale")?.0.inverse(x)))
}

// ---- amnesia weights ----

/// # Safety
/// `scale` must be a live handle; `out` writable. The weight copies the scale.
#[no_mangle]
pub unsafe extern "C" fn sn_weight_constant(scale: *const SnScale, out: *mut *mut SnWeight) -> SnStatus {
    guard(|| put(out, SnWeight(AmnesiaWeight::constant(get(scale, "scale")?.0))))
}

/// `omega(t) = exp(beta psi(t))`.
///
/// # Safety
/// As [`sn_weight_constant`].
#[no_mangle]
pub unsafe extern "C" fn sn_weight_exp(scale: *const SnScale, beta: f64, out: *mut *mut SnWeight) -> SnStatus {
    guard(|| put(out, SnWeight(lib(AmnesiaWeight::exp_operational(beta, get(scale, "scale")?.0))?)))
}

/// `omega(t) = exp(-delta psi(t)^2 + beta psi(t))`.
///
/// # Safety
/// As [`sn_weight_constant`].
#[no_mangle]
pub unsafe extern "C" fn sn_weight_gaussian(
    scale: *const SnScale,
    delta: f64,
    beta: f64,
    out: *mut *mut SnWeight,
) -> SnStatus {
    guard(|| {
        let w = lib(AmnesiaWeight::gaussian_operational(delta, beta, get(scale, "scale")?.0))?;
        put(out, SnWeight(w))
    })
}

/// # Safety
/// `weight` must be NULL or a handle from an `sn_weight_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_weight_free(weight: *mut SnWeight) {
    free(weight)
}

/// # Safety
/// `weight` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_weight_value(weight: *const SnWeight, t: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, get(weight, "weight")?.0.value(t)))
}

// ---- kernel pairs ----

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_pair_power_law(alpha: f64, out: *mut *mut SnPair) -> SnStatus {
    guard(|| put(out, SnPair(lib(SoninePair::power_law(alpha))?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_pair_tempered(alpha: f64, lambda: f64, out: *mut *mut SnPair) -> SnStatus {
    guard(|| put(out, SnPair(lib(SoninePair::tempered_power_law(alpha, lambda))?)))
}

/// Bessel pair; `growth` is the tag recorded for `k` (must be > 0).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_pair_bessel(alpha: f64, growth: f64, out: *mut *mut SnPair) -> SnStatus {
    guard(|| put(out, SnPair(lib(SoninePair::bessel_with_growth(alpha, growth))?)))
}

/// # Safety
/// `pair` must be NULL or a handle from an `sn_pair_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_pair_free(pair: *mut SnPair) {
    free(pair)
}

/// `k(s)`.
///
/// # Safety
/// `pair` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_pair_eval_k(pair: *const SnPair, s: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, get(pair, "pair")?.0.k.eval(s)))
}

/// `kappa(s)`.
///
/// # Safety
/// As [`sn_pair_eval_k`].
#[no_mangle]
pub unsafe extern "C" fn sn_pair_eval_kappa(pair: *const SnPair, s: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, get(pair, "pair")?.0.kappa.eval(s)))
}

/// `|int_0^t k(t - s) kappa(s) ds - 1|`.
///
/// # Safety
/// As [`sn_pair_eval_k`].
#[no_mangle]
pub unsafe extern "C" fn sn_pair_sonine_residual(pair: *const SnPair, t: f64, out: *mut f64) -> SnStatus {
    guard(|| put_f64(out, lib(sonine_residual(&get(pair, "pair")?.0, t, 1e-12))?))
}

// ---- grid functions ----

/// Copies `n` samples on the uniform grid `[x_min, x_max]`.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_function_new(
    x_min: f64,
    x_max: f64,
    values: *const f64,
    n: usize,
    out: *mut *mut SnGridFunction,
) -> SnStatus {
    guard(|| {
        if values.is_null() {
            return Err(fail(SnStatus::NullPointer, "values is NULL"));
        }
        let grid = lib(OperationalGrid::new(x_min, x_max, n))?;
        let data = std::slice::from_raw_parts(values, n).to_vec();
        put(out, SnGridFunction(lib(GridFunction::new(grid, data))?))
    })
}

/// # Safety
/// `f` must be NULL or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_function_free(f: *mut SnGridFunction) {
    free(f)
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sn_function_len(f: *const SnGridFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copies the samples into `buf`, which must hold at least `len` doubles.
///
/// # Safety
/// `f` must be a live handle and `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sn_function_values(f: *const SnGridFunction, buf: *mut f64, cap: usize) -> SnStatus {
    guard(|| {
        let v = get(f, "function")?.0.values();
        if buf.is_null() {
            return Err(fail(SnStatus::NullPointer, "buffer is NULL"));
        }
        if cap < v.len() {
            return Err(fail(SnStatus::InvalidArgument, &format!("buffer holds {cap} values, need {}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Samples `v(x) = omega(t) u(t)`, `t = psi^-1(x)`, on `n` uniform nodes.
///
/// # Safety
/// Handles must be live; `sample` must be safe to call with `user_data`.
#[no_mangle]
pub unsafe extern "C" fn sn_transmute(
    scale: *const SnScale,
    weight: *const SnWeight,
    x_min: f64,
    x_max: f64,
    n: usize,
    sample: SnSampleFn,
    user_data: *mut c_void,
    out: *mut *mut SnGridFunction,
) -> SnStatus {
    guard(|| {
        let (scale, weight) = (&get(scale, "scale")?.0, &get(weight, "weight")?.0);
        let Some(sample) = sample else { return Err(fail(SnStatus::NullPointer, "sample callback is NULL")) };
        let grid = lib(OperationalGrid::new(x_min, x_max, n))?;
        let u = |t: f64| sample(t, user_data);
        put(out, SnGridFunction(lib(transmute(u, scale, weight, &grid))?))
    })
}

/// Transmuted shift by `s >= 0`.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_shift(f: *const SnGridFunction, s: f64, out: *mut *mut SnGridFunction) -> SnStatus {
    guard(|| put(out, SnGridFunction(lib(apply_shift(&get(f, "function")?.0, s))?)))
}

/// Sonine integral `kappa * v`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_integral(
    pair: *const SnPair,
    f: *const SnGridFunction,
    out: *mut *mut SnGridFunction,
) -> SnStatus {
    guard(|| {
        let v = &get(f, "function")?.0;
        let g = v.grid();
        let q = lib(ConvolutionQuadrature::build(&get(pair, "pair")?.0.kappa, g.h(), g.len()))?;
        put(out, SnGridFunction(lib(fractional_integral(v, &q))?))
    })
}

/// Weyl derivative `d/dx (k * v)`.
///
/// # Safety
/// As [`sn_integral`].
#[no_mangle]
pub unsafe extern "C" fn sn_weyl(
    pair: *const SnPair,
    f: *const SnGridFunction,
    out: *mut *mut SnGridFunction,
) -> SnStatus {
    guard(|| {
        let v = &get(f, "function")?.0;
        let g = v.grid();
        let q = lib(ConvolutionQuadrature::build(&get(pair, "pair")?.0.k, g.h(), g.len()))?;
        put(out, SnGridFunction(lib(weyl_derivative(v, &q))?))
    })
}

/// Marchaud derivative. `cutoff <= 0` integrates to infinity, which needs a
/// tail-integrable `k`.
///
/// # Safety
/// As [`sn_integral`].
#[no_mangle]
pub unsafe extern "C" fn sn_marchaud(
    pair: *const SnPair,
    f: *const SnGridFunction,
    cutoff: f64,
    out: *mut *mut SnGridFunction,
) -> SnStatus {
    guard(|| {
        let v = &get(f, "function")?.0;
        let g = v.grid();
        let tail = if cutoff > 0.0 { lib(TailPolicy::fixed(cutoff))? } else { TailPolicy::Unbounded };
        let q = lib(MarchaudQuadrature::build(&get(pair, "pair")?.0.k, g.h(), g.len(), tail, SQuad::default()))?;
        put(out, SnGridFunction(lib(marchaud_derivative(v, &q))?))
    })
}

/// Relative L2 error of `weyl(k)(integral(kappa) v)` against `v`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_inversion_residual(
    pair: *const SnPair,
    f: *const SnGridFunction,
    out: *mut f64,
) -> SnStatus {
    guard(|| {
        let v = &get(f, "function")?.0;
        let g = v.grid();
        let quads = lib(PairQuadratures::build(&get(pair, "pair")?.0, g.h(), g.len()))?;
        put_f64(out, lib(inversion_residual(v, &quads))?)
    })
}

// ---- evolution ----

/// Dissipative (`sigma = -1`) evolution of `u0` to `horizon`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_evolve(
    pair: *const SnPair,
    scale: *const SnScale,
    weight: *const SnWeight,
    u0: *const SnGridFunction,
    horizon: f64,
    dt: f64,
    form: SnForm,
    method: SnMethod,
    out: *mut *mut SnTrace,
) -> SnStatus {
    guard(|| {
        let problem = lib(CauchyProblem::new(
            get(pair, "pair")?.0.clone(),
            get(scale, "scale")?.0,
            get(weight, "weight")?.0,
            get(u0, "u0")?.0.clone(),
            horizon,
            dt,
        ))?
        .with_form(match form {
            SnForm::Marchaud => OperatorForm::Marchaud,
            SnForm::Weyl => OperatorForm::Weyl,
        });
        let trace = match method {
            SnMethod::Spectral => lib(spectral_evolve(&problem))?,
            SnMethod::MethodOfLines => lib(mol_evolve(&problem))?,
        };
        put(out, SnTrace(trace))
    })
}

/// # Safety
/// `trace` must be NULL or a handle from [`sn_evolve`], freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_trace_free(trace: *mut SnTrace) {
    free(trace)
}

/// Number of sampled times, or 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sn_trace_len(trace: *const SnTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.len())
}

/// Copies `len` values of column `column` (0 tau, 1 l2, 2 h1, 3 sup, 4 envelope margin).
///
/// # Safety
/// `trace` must be a live handle and `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sn_trace_column(trace: *const SnTrace, column: u32, buf: *mut f64, cap: usize) -> SnStatus {
    guard(|| {
        let t = &get(trace, "trace")?.0;
        let col = match column {
            0 => &t.times,
            1 => &t.l2_norms,
            2 => &t.h1_norms,
            3 => &t.sup_weighted,
            4 => &t.envelope_margin,
            c => return Err(fail(SnStatus::InvalidArgument, &format!("unknown trace column {c}"))),
        };
        if buf.is_null() {
            return Err(fail(SnStatus::NullPointer, "buffer is NULL"));
        }
        if cap < col.len() {
            return Err(fail(SnStatus::InvalidArgument, &format!("buffer holds {cap} values, need {}", col.len())));
        }
        ptr::copy_nonoverlapping(col.as_ptr(), buf, col.len());
        Ok(())
    })
}

/// Copies the final state into a new function handle.
///
/// # Safety
/// `trace` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sn_trace_final(trace: *const SnTrace, out: *mut *mut SnGridFunction) -> SnStatus {
    guard(|| {
        let t = &get(trace, "trace")?.0;
        let Some(v) = t.final_state.clone() else { return Err(fail(SnStatus::Numerical, "trace has no final state")) };
        put(out, SnGridFunction(v))
    })
}
