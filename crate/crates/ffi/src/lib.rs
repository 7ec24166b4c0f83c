//! C interface to the phase-averaging library.
//!
//! Every function returns a [`PaStatus`]. On failure a message is kept per
//! thread and can be read with [`pa_last_error_message`]. Handles are opaque
//! and owned by the caller once created; release them with the matching
//! `*_free` function. Freeing a null handle is a no-op.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the documented number of
//! elements. Handles must come from this library and not be used after they
//! are freed. Handles may be shared between threads for reading.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phase_averaging::averaging::{AveragingConfig, AveragingTables, StackedState};
use phase_averaging::diagnostics::l2_relative_error;
use phase_averaging::integrator::{integrate, integrate_with_reset, SolverSettings, Trajectory};
use phase_averaging::model::{initial_state, swing_spring_model, ResonantQuadraticModel, SpringParams};
use phase_averaging::{assemble_averaged_rhs, shifted_moment, Complex64, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The mass matrix is singular or exceeded the conditioning cap.
    IllConditioned = 3,
    /// The integration failed: step size underflow or a non-finite state.
    NumericalFailure = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PaComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for PaComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<PaComplex> for Complex64 {
    fn from(z: PaComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Physical parameters of the swinging spring (SI units).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaSpringParams {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub spring_k: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaSolverSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of the output grid in seconds.
    pub sample_dt: f64,
}

/// Opaque model handle.
pub struct PaModel {
    model: ResonantQuadraticModel,
    params: SpringParams,
}

/// Opaque handle to precomputed averaging tables.
pub struct PaTables(AveragingTables);

/// Opaque sampled trajectory.
pub struct PaTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> PaStatus {
    match err {
        Error::IllConditioned { .. } | Error::SingularMass => PaStatus::IllConditioned,
        Error::StepSizeUnderflow { .. } | Error::NonFiniteState { .. } | Error::DegenerateReference => {
            PaStatus::NumericalFailure
        }
        _ => PaStatus::InvalidArgument,
    }
}

/// Runs `f` with panics and errors turned into status codes.
fn guard<F: FnOnce() -> Result<(), (PaStatus, String)>>(f: F) -> PaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PaStatus::Ok
        }
        Ok(Err((status, msg))) => {
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
            PaStatus::Panic
        }
    }
}

fn lib<T>(r: phase_averaging::Result<T>) -> Result<T, (PaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PaStatus, String)> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| (PaStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<*mut T, (PaStatus, String)> {
    if p.is_null() {
        Err((PaStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(p)
    }
}

fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (PaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    out_ptr(p as *mut T, what)?;
    // SAFETY: non-null and the caller guarantees `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn settings_from(s: *const PaSolverSettings) -> Result<SolverSettings, (PaStatus, String)> {
    let s = non_null(s, "settings")?;
    let settings = SolverSettings {
        rtol: s.rtol,
        atol: s.atol,
        sample_dt: s.sample_dt,
        ..SolverSettings::default()
    };
    lib(settings.validate())?;
    Ok(settings)
}

fn boxed<T>(value: T, out: *mut *mut T) {
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length, or 0
/// when there is no error.
#[no_mangle]
pub unsafe extern "C" fn pa_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                // SAFETY: the caller provides `len` writable bytes.
                unsafe {
                    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                    *buf.add(n) = 0;
                }
            }
            bytes.len()
        }
    })
}

#[no_mangle]
pub extern "C" fn pa_solver_settings_default() -> PaSolverSettings {
    let s = SolverSettings::default();
    PaSolverSettings {
        rtol: s.rtol,
        atol: s.atol,
        sample_dt: s.sample_dt,
    }
}

#[no_mangle]
pub extern "C" fn pa_spring_params_default() -> PaSpringParams {
    let p = SpringParams::default();
    PaSpringParams {
        mass: p.mass,
        length: p.length,
        gravity: p.gravity,
        spring_k: p.spring_k,
    }
}

/// Shifted Gaussian moment `R_alpha(c)` without the damping factor.
#[no_mangle]
pub unsafe extern "C" fn pa_shifted_moment(alpha: usize, frequency: f64, window: f64, out: *mut PaComplex) -> PaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if alpha > phase_averaging::averaging::moments::MAX_MOMENT_ORDER {
            return Err((PaStatus::InvalidArgument, format!("moment order {alpha} is too large")));
        }
        if !(window.is_finite() && window > 0.0 && frequency.is_finite()) {
            return Err((
                PaStatus::InvalidArgument,
                "window must be positive and frequency finite".into(),
            ));
        }
        // SAFETY: checked non-null.
        unsafe { *out = shifted_moment(alpha, frequency, window).into() };
        Ok(())
    })
}

/// Swinging-spring model. `freq_ratio <= 0` keeps the ratio implied by the
/// physical parameters.
#[no_mangle]
pub unsafe extern "C" fn pa_spring_model_new(
    params: *const PaSpringParams,
    freq_ratio: f64,
    out: *mut *mut PaModel,
) -> PaStatus {
    guard(|| {
        let p = non_null(params, "params")?;
        let out = out_ptr(out, "out")?;
        let mut params = SpringParams {
            mass: p.mass,
            length: p.length,
            gravity: p.gravity,
            spring_k: p.spring_k,
        };
        if freq_ratio > 0.0 {
            params = params.with_freq_ratio(freq_ratio);
        }
        let model = lib(swing_spring_model(&params))?;
        boxed(PaModel { model, params }, out);
        Ok(())
    })
}

/// State dimension (3 for the spring).
#[no_mangle]
pub unsafe extern "C" fn pa_model_dim(model: *const PaModel) -> usize {
    // SAFETY: null or a live handle.
    unsafe { model.as_ref() }.map_or(0, |m| m.model.dim())
}

/// Complex initial state from positions and velocities (three each).
#[no_mangle]
pub unsafe extern "C" fn pa_model_initial_state(
    model: *const PaModel,
    positions: *const f64,
    velocities: *const f64,
    out: *mut PaComplex,
) -> PaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let pos = slice(positions, 3, "positions")?;
        let vel = slice(velocities, 3, "velocities")?;
        let out = out_ptr(out, "out")?;
        let u0 = initial_state([pos[0], pos[1], pos[2]], [vel[0], vel[1], vel[2]], &m.params);
        for (j, z) in u0.iter().enumerate() {
            // SAFETY: the caller provides three writable elements.
            unsafe { *out.add(j) = (*z).into() };
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pa_model_free(model: *mut PaModel) {
    if !model.is_null() {
        // SAFETY: created by `pa_spring_model_new` and not freed before.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Averaging tables for degree `p` and window `window` over the model's
/// frequencies. Ill-conditioned mass matrices are accepted; query
/// [`pa_tables_condition`] to inspect them.
#[no_mangle]
pub unsafe extern "C" fn pa_tables_new(
    model: *const PaModel,
    p: usize,
    window: f64,
    out: *mut *mut PaTables,
) -> PaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let out = out_ptr(out, "out")?;
        let cfg = lib(AveragingConfig::new(p, window))?;
        let tables = lib(AveragingTables::build_unchecked(cfg, &m.model.frequencies()))?;
        boxed(PaTables(tables), out);
        Ok(())
    })
}

/// 1-norm condition number of the mass matrix, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pa_tables_condition(tables: *const PaTables) -> f64 {
    // SAFETY: null or a live handle.
    unsafe { tables.as_ref() }.map_or(f64::NAN, |t| t.0.mass_condition())
}

#[no_mangle]
pub unsafe extern "C" fn pa_tables_free(tables: *mut PaTables) {
    if !tables.is_null() {
        // SAFETY: created by `pa_tables_new` and not freed before.
        drop(unsafe { Box::from_raw(tables) });
    }
}

/// Averaged right-hand side for the stacked state `V_0 ... V_p`
/// (block-major, `len = dim * (p + 1)`), written to `out` of the same length.
#[no_mangle]
pub unsafe extern "C" fn pa_assemble_rhs(
    model: *const PaModel,
    tables: *const PaTables,
    t: f64,
    state: *const PaComplex,
    len: usize,
    out: *mut PaComplex,
) -> PaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let tabs = non_null(tables, "tables")?;
        let data: Vec<Complex64> = slice(state, len, "state")?.iter().map(|&z| z.into()).collect();
        let out = out_ptr(out, "out")?;
        let stacked = lib(StackedState::from_flat(m.model.dim(), data))?;
        let d = lib(assemble_averaged_rhs(t, &stacked, &m.model, &tabs.0))?;
        for (j, z) in d.as_slice().iter().enumerate() {
            // SAFETY: `out` has `len` elements, the same as the state.
            unsafe { *out.add(j) = (*z).into() };
        }
        Ok(())
    })
}

/// Exact modulated run from `y0` (model dimension entries).
#[no_mangle]
pub unsafe extern "C" fn pa_integrate_exact(
    model: *const PaModel,
    y0: *const PaComplex,
    t_final: f64,
    settings: *const PaSolverSettings,
    out: *mut *mut PaTrajectory,
) -> PaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let y0: Vec<Complex64> = slice(y0, m.model.dim(), "y0")?.iter().map(|&z| z.into()).collect();
        let settings = settings_from(settings)?;
        let out = out_ptr(out, "out")?;
        let traj = lib(integrate(
            |t, y, dy| m.model.modulated_rhs(t, y, dy),
            &y0,
            t_final,
            &settings,
        ))?;
        boxed(PaTrajectory(traj), out);
        Ok(())
    })
}

/// Averaged run, resetting the higher blocks every `reset_dt` seconds
/// (`INFINITY` for never). The trajectory holds `V_0`.
#[no_mangle]
pub unsafe extern "C" fn pa_integrate_with_reset(
    model: *const PaModel,
    tables: *const PaTables,
    y0: *const PaComplex,
    t_final: f64,
    reset_dt: f64,
    settings: *const PaSolverSettings,
    out: *mut *mut PaTrajectory,
) -> PaStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let tabs = non_null(tables, "tables")?;
        let y0: Vec<Complex64> = slice(y0, m.model.dim(), "y0")?.iter().map(|&z| z.into()).collect();
        let settings = settings_from(settings)?;
        let out = out_ptr(out, "out")?;
        let traj = lib(integrate_with_reset(
            &m.model, &tabs.0, &y0, t_final, reset_dt, &settings,
        ))?;
        boxed(PaTrajectory(traj), out);
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pa_trajectory_len(traj: *const PaTrajectory) -> usize {
    // SAFETY: null or a live handle.
    unsafe { traj.as_ref() }.map_or(0, |t| t.0.len())
}

/// Components per sample, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pa_trajectory_width(traj: *const PaTrajectory) -> usize {
    // SAFETY: null or a live handle.
    unsafe { traj.as_ref() }.map_or(0, |t| t.0.width())
}

/// Largest modulus of the unstored higher blocks over all samples.
#[no_mangle]
pub unsafe extern "C" fn pa_trajectory_higher_block_peak(traj: *const PaTrajectory) -> f64 {
    // SAFETY: null or a live handle.
    unsafe { traj.as_ref() }.map_or(f64::NAN, |t| t.0.higher_block_peak())
}

/// Copies sample times (`len` entries) and states (`len * width`, sample
/// major) into caller buffers. Either buffer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn pa_trajectory_copy(
    traj: *const PaTrajectory,
    times: *mut f64,
    states: *mut PaComplex,
) -> PaStatus {
    guard(|| {
        let t = &non_null(traj, "trajectory")?.0;
        if !times.is_null() {
            // SAFETY: the caller provides `len` writable doubles.
            unsafe { ptr::copy_nonoverlapping(t.times.as_ptr(), times, t.len()) };
        }
        if !states.is_null() {
            for (j, z) in t.states().flatten().enumerate() {
                // SAFETY: the caller provides `len * width` writable elements.
                unsafe { *states.add(j) = (*z).into() };
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pa_trajectory_free(traj: *mut PaTrajectory) {
    if !traj.is_null() {
        // SAFETY: created by an integrate function and not freed before.
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Relative L2 error of one component of `traj` against `reference`.
#[no_mangle]
pub unsafe extern "C" fn pa_l2_error(
    traj: *const PaTrajectory,
    reference: *const PaTrajectory,
    component: usize,
    out: *mut f64,
) -> PaStatus {
    guard(|| {
        let a = non_null(traj, "trajectory")?;
        let b = non_null(reference, "reference")?;
        let out = out_ptr(out, "out")?;
        let e = lib(l2_relative_error(&a.0, &b.0, component))?;
        // SAFETY: checked non-null.
        unsafe { *out = e };
        Ok(())
    })
}
