//! C ABI over the ncpt library.
//!
//! Conventions: every fallible function returns an [`NcptStatus`] and writes
//! its result through an out pointer. On failure a message is available from
//! [`ncpt_last_error`] on the same thread. Handles are opaque; free them with
//! the matching `_free` function. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ncpt::config::parse_config;
use ncpt::kinematics::{solve_gamma, Geometry};
use ncpt::nuclear::NuclearSystem;
use ncpt::presets;
use ncpt::scan::{
    intensity_sweep, optimize_delay, pi_pulse_intensity, LaserProfile, Regime, RunOutcome, ScanContext, ScanError,
    SweepSpec, Transition,
};

pub const NCPT_LASER_SXFEL: u32 = 0;
pub const NCPT_LASER_XFELO: u32 = 1;
pub const NCPT_GEOMETRY_COPROPAGATING: u32 = 0;
pub const NCPT_GEOMETRY_CROSSED: u32 = 1;
pub const NCPT_TRANSITION_PUMP: u32 = 0;
pub const NCPT_TRANSITION_STOKES: u32 = 1;
pub const NCPT_REGIME_PI_PULSE: i32 = 0;
pub const NCPT_REGIME_STIRAP: i32 = 1;
pub const NCPT_REGIME_MIXED: i32 = 2;
pub const NCPT_REGIME_FAILED: i32 = 3;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcptStatus {
    NcptOk = 0,
    NcptErrNullPointer = 1,
    NcptErrInvalidArgument = 2,
    NcptErrIntegration = 3,
    NcptErrPanic = 4,
}

/// A built nuclear Λ system.
pub struct NcptSystem(NuclearSystem);

/// A nucleus with laser settings, geometry and Stokes ratio.
pub struct NcptContext(ScanContext);

/// Widths of the system in eV.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NcptWidths {
    pub gamma31_ev: f64,
    pub gamma32_ev: f64,
    pub gamma3_ev: f64,
    pub gamma2_ev: f64,
}

/// Resonant kinematics.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NcptPlan {
    pub gamma: f64,
    pub beta: f64,
    pub e_pump_ev: f64,
    pub e_stokes_ev: f64,
    pub theta_stokes_rad: f64,
    pub d_pump: f64,
    pub d_stokes: f64,
}

/// One evolution at fixed pump intensity and delay τ_p − τ_S.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NcptOutcome {
    pub eta: f64,
    pub delay_s: f64,
    pub max_rho33: f64,
    pub omega_p_peak: f64,
    pub omega_s_peak: f64,
    pub adiabaticity: f64,
}

/// One row of an intensity sweep; NaN fields when `regime` is failed.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NcptSweepRow {
    pub i_p_wcm2: f64,
    pub outcome: NcptOutcome,
    pub regime: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior nul removed"));
}

struct Failure(NcptStatus, String);

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        let status = if e.is_integration_failure() {
            NcptStatus::NcptErrIntegration
        } else {
            NcptStatus::NcptErrInvalidArgument
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NcptStatus::NcptErrInvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NcptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NcptStatus::NcptOk
        }
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
            set_error(format!("internal panic: {msg}"));
            NcptStatus::NcptErrPanic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure(NcptStatus::NcptErrNullPointer, "null output pointer".into()))
}

unsafe fn in_ref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure(NcptStatus::NcptErrNullPointer, "null handle".into()))
}

unsafe fn in_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(NcptStatus::NcptErrNullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not valid UTF-8"))
}

fn outcome(o: &RunOutcome) -> NcptOutcome {
    NcptOutcome {
        eta: o.eta,
        delay_s: o.delay,
        max_rho33: o.max_rho33,
        omega_p_peak: o.omega_p_peak,
        omega_s_peak: o.omega_s_peak,
        adiabaticity: o.adiabaticity,
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next ncpt call on the same thread.
#[no_mangle]
pub extern "C" fn ncpt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a preset nucleus ("re185", "tc97", "gd154", "er168").
#[no_mangle]
pub unsafe extern "C" fn ncpt_system_from_preset(id: *const c_char, out: *mut *mut NcptSystem) -> NcptStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let id = in_str(id)?;
        let preset = presets::find(id).ok_or_else(|| invalid(format!("unknown preset '{id}'")))?;
        let sys = preset.system().map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(NcptSystem(sys)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ncpt_system_free(system: *mut NcptSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ncpt_system_widths(system: *const NcptSystem, out: *mut NcptWidths) -> NcptStatus {
    guard(|| {
        let s = &in_ref(system)?.0;
        *out_ref(out)? = NcptWidths {
            gamma31_ev: s.gamma31_ev,
            gamma32_ev: s.gamma32_ev,
            gamma3_ev: s.gamma3_ev,
            gamma2_ev: s.gamma2_ev,
        };
        Ok(())
    })
}

/// Lorentz factor bringing a head-on photon into resonance with a
/// transition.
#[no_mangle]
pub unsafe extern "C" fn ncpt_solve_gamma(e_transition_ev: f64, e_photon_ev: f64, out: *mut f64) -> NcptStatus {
    guard(|| {
        *out_ref(out)? = solve_gamma(e_transition_ev, e_photon_ev).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Context for a system with a laser preset (`NCPT_LASER_*`), a geometry
/// (`NCPT_GEOMETRY_*`) and the Stokes-to-pump intensity ratio.
#[no_mangle]
pub unsafe extern "C" fn ncpt_context_new(
    system: *const NcptSystem,
    laser: u32,
    geometry: u32,
    ratio: f64,
    out: *mut *mut NcptContext,
) -> NcptStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let sys = in_ref(system)?.0.clone();
        let laser = match laser {
            NCPT_LASER_SXFEL => LaserProfile::Sxfel,
            NCPT_LASER_XFELO => LaserProfile::Xfelo,
            other => return Err(invalid(format!("unknown laser {other}"))),
        };
        let geometry = match geometry {
            NCPT_GEOMETRY_COPROPAGATING => Geometry::Copropagating,
            NCPT_GEOMETRY_CROSSED => Geometry::Crossed,
            other => return Err(invalid(format!("unknown geometry {other}"))),
        };
        let ctx = ScanContext::new(sys, laser.settings(), geometry, ratio)?;
        *out = Box::into_raw(Box::new(NcptContext(ctx)));
        Ok(())
    })
}

/// Context from a TOML run configuration, with the same schema as the
/// command-line `--config` file.
#[no_mangle]
pub unsafe extern "C" fn ncpt_context_from_config(toml: *const c_char, out: *mut *mut NcptContext) -> NcptStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let cfg = parse_config(in_str(toml)?).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(NcptContext(cfg.context())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ncpt_context_free(ctx: *mut NcptContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Worker threads for sweeps; 0 picks automatically.
#[no_mangle]
pub unsafe extern "C" fn ncpt_context_set_workers(ctx: *mut NcptContext, workers: usize) -> NcptStatus {
    guard(|| {
        out_ref(ctx)?.0.workers = workers;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ncpt_context_plan(ctx: *const NcptContext, out: *mut NcptPlan) -> NcptStatus {
    guard(|| {
        let p = &in_ref(ctx)?.0.plan;
        *out_ref(out)? = NcptPlan {
            gamma: p.frame.gamma,
            beta: p.frame.beta,
            e_pump_ev: p.e_pump_ev,
            e_stokes_ev: p.e_stokes_ev,
            theta_stokes_rad: p.theta_stokes,
            d_pump: p.frame.d_pump,
            d_stokes: p.frame.d_stokes,
        };
        Ok(())
    })
}

/// Evolves once at pump intensity `i_p_wcm2` (W/cm²) and delay `delay_s`.
#[no_mangle]
pub unsafe extern "C" fn ncpt_run(ctx: *const NcptContext, i_p_wcm2: f64, delay_s: f64, out: *mut NcptOutcome) -> NcptStatus {
    guard(|| {
        let ctx = &in_ref(ctx)?.0;
        let out = out_ref(out)?;
        *out = outcome(&ctx.run(i_p_wcm2, delay_s)?);
        Ok(())
    })
}

/// Maximizes the transfer over the delay at fixed pump intensity.
#[no_mangle]
pub unsafe extern "C" fn ncpt_optimize_delay(ctx: *const NcptContext, i_p_wcm2: f64, out: *mut NcptOutcome) -> NcptStatus {
    guard(|| {
        let ctx = &in_ref(ctx)?.0;
        let out = out_ref(out)?;
        let opt = ctx.pool()?.install(|| optimize_delay(ctx, i_p_wcm2))?;
        *out = outcome(&opt.outcome);
        Ok(())
    })
}

/// Lab intensity (W/cm²) making a single pulse on `transition`
/// (`NCPT_TRANSITION_*`) a π pulse.
#[no_mangle]
pub unsafe extern "C" fn ncpt_pi_pulse_intensity(ctx: *const NcptContext, transition: u32, out: *mut f64) -> NcptStatus {
    guard(|| {
        let ctx = &in_ref(ctx)?.0;
        let which = match transition {
            NCPT_TRANSITION_PUMP => Transition::Pump,
            NCPT_TRANSITION_STOKES => Transition::Stokes,
            other => return Err(invalid(format!("unknown transition {other}"))),
        };
        *out_ref(out)? = pi_pulse_intensity(ctx, which)?.intensity_wcm2;
        Ok(())
    })
}

/// Delay-optimized sweep over `n` strictly increasing intensities. `rows`
/// must hold `n` entries. Points whose evolution fails are reported with
/// `NCPT_REGIME_FAILED` and the call still succeeds.
#[no_mangle]
pub unsafe extern "C" fn ncpt_sweep(
    ctx: *const NcptContext,
    intensities_wcm2: *const f64,
    n: usize,
    rows: *mut NcptSweepRow,
) -> NcptStatus {
    guard(|| {
        let ctx = &in_ref(ctx)?.0;
        if intensities_wcm2.is_null() || rows.is_null() {
            return Err(Failure(NcptStatus::NcptErrNullPointer, "null array".into()));
        }
        let grid = std::slice::from_raw_parts(intensities_wcm2, n).to_vec();
        let result = intensity_sweep(&SweepSpec::new(grid)?, ctx)?;
        let out = std::slice::from_raw_parts_mut(rows, n);
        for (slot, r) in out.iter_mut().zip(&result.rows) {
            *slot = NcptSweepRow {
                i_p_wcm2: r.i_p_wcm2,
                outcome: NcptOutcome {
                    eta: r.eta,
                    delay_s: r.delay,
                    max_rho33: r.max_rho33,
                    omega_p_peak: r.omega_p_peak,
                    omega_s_peak: r.omega_s_peak,
                    adiabaticity: r.adiabaticity,
                },
                regime: match r.regime {
                    Regime::PiPulse => NCPT_REGIME_PI_PULSE,
                    Regime::Stirap => NCPT_REGIME_STIRAP,
                    Regime::Mixed => NCPT_REGIME_MIXED,
                    Regime::Failed => NCPT_REGIME_FAILED,
                },
            };
        }
        Ok(())
    })
}
