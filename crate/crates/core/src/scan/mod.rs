//! Intensity sweeps, delay optimization, π-pulse intensities and robustness
//! scans built on top of [`crate::dynamics`].

pub mod delay;
pub mod pipulse;
pub mod robust;
pub mod sweep;

pub use delay::{golden_section_max, optimize_delay, DelayOptimum};
pub use pipulse::{pi_pulse_intensity, pi_ratio, PiPulse, Transition};
pub use robust::{
    detuning_robustness, mismatch_robustness, restoring_multiplier, DetuningCurve, MismatchCell,
    MismatchSurface,
};
pub use sweep::{intensity_sweep, plateau_onset, Regime, SweepResult, SweepRow, SweepSpec, PLATEAU_THRESHOLD};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::constants::{HBAR_EV_S, MEV_MILLI, PICOSECOND, W_PER_CM2};
use crate::dynamics::{
    drives_for, evolve_drives, pulse_span, transfer_efficiency, DensityMatrix, DriveConfig,
    DynamicsOptions, EvolveError, Relaxation, Sampling, Trajectory, DEFAULT_SPAN_WIDTHS,
};
use crate::kinematics::{plan, FrameParams, Geometry, KinematicsError, LaserPulse, ResonancePlan};
use crate::nuclear::{NuclearError, NuclearSystem};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Nuclear(#[from] NuclearError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("invalid scan specification: {0}")]
    InvalidSpec(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl ScanError {
    /// True for failures of the numerical integration itself rather than of
    /// the inputs.
    pub fn is_integration_failure(&self) -> bool {
        matches!(
            self,
            ScanError::Evolve(EvolveError::Integration(_) | EvolveError::InvariantBreach { .. })
        )
    }
}

/// X-ray source presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaserProfile {
    Sxfel,
    Xfelo,
}

impl LaserProfile {
    pub fn settings(self) -> LaserSettings {
        match self {
            LaserProfile::Sxfel => LaserSettings {
                photon_energy_ev: 12.4e3,
                duration: 0.1 * PICOSECOND,
                bandwidth_ev: 10.0 * MEV_MILLI,
            },
            LaserProfile::Xfelo => LaserSettings {
                photon_energy_ev: 25e3,
                duration: 1.0 * PICOSECOND,
                bandwidth_ev: 1.0 * MEV_MILLI,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LaserProfile::Sxfel => "sxfel",
            LaserProfile::Xfelo => "xfelo",
        }
    }
}

impl fmt::Display for LaserProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LaserProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sxfel" => Ok(LaserProfile::Sxfel),
            "xfelo" => Ok(LaserProfile::Xfelo),
            other => Err(format!("unknown laser '{other}' (expected sxfel or xfelo)")),
        }
    }
}

/// Lab-frame pulse parameters shared by the pump and Stokes beams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserSettings {
    /// Pump photon energy (eV).
    pub photon_energy_ev: f64,
    /// Gaussian duration parameter T (s).
    pub duration: f64,
    pub bandwidth_ev: f64,
}

impl LaserSettings {
    pub fn validate(&self) -> Result<(), ScanError> {
        for (what, v) in [
            ("photon energy", self.photon_energy_ev),
            ("duration", self.duration),
            ("bandwidth", self.bandwidth_ev),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScanError::InvalidSpec(format!("laser {what} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelaySearch {
    /// Half-width of the window in units of the longer rest-frame pulse width.
    pub window_widths: f64,
    pub coarse_points: usize,
    /// Refinement stops once the bracket is narrower than this many widths.
    pub rel_tol: f64,
}

impl Default for DelaySearch {
    fn default() -> Self {
        Self { window_widths: 6.0, coarse_points: 61, rel_tol: 1e-4 }
    }
}

/// Mismatches between the nucleus and the laser set-up.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Perturbation {
    /// Stokes angle error (rad).
    pub dtheta: f64,
    /// Relative error Δγ/γ.
    pub dgamma_rel: f64,
    /// Equal detuning added to both fields (eV).
    pub equal_detuning_ev: f64,
}

/// Result of one evolution at fixed intensity and delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOutcome {
    pub eta: f64,
    pub delay: f64,
    pub max_rho33: f64,
    pub omega_p_peak: f64,
    pub omega_s_peak: f64,
    /// Ω_eff·|Δτ| with Ω_eff the peak of √(Ω_p² + Ω_S²).
    pub adiabaticity: f64,
    pub error_estimate: f64,
}

/// Everything needed to evolve the system for a given pump intensity and
/// delay Δτ = τ_p − τ_S.
#[derive(Clone, Debug)]
pub struct ScanContext {
    pub system: NuclearSystem,
    pub laser: LaserSettings,
    pub plan: ResonancePlan,
    /// I_S / I_p.
    pub ratio: f64,
    pub delay_search: DelaySearch,
    pub options: DynamicsOptions,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl ScanContext {
    pub fn new(system: NuclearSystem, laser: LaserSettings, geometry: Geometry, ratio: f64) -> Result<Self, ScanError> {
        laser.validate()?;
        let plan = plan(&system, laser.photon_energy_ev, geometry)?;
        let ctx = Self {
            system,
            laser,
            plan,
            ratio,
            delay_search: DelaySearch::default(),
            options: DynamicsOptions::default(),
            workers: 0,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(ScanError::InvalidSpec(format!("Stokes ratio must be positive, got {}", self.ratio)));
        }
        let s = &self.delay_search;
        if !(s.window_widths > 0.0) {
            return Err(ScanError::InvalidSpec("delay window must contain both signs of delay".into()));
        }
        if s.coarse_points < 3 {
            return Err(ScanError::InvalidSpec(format!("need at least 3 coarse delay points, got {}", s.coarse_points)));
        }
        if !(s.rel_tol > 0.0) {
            return Err(ScanError::InvalidSpec(format!("delay tolerance must be positive, got {}", s.rel_tol)));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Geometry {
        self.plan.geometry
    }

    /// Longer of the two rest-frame pulse widths T/D.
    pub fn pulse_width(&self) -> f64 {
        let f = &self.plan.frame;
        (self.laser.duration / f.d_pump).max(self.laser.duration / f.d_stokes)
    }

    /// Lab-frame pump and Stokes pulses for `i_p_wcm2` and delay `delay`,
    /// together with the (possibly perturbed) frame.
    pub fn pulses(&self, i_p_wcm2: f64, delay: f64, pert: &Perturbation) -> Result<(FrameParams, LaserPulse, LaserPulse), ScanError> {
        let gamma = self.plan.frame.gamma * (1.0 + pert.dgamma_rel);
        let theta_s = self.plan.theta_stokes + pert.dtheta;
        if !(0.0..=std::f64::consts::PI).contains(&theta_s) {
            return Err(ScanError::InvalidSpec(format!("perturbed Stokes angle {theta_s} outside [0, π]")));
        }
        let frame = FrameParams::new(gamma, theta_s)?;
        let i_p = i_p_wcm2 * W_PER_CM2;
        let pump = LaserPulse {
            photon_energy_ev: self.plan.e_pump_ev,
            peak_intensity: i_p,
            duration: self.laser.duration,
            bandwidth_ev: self.laser.bandwidth_ev,
            theta: 0.0,
            tau_rest: 0.5 * delay,
        };
        let stokes = LaserPulse {
            photon_energy_ev: self.plan.e_stokes_ev,
            peak_intensity: self.ratio * i_p,
            theta: theta_s,
            tau_rest: -0.5 * delay,
            ..pump.clone()
        };
        Ok((frame, pump, stokes))
    }

    pub fn drives(&self, i_p_wcm2: f64, delay: f64, pert: &Perturbation) -> Result<(DriveConfig, (f64, f64)), ScanError> {
        let (frame, pump, stokes) = self.pulses(i_p_wcm2, delay, pert)?;
        let mut drives = drives_for(&self.system, &frame, &pump, &stokes, self.options.intensity_frame)?;
        let shift = pert.equal_detuning_ev / HBAR_EV_S;
        drives.pump.detuning += shift;
        drives.stokes.detuning += shift;
        Ok((drives, pulse_span(&frame, &pump, &stokes, DEFAULT_SPAN_WIDTHS)))
    }

    pub fn trajectory(&self, i_p_wcm2: f64, delay: f64, pert: &Perturbation, sampling: Sampling) -> Result<Trajectory, ScanError> {
        let (drives, span) = self.drives(i_p_wcm2, delay, pert)?;
        let opts = DynamicsOptions { sampling, ..self.options };
        Ok(evolve_drives(&drives, &Relaxation::from_system(&self.system), span, DensityMatrix::ground(span.0), &opts)?)
    }

    pub fn run_perturbed(&self, i_p_wcm2: f64, delay: f64, pert: &Perturbation) -> Result<RunOutcome, ScanError> {
        let t = self.trajectory(i_p_wcm2, delay, pert, Sampling::Endpoints)?;
        Ok(RunOutcome {
            eta: transfer_efficiency(&t),
            delay,
            max_rho33: t.max_rho33,
            omega_p_peak: t.peak_omega_pump,
            omega_s_peak: t.peak_omega_stokes,
            adiabaticity: t.peak_omega_eff * delay.abs(),
            error_estimate: t.error_estimate(),
        })
    }

    pub fn run(&self, i_p_wcm2: f64, delay: f64) -> Result<RunOutcome, ScanError> {
        self.run_perturbed(i_p_wcm2, delay, &Perturbation::default())
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool, ScanError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| ScanError::Pool(e.to_string()))
    }
}
