//! Density-matrix evolution of the driven Λ system in the nuclear rest frame.

pub mod density;
pub mod drive;
pub mod integrator;
pub mod liouville;

pub use density::{CMatrix3, DensityMatrix, InvariantTolerances, InvariantViolation, STATE_LEN};
pub use drive::{
    effective_intensity, rabi_envelope, rabi_peak, Drive, DriveConfig, Envelope, IntensityFrame,
};
pub use integrator::{IntegrationError, IntegrationStats, StepControl};
pub use liouville::{hamiltonian, relaxation, Liouvillian, Relaxation};

use thiserror::Error;

use crate::kinematics::{doppler_factor, FrameParams, KinematicsError, LaserPulse};
use crate::nuclear::NuclearSystem;

/// Pulse peaks must sit at least this many rest-frame widths inside the span.
pub const MIN_SPAN_WIDTHS: f64 = 4.0;
/// Default span margin around the pulse peaks, in rest-frame widths.
pub const DEFAULT_SPAN_WIDTHS: f64 = 6.0;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("invariant violated at t = {t:e} s: {violation}")]
    InvariantBreach { t: f64, violation: InvariantViolation },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("time span [{t0:e}, {t1:e}] does not cover the pulse at {tau:e} s by {MIN_SPAN_WIDTHS} widths of {width:e} s")]
    InvalidSpan { t0: f64, t1: f64, tau: f64, width: f64 },
}

/// Which states end up in [`Trajectory::samples`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Initial and final state only.
    #[default]
    Endpoints,
    /// `n` evenly spaced times including both ends.
    Uniform(usize),
    /// Every accepted integrator step.
    EveryStep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsOptions {
    pub control: StepControl,
    pub sampling: Sampling,
    pub tolerances: InvariantTolerances,
    /// Check invariants at each sample and at the end.
    pub check_invariants: bool,
    /// −1 evolves under −H (time-reversal checks).
    pub hamiltonian_sign: f64,
    pub intensity_frame: IntensityFrame,
    /// Pure dephasing rate (s⁻¹) added to every coherence.
    pub dephasing: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            sampling: Sampling::default(),
            tolerances: InvariantTolerances::default(),
            check_invariants: true,
            hamiltonian_sign: 1.0,
            intensity_frame: IntensityFrame::default(),
            dephasing: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<DensityMatrix>,
    /// Largest ρ33 seen at any accepted step.
    pub max_rho33: f64,
    pub peak_omega_pump: f64,
    pub peak_omega_stokes: f64,
    /// Largest √(Ω_p² + Ω_S²) seen.
    pub peak_omega_eff: f64,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    /// Sum of the local error estimates over all accepted steps.
    pub fn error_estimate(&self) -> f64 {
        self.stats.error_sum
    }
}

/// Final population of |2⟩.
pub fn transfer_efficiency(trajectory: &Trajectory) -> f64 {
    trajectory.final_state().population(1).clamp(0.0, 1.0)
}

fn check_span(drives: &DriveConfig, span: (f64, f64)) -> Result<(), EvolveError> {
    for d in [drives.pump, drives.stokes] {
        if let (Envelope::Gaussian { tau, width }, true) = (d.envelope, d.omega0 > 0.0) {
            if span.0 > tau - MIN_SPAN_WIDTHS * width || span.1 < tau + MIN_SPAN_WIDTHS * width {
                return Err(EvolveError::InvalidSpan { t0: span.0, t1: span.1, tau, width });
            }
        }
    }
    Ok(())
}

/// Integrates the master equation for given rest-frame drives.
pub fn evolve_drives(
    drives: &DriveConfig,
    relax: &Relaxation,
    span: (f64, f64),
    initial: DensityMatrix,
    opts: &DynamicsOptions,
) -> Result<Trajectory, EvolveError> {
    check_span(drives, span)?;
    let (t0, t1) = span;
    let liouvillian = Liouvillian::new(*drives, relax.with_dephasing(relax.dephasing + opts.dephasing), opts.hamiltonian_sign);
    let h_hint = drives.min_width().map_or(t1 - t0, |w| 0.5 * w);

    let checkpoints: Vec<f64> = match opts.sampling {
        Sampling::Uniform(n) if n >= 2 => {
            let dt = (t1 - t0) / (n - 1) as f64;
            (1..n).map(|i| if i == n - 1 { t1 } else { t0 + i as f64 * dt }).collect()
        }
        _ => Vec::new(),
    };

    let initial = DensityMatrix { t: t0, ..initial };
    let mut samples = vec![initial.clone()];
    let mut max_rho33 = initial.population(2);
    let omega = |t: f64| (drives.pump.rabi(t), drives.stokes.rabi(t));
    let (mut peak_p, mut peak_s, mut peak_eff) = (0.0f64, 0.0f64, 0.0f64);
    let mut track = |t: f64| {
        let (p, s) = omega(t);
        peak_p = peak_p.max(p);
        peak_s = peak_s.max(s);
        peak_eff = peak_eff.max(p.hypot(s));
    };
    track(t0);
    for d in [drives.pump, drives.stokes] {
        if let Envelope::Gaussian { tau, .. } = d.envelope {
            if (t0..=t1).contains(&tau) {
                track(tau);
            }
        }
    }

    let record_every = opts.sampling == Sampling::EveryStep;
    let (y_end, stats) = integrator::integrate::<STATE_LEN, EvolveError>(
        |t, y, dy| liouvillian.rhs(t, y, dy),
        t0,
        initial.pack(),
        t1,
        &opts.control,
        h_hint,
        &checkpoints,
        |t, y, at_checkpoint| {
            max_rho33 = max_rho33.max(y[16]);
            track(t);
            if record_every || at_checkpoint {
                let state = DensityMatrix::unpack(t, y);
                if opts.check_invariants {
                    state.check(&opts.tolerances).map_err(|violation| EvolveError::InvariantBreach { t, violation })?;
                }
                samples.push(state);
            }
            Ok(())
        },
    )?;

    let last = DensityMatrix::unpack(t1, &y_end);
    if opts.check_invariants {
        last.check(&opts.tolerances).map_err(|violation| EvolveError::InvariantBreach { t: t1, violation })?;
    }
    if samples.last().is_none_or(|s| s.t != t1) {
        samples.push(last);
    }

    Ok(Trajectory {
        samples,
        max_rho33,
        peak_omega_pump: peak_p,
        peak_omega_stokes: peak_s,
        peak_omega_eff: peak_eff,
        stats,
    })
}

/// Rest-frame drives for a pump on |1⟩↔|3⟩ and a Stokes pulse on |2⟩↔|3⟩.
pub fn drives_for(
    system: &NuclearSystem,
    frame: &FrameParams,
    pump: &LaserPulse,
    stokes: &LaserPulse,
    intensity_frame: IntensityFrame,
) -> Result<DriveConfig, KinematicsError> {
    pump.validate()?;
    stokes.validate()?;
    Ok(DriveConfig::new(
        Drive::from_pulse(pump, frame.gamma, &system.t31, system.pump_linewidth_ev(), intensity_frame),
        Drive::from_pulse(stokes, frame.gamma, &system.t32, system.stokes_linewidth_ev(), intensity_frame),
    ))
}

/// Span covering both pulse peaks by `margin` rest-frame widths, whatever
/// their intensities.
pub fn pulse_span(frame: &FrameParams, pump: &LaserPulse, stokes: &LaserPulse, margin: f64) -> (f64, f64) {
    let edge = |p: &LaserPulse| {
        let w = p.duration / doppler_factor(frame.gamma, p.theta);
        (p.tau_rest - margin * w, p.tau_rest + margin * w)
    };
    let (a, b) = edge(pump);
    let (c, d) = edge(stokes);
    (a.min(c), b.max(d))
}

/// Evolves ρ(0) = |1⟩⟨1| through the pump and Stokes pulses. `span`
/// defaults to the pulse peaks ± [`DEFAULT_SPAN_WIDTHS`] widths.
pub fn evolve(
    system: &NuclearSystem,
    frame: &FrameParams,
    pump: &LaserPulse,
    stokes: &LaserPulse,
    span: Option<(f64, f64)>,
    opts: &DynamicsOptions,
) -> Result<Trajectory, EvolveError> {
    let drives = drives_for(system, frame, pump, stokes, opts.intensity_frame)?;
    let span = span.unwrap_or_else(|| pulse_span(frame, pump, stokes, DEFAULT_SPAN_WIDTHS));
    evolve_drives(&drives, &Relaxation::from_system(system), span, DensityMatrix::ground(span.0), opts)
}
