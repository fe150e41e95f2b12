//! Rabi frequencies of the pump and Stokes fields in the nuclear rest frame.

use std::f64::consts::PI;

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::kinematics::{detuning, doppler_factor, to_rest_frame, LaserPulse};
use crate::nuclear::{double_factorial_odd, MultipoleTransition};

/// Which frame the intensity handed to [`rabi_peak`] is expressed in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IntensityFrame {
    /// Lab-frame effective intensity; the D² boost is applied inside
    /// [`rabi_peak`].
    #[default]
    Lab,
    /// Already boosted to the rest frame; no further D² factor.
    Rest,
}

/// Intensity reduced by the fraction of the laser bandwidth that falls
/// inside the nuclear linewidth. The ratio is clamped at one.
pub fn effective_intensity(intensity: f64, nuclear_width_ev: f64, bandwidth_ev: f64) -> f64 {
    intensity * (nuclear_width_ev / bandwidth_ev).min(1.0)
}

/// Ω₀ per square root of rest-frame intensity (rad/s per √(W/m²)).
pub fn rabi_coefficient(transition: &MultipoleTransition) -> f64 {
    let l = f64::from(transition.order);
    let strength = (l + 1.0) * transition.b_si() / (SPEED_OF_LIGHT * EPSILON_0 * l);
    4.0 * PI.sqrt() / HBAR * strength.sqrt() * transition.wave_number.powi(transition.order as i32 - 1)
        / double_factorial_odd(transition.order)
}

/// Peak Rabi frequency (rad/s) for effective intensity `i_eff` (W/m²).
pub fn rabi_peak(i_eff: f64, transition: &MultipoleTransition, doppler: f64, frame: IntensityFrame) -> f64 {
    let boost = match frame {
        IntensityFrame::Lab => doppler * doppler,
        IntensityFrame::Rest => 1.0,
    };
    rabi_coefficient(transition) * (boost * i_eff).sqrt()
}

/// Ω₀·exp(−[D(t−τ)/(√2·T)]²) with lab duration `t_lab`.
pub fn rabi_envelope(t: f64, omega0: f64, tau: f64, t_lab: f64, doppler: f64) -> f64 {
    let x = doppler * (t - tau) / (std::f64::consts::SQRT_2 * t_lab);
    omega0 * (-x * x).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    /// exp(−(t−τ)²/(2σ²)) with rest-frame σ = T/D.
    Gaussian { tau: f64, width: f64 },
    /// Flat drive, used to check against closed-form Rabi oscillations.
    Constant,
}

impl Envelope {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Gaussian { tau, width } => {
                let x = (t - tau) / width;
                (-0.5 * x * x).exp()
            }
            Envelope::Constant => 1.0,
        }
    }
}

/// One field as seen by the nucleus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    /// Peak Rabi frequency (rad/s).
    pub omega0: f64,
    pub envelope: Envelope,
    /// Detuning (rad/s).
    pub detuning: f64,
}

impl Drive {
    pub fn off() -> Self {
        Self { omega0: 0.0, envelope: Envelope::Constant, detuning: 0.0 }
    }

    pub fn gaussian(omega0: f64, tau: f64, width: f64, detuning: f64) -> Self {
        Self { omega0, envelope: Envelope::Gaussian { tau, width }, detuning }
    }

    #[inline]
    pub fn rabi(&self, t: f64) -> f64 {
        if self.omega0 == 0.0 {
            0.0
        } else {
            self.omega0 * self.envelope.value(t)
        }
    }

    /// ∫Ω dt over the whole line.
    pub fn area(&self) -> f64 {
        match self.envelope {
            Envelope::Gaussian { width, .. } => self.omega0 * (2.0 * PI).sqrt() * width,
            Envelope::Constant if self.omega0 == 0.0 => 0.0,
            Envelope::Constant => f64::INFINITY,
        }
    }

    /// The same drive reflected about `t_mid`.
    pub fn mirrored(&self, t_mid: f64) -> Self {
        let envelope = match self.envelope {
            Envelope::Gaussian { tau, width } => Envelope::Gaussian { tau: 2.0 * t_mid - tau, width },
            Envelope::Constant => Envelope::Constant,
        };
        Self { envelope, ..*self }
    }

    /// Builds the rest-frame drive of a lab-frame pulse acting on
    /// `transition` with linewidth `linewidth_ev`.
    pub fn from_pulse(
        pulse: &LaserPulse,
        gamma: f64,
        transition: &MultipoleTransition,
        linewidth_ev: f64,
        frame: IntensityFrame,
    ) -> Self {
        let omega0 = match frame {
            IntensityFrame::Lab => {
                let d = doppler_factor(gamma, pulse.theta);
                let i_eff = effective_intensity(pulse.peak_intensity, linewidth_ev, d * pulse.bandwidth_ev);
                rabi_peak(i_eff, transition, d, IntensityFrame::Lab)
            }
            IntensityFrame::Rest => {
                let rest = to_rest_frame(pulse, gamma);
                let i_eff = effective_intensity(rest.peak_intensity, linewidth_ev, rest.bandwidth_ev);
                rabi_peak(i_eff, transition, rest.doppler, IntensityFrame::Rest)
            }
        };
        let width = pulse.duration / doppler_factor(gamma, pulse.theta);
        Self::gaussian(omega0, pulse.tau_rest, width, detuning(pulse, gamma, transition.wave_number))
    }
}

/// Pump and Stokes drives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveConfig {
    pub pump: Drive,
    pub stokes: Drive,
}

impl DriveConfig {
    pub fn new(pump: Drive, stokes: Drive) -> Self {
        Self { pump, stokes }
    }

    fn gaussians(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        [self.pump, self.stokes].into_iter().filter(|d| d.omega0 > 0.0).filter_map(|d| match d.envelope {
            Envelope::Gaussian { tau, width } => Some((tau, width)),
            Envelope::Constant => None,
        })
    }

    /// Narrowest active Gaussian width, if any.
    pub fn min_width(&self) -> Option<f64> {
        self.gaussians().map(|(_, w)| w).reduce(f64::min)
    }

    /// Interval covering every active Gaussian by `margin` widths.
    pub fn covering_span(&self, margin: f64) -> Option<(f64, f64)> {
        self.gaussians().fold(None, |acc, (tau, w)| {
            let (lo, hi) = (tau - margin * w, tau + margin * w);
            Some(match acc {
                None => (lo, hi),
                Some((a, b)) => (f64::min(a, lo), f64::max(b, hi)),
            })
        })
    }

    pub fn mirrored(&self, t_mid: f64) -> Self {
        Self { pump: self.pump.mirrored(t_mid), stokes: self.stokes.mirrored(t_mid) }
    }
}
