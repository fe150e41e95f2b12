//! Relativistic kinematics of the laser–nucleus collision.
//!
//! The nuclei move with Lorentz factor γ against the laser beams. A photon
//! meeting the nucleus at angle θ is seen in the rest frame with frequency
//! boosted by the Doppler factor D = γ(1 + β cos θ). The pump beam is always
//! head-on (θ = 0); only the Stokes beam may be tilted.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::constants::{ev_to_angular, SPEED_OF_LIGHT};
use crate::nuclear::NuclearSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("transition energy {e_transition} eV does not exceed photon energy {e_photon} eV; no forward boost reaches resonance")]
    NoForwardBoost { e_transition: f64, e_photon: f64 },
    #[error("Stokes resonance needs a Doppler ratio {factor} outside [1-β, 1+β] = [{lo}, {hi}]")]
    UnreachableAngle { factor: f64, lo: f64, hi: f64 },
    #[error("gamma must be >= 1, got {0}")]
    InvalidGamma(f64),
    #[error("invalid laser pulse: {0}")]
    InvalidPulse(String),
}

/// Beam geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    /// Two-color, both beams head-on (θ_S = 0).
    #[serde(rename = "copro", alias = "copropagating")]
    Copropagating,
    /// Single-color, Stokes beam tilted by θ_S.
    #[serde(rename = "crossed")]
    Crossed,
}

impl Geometry {
    pub fn short_name(self) -> &'static str {
        match self {
            Geometry::Copropagating => "copro",
            Geometry::Crossed => "crossed",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Copropagating => "copropagating",
            Geometry::Crossed => "crossed",
        })
    }
}

impl FromStr for Geometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "copro" | "copropagating" => Ok(Geometry::Copropagating),
            "crossed" => Ok(Geometry::Crossed),
            other => Err(format!("unknown geometry '{other}' (expected copro or crossed)")),
        }
    }
}

/// β and 1 − β for a Lorentz factor, the latter without cancellation.
pub fn beta_from_gamma(gamma: f64) -> (f64, f64) {
    let inv_g2 = 1.0 / (gamma * gamma);
    let beta = (1.0 - inv_g2).sqrt();
    (beta, inv_g2 / (1.0 + beta))
}

/// D = γ(1 + β cos θ).
pub fn doppler_factor(gamma: f64, theta: f64) -> f64 {
    let (beta, one_minus_beta) = beta_from_gamma(gamma);
    let cos = theta.cos();
    if cos >= 0.0 {
        gamma * (1.0 + beta * cos)
    } else {
        // 1 + β cos θ = (1 − β) + β(1 + cos θ), with 1 + cos θ = 2cos²(θ/2).
        let half = (0.5 * theta).cos();
        gamma * (one_minus_beta + 2.0 * beta * half * half)
    }
}

/// ∂D/∂θ = −γβ sin θ.
pub fn doppler_factor_dtheta(gamma: f64, theta: f64) -> f64 {
    let (beta, _) = beta_from_gamma(gamma);
    -gamma * beta * theta.sin()
}

/// Lorentz factor satisfying γ(1 + β) = E_transition / E_photon.
pub fn solve_gamma(e_transition: f64, e_photon: f64) -> Result<f64, KinematicsError> {
    let x = e_transition / e_photon;
    if !(x > 1.0) || !x.is_finite() {
        return Err(KinematicsError::NoForwardBoost { e_transition, e_photon });
    }
    Ok(0.5 * (x + 1.0 / x))
}

/// Stokes beam angle putting a photon of `e_photon` on resonance with `e32`
/// for nuclei moving with `gamma`.
pub fn solve_stokes_angle(e32: f64, e_photon: f64, gamma: f64) -> Result<f64, KinematicsError> {
    if !(gamma >= 1.0) {
        return Err(KinematicsError::InvalidGamma(gamma));
    }
    let (beta, one_minus_beta) = beta_from_gamma(gamma);
    let factor = e32 / (e_photon * gamma);
    let lo = one_minus_beta;
    let hi = 1.0 + beta;
    let slack = 1e-12 * hi;
    if !(factor >= lo - slack && factor <= hi + slack) {
        return Err(KinematicsError::UnreachableAngle { factor, lo, hi });
    }
    if beta == 0.0 {
        return Ok(0.0);
    }
    Ok(((factor - 1.0) / beta).clamp(-1.0, 1.0).acos())
}

/// Stokes photon energy for copropagating beams.
pub fn solve_stokes_energy(e32: f64, gamma: f64) -> f64 {
    e32 / doppler_factor(gamma, 0.0)
}

/// A laser pulse described in the laboratory frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserPulse {
    pub photon_energy_ev: f64,
    /// Peak intensity (W/m²).
    pub peak_intensity: f64,
    /// Gaussian duration parameter T (s).
    pub duration: f64,
    /// Bandwidth Γ_L (eV).
    pub bandwidth_ev: f64,
    /// Angle to the nuclear velocity (rad); 0 is head-on.
    pub theta: f64,
    /// Envelope peak time in the nuclear rest frame (s).
    pub tau_rest: f64,
}

impl LaserPulse {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |what: &str, v: f64| Err(KinematicsError::InvalidPulse(format!("{what} = {v}")));
        if !(self.photon_energy_ev > 0.0) {
            return bad("photon energy", self.photon_energy_ev);
        }
        if !(self.peak_intensity >= 0.0) || !self.peak_intensity.is_finite() {
            return bad("peak intensity", self.peak_intensity);
        }
        if !(self.duration > 0.0) {
            return bad("duration", self.duration);
        }
        if !(self.bandwidth_ev > 0.0) {
            return bad("bandwidth", self.bandwidth_ev);
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return bad("theta", self.theta);
        }
        if !self.tau_rest.is_finite() {
            return bad("tau_rest", self.tau_rest);
        }
        Ok(())
    }

    pub fn angular_frequency(&self) -> f64 {
        ev_to_angular(self.photon_energy_ev)
    }
}

/// Pulse parameters seen by the nucleus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestFramePulse {
    pub doppler: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    pub bandwidth_ev: f64,
    /// Duration parameter T/D (s).
    pub duration: f64,
    /// Peak intensity D²·I (W/m²).
    pub peak_intensity: f64,
}

pub fn to_rest_frame(pulse: &LaserPulse, gamma: f64) -> RestFramePulse {
    let d = doppler_factor(gamma, pulse.theta);
    RestFramePulse {
        doppler: d,
        omega: d * pulse.angular_frequency(),
        bandwidth_ev: d * pulse.bandwidth_ev,
        duration: pulse.duration / d,
        peak_intensity: d * d * pulse.peak_intensity,
    }
}

/// Rest-frame detuning Δ = γ(1 + β cos θ)ω − c·k in rad/s.
pub fn detuning(pulse: &LaserPulse, gamma: f64, k_transition: f64) -> f64 {
    doppler_factor(gamma, pulse.theta) * pulse.angular_frequency() - SPEED_OF_LIGHT * k_transition
}

/// Relativistic factors and the two Doppler factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameParams {
    pub gamma: f64,
    pub beta: f64,
    pub d_pump: f64,
    pub d_stokes: f64,
}

impl FrameParams {
    pub fn new(gamma: f64, theta_stokes: f64) -> Result<Self, KinematicsError> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(KinematicsError::InvalidGamma(gamma));
        }
        let (beta, _) = beta_from_gamma(gamma);
        Ok(Self {
            gamma,
            beta,
            d_pump: doppler_factor(gamma, 0.0),
            d_stokes: doppler_factor(gamma, theta_stokes),
        })
    }
}

/// Resonant operating point for one nucleus, pump photon energy and geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonancePlan {
    pub geometry: Geometry,
    pub e_pump_ev: f64,
    pub e_stokes_ev: f64,
    pub theta_stokes: f64,
    pub frame: FrameParams,
}

pub fn plan(
    system: &NuclearSystem,
    e_pump_ev: f64,
    geometry: Geometry,
) -> Result<ResonancePlan, KinematicsError> {
    let gamma = solve_gamma(system.e31_ev(), e_pump_ev)?;
    let (theta_stokes, e_stokes_ev) = match geometry {
        Geometry::Copropagating => (0.0, solve_stokes_energy(system.e32_ev(), gamma)),
        Geometry::Crossed => (solve_stokes_angle(system.e32_ev(), e_pump_ev, gamma)?, e_pump_ev),
    };
    Ok(ResonancePlan {
        geometry,
        e_pump_ev,
        e_stokes_ev,
        theta_stokes,
        frame: FrameParams::new(gamma, theta_stokes)?,
    })
}
