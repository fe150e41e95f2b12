//! Λ-system Hamiltonian in the rotating frame and the relaxation terms of
//! the master equation.

use num_complex::Complex64;

use super::density::{CMatrix3, STATE_LEN};
use super::drive::DriveConfig;
use crate::constants::HBAR_EV_S;
use crate::nuclear::NuclearSystem;

/// Real entries of H/ħ (rad/s). Envelopes and detunings are real, so the
/// Hamiltonian is real symmetric.
#[inline]
fn hamiltonian_real(t: f64, drives: &DriveConfig) -> [[f64; 3]; 3] {
    let op = drives.pump.rabi(t);
    let os = drives.stokes.rabi(t);
    let dp = drives.pump.detuning;
    let ds = drives.stokes.detuning;
    [
        [0.0, 0.0, -0.5 * op],
        [0.0, -(dp - ds), -0.5 * os],
        [-0.5 * op, -0.5 * os, -dp],
    ]
}

/// H/ħ in rad/s:
///
/// ```text
///   −½ ⎡ 0    0          Ω_p  ⎤
///      ⎢ 0    2(Δp−ΔS)   Ω_S  ⎥
///      ⎣ Ω_p  Ω_S        2Δp  ⎦
/// ```
pub fn hamiltonian(t: f64, drives: &DriveConfig) -> CMatrix3 {
    let h = hamiltonian_real(t, drives);
    CMatrix3::from_fn(|i, j| Complex64::new(h[i][j], 0.0))
}

/// Decay rates in s⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Relaxation {
    pub gamma3: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma2: f64,
    /// Fraction of the |2⟩ decay that lands in |1⟩; the rest is lost.
    pub gamma2_to_ground: f64,
    /// Extra pure dephasing applied to every coherence.
    pub dephasing: f64,
}

impl Relaxation {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_system(system: &NuclearSystem) -> Self {
        Self {
            gamma3: system.gamma3_ev / HBAR_EV_S,
            gamma31: system.gamma31_ev / HBAR_EV_S,
            gamma32: system.gamma32_ev / HBAR_EV_S,
            gamma2: system.gamma2_ev / HBAR_EV_S,
            gamma2_to_ground: 0.0,
            dephasing: 0.0,
        }
    }

    pub fn with_dephasing(self, dephasing: f64) -> Self {
        Self { dephasing, ..self }
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma3 == 0.0 && self.gamma2 == 0.0 && self.dephasing == 0.0
    }

    /// Damping rate of ρ_ij for i ≠ j.
    #[inline]
    fn coherence_rate(&self, i: usize, j: usize) -> f64 {
        let width = |k: usize| match k {
            0 => 0.0,
            1 => self.gamma2,
            _ => self.gamma3,
        };
        0.5 * (width(i) + width(j)) + self.dephasing
    }

    fn loss_rate_3(&self) -> f64 {
        self.gamma3 - self.gamma31 - self.gamma32
    }
}

/// Relaxation part of dρ/dt and the rate of population loss.
pub fn relaxation(rho: &CMatrix3, relax: &Relaxation) -> (CMatrix3, f64) {
    let mut d = CMatrix3::zeros();
    let p2 = rho[(1, 1)].re;
    let p3 = rho[(2, 2)].re;
    let f = relax.gamma2_to_ground;
    d[(0, 0)] = Complex64::from(relax.gamma31 * p3 + f * relax.gamma2 * p2);
    d[(1, 1)] = Complex64::from(relax.gamma32 * p3 - relax.gamma2 * p2);
    d[(2, 2)] = Complex64::from(-relax.gamma3 * p3);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                d[(i, j)] = -relax.coherence_rate(i, j) * rho[(i, j)];
            }
        }
    }
    let loss = relax.loss_rate_3() * p3 + (1.0 - f) * relax.gamma2 * p2;
    (d, loss)
}

/// Right-hand side of the master equation on the packed state.
#[derive(Clone, Copy, Debug)]
pub struct Liouvillian {
    pub drives: DriveConfig,
    pub relax: Relaxation,
    /// +1 for forward evolution; −1 evolves under −H.
    pub sign: f64,
    coherence: [[f64; 3]; 3],
}

impl Liouvillian {
    pub fn new(drives: DriveConfig, relax: Relaxation, sign: f64) -> Self {
        let coherence = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { 0.0 } else { relax.coherence_rate(i, j) })
        });
        Self { drives, relax, sign, coherence }
    }

    pub fn rhs(&self, t: f64, y: &[f64; STATE_LEN], dy: &mut [f64; STATE_LEN]) {
        let h = hamiltonian_real(t, &self.drives);
        let re = |i: usize, j: usize| y[2 * (3 * i + j)];
        let im = |i: usize, j: usize| y[2 * (3 * i + j) + 1];
        for i in 0..3 {
            for j in 0..3 {
                // [H, ρ]_ij with H real
                let (mut cr, mut ci) = (0.0, 0.0);
                #[allow(clippy::needless_range_loop)]
                for k in 0..3 {
                    cr += h[i][k] * re(k, j) - re(i, k) * h[k][j];
                    ci += h[i][k] * im(k, j) - im(i, k) * h[k][j];
                }
                // −i·sign·[H, ρ]
                let idx = 2 * (3 * i + j);
                dy[idx] = self.sign * ci - self.coherence[i][j] * re(i, j);
                dy[idx + 1] = -self.sign * cr - self.coherence[i][j] * im(i, j);
            }
        }
        let r = &self.relax;
        let p2 = re(1, 1);
        let p3 = re(2, 2);
        let f = r.gamma2_to_ground;
        dy[0] += r.gamma31 * p3 + f * r.gamma2 * p2;
        dy[8] += r.gamma32 * p3 - r.gamma2 * p2;
        dy[16] -= r.gamma3 * p3;
        dy[18] = r.loss_rate_3() * p3 + (1.0 - f) * r.gamma2 * p2;
    }
}
