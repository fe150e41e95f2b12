//! Lab intensity that turns a single Gaussian pulse into a π pulse.

use std::f64::consts::PI;

use super::{ScanContext, ScanError};
use crate::constants::W_PER_CM2;
use crate::dynamics::drive::rabi_coefficient;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    /// |1⟩ ↔ |3⟩
    Pump,
    /// |2⟩ ↔ |3⟩
    Stokes,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiPulse {
    /// Peak Rabi frequency giving area π (rad/s).
    pub omega0: f64,
    /// Lab peak intensity (W/cm²).
    pub intensity_wcm2: f64,
    pub doppler: f64,
    /// Rest-frame Gaussian width T/D (s).
    pub width: f64,
}

/// Solves Ω₀·√(2π)·T/D = π and inverts the Rabi-frequency and
/// effective-intensity relations for the lab intensity.
pub fn pi_pulse_intensity(ctx: &ScanContext, which: Transition) -> Result<PiPulse, ScanError> {
    let frame = &ctx.plan.frame;
    let (transition, doppler, linewidth) = match which {
        Transition::Pump => (&ctx.system.t31, frame.d_pump, ctx.system.pump_linewidth_ev()),
        Transition::Stokes => (&ctx.system.t32, frame.d_stokes, ctx.system.stokes_linewidth_ev()),
    };
    let coef = rabi_coefficient(transition);
    if !(coef > 0.0 && coef.is_finite()) {
        return Err(ScanError::InvalidSpec(format!("transition {} cannot be driven", transition.label())));
    }
    let width = ctx.laser.duration / doppler;
    let omega0 = PI / ((2.0 * PI).sqrt() * width);
    // Ω₀ = coef·√(D²·I_eff)
    let i_eff_rest = (omega0 / coef).powi(2);
    let i_eff_lab = i_eff_rest / (doppler * doppler);
    let fraction = (linewidth / (doppler * ctx.laser.bandwidth_ev)).min(1.0);
    Ok(PiPulse { omega0, intensity_wcm2: i_eff_lab / fraction / W_PER_CM2, doppler, width })
}

/// I_π(Stokes) / I_π(pump), the Stokes ratio implied by π-pulse intensities.
pub fn pi_ratio(ctx: &ScanContext) -> Result<f64, ScanError> {
    Ok(pi_pulse_intensity(ctx, Transition::Stokes)?.intensity_wcm2 / pi_pulse_intensity(ctx, Transition::Pump)?.intensity_wcm2)
}
