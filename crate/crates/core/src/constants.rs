//! Physical constants (CODATA 2018, SI) and unit conversion factors.
//!
//! All internal arithmetic is SI. Energies cross module boundaries in eV,
//! laser intensities in W/cm² at the command line and in CSV output.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Elementary charge (C). Also the J-per-eV conversion factor.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Nuclear magneton (J/T).
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;

/// ħ in eV·s.
pub const HBAR_EV_S: f64 = HBAR / ELEMENTARY_CHARGE;
/// ħc in eV·m.
pub const HBAR_C_EV_M: f64 = HBAR * SPEED_OF_LIGHT / ELEMENTARY_CHARGE;

pub const FEMTOMETRE: f64 = 1e-15;
pub const KEV: f64 = 1e3;
pub const MEV_MILLI: f64 = 1e-3;
pub const PICOSECOND: f64 = 1e-12;
/// 1 W/cm² expressed in W/m².
pub const W_PER_CM2: f64 = 1e4;

/// The constants bundled as one immutable value, for callers that want to
/// pass them around or expose them over the C interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
    pub elementary_charge: f64,
    pub nuclear_magneton: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    c: SPEED_OF_LIGHT,
    eps0: EPSILON_0,
    elementary_charge: ELEMENTARY_CHARGE,
    nuclear_magneton: NUCLEAR_MAGNETON,
};

/// Converts an energy in eV to an angular frequency in rad/s.
#[inline]
pub fn ev_to_angular(energy_ev: f64) -> f64 {
    energy_ev / HBAR_EV_S
}

/// Converts an angular frequency in rad/s to an energy in eV.
#[inline]
pub fn angular_to_ev(omega: f64) -> f64 {
    omega * HBAR_EV_S
}
