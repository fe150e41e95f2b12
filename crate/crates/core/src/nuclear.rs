//! Nuclear structure of the three-level Λ scheme.
//!
//! Reduced transition probabilities are tabulated in Weisskopf units and
//! converted here to absolute values. Radiative partial widths follow the
//! standard multipole rate
//!
//! ```text
//! Γ(σL) = 8π(L+1) / (L·((2L+1)!!)²) · k^(2L+1) · B(σL) / (4πε₀)
//! ```
//!
//! with magnetic B values divided by c² so both kinds share one SI form.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

use crate::constants::{
    ELEMENTARY_CHARGE, EPSILON_0, FEMTOMETRE, HBAR_C_EV_M, KEV, NUCLEAR_MAGNETON, SPEED_OF_LIGHT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NuclearError {
    #[error("multipole order must be at least 1, got {0}")]
    InvalidOrder(u32),
    #[error("mass number must be at least 1, got {0}")]
    InvalidMassNumber(u32),
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("level energies must satisfy E3 > E2 > E1 >= 0, got E1={e1} eV, E2={e2} eV, E3={e3} eV")]
    LevelOrdering { e1: f64, e2: f64, e3: f64 },
    #[error("Gamma3 override {gamma3} eV is below the sum of partial widths {sum} eV")]
    Gamma3BelowPartials { gamma3: f64, sum: f64 },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
}

/// Electric or magnetic multipole character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultipoleKind {
    #[serde(rename = "E")]
    Electric,
    #[serde(rename = "M")]
    Magnetic,
}

impl fmt::Display for MultipoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MultipoleKind::Electric => "E",
            MultipoleKind::Magnetic => "M",
        })
    }
}

/// (2L+1)!!
pub fn double_factorial_odd(order: u32) -> f64 {
    (1..=2 * order + 1).step_by(2).map(f64::from).product()
}

/// Single-particle (Weisskopf) estimate of B(σL) with R = 1.2·A^(1/3) fm.
///
/// Electric values are in e²·fm^(2L), magnetic values in μ_N²·fm^(2L−2).
pub fn weisskopf_unit(kind: MultipoleKind, order: u32, mass_number: u32) -> Result<f64, NuclearError> {
    if order == 0 {
        return Err(NuclearError::InvalidOrder(order));
    }
    if mass_number == 0 {
        return Err(NuclearError::InvalidMassNumber(mass_number));
    }
    let l = f64::from(order);
    let radius = 1.2 * f64::from(mass_number).cbrt();
    let geometric = (3.0 / (l + 3.0)).powi(2);
    Ok(match kind {
        MultipoleKind::Electric => geometric * radius.powi(2 * order as i32) / (4.0 * PI),
        MultipoleKind::Magnetic => 10.0 / PI * geometric * radius.powi(2 * order as i32 - 2),
    })
}

/// B(σL) in nuclear units from a value in Weisskopf units.
pub fn to_absolute(
    b_wu: f64,
    kind: MultipoleKind,
    order: u32,
    mass_number: u32,
) -> Result<f64, NuclearError> {
    if !(b_wu > 0.0) {
        return Err(NuclearError::NonPositive { what: "B_wu", value: b_wu });
    }
    Ok(b_wu * weisskopf_unit(kind, order, mass_number)?)
}

/// Converts B(σL) from nuclear units to the unified SI form C²·m^(2L).
pub fn b_to_si(b_abs: f64, kind: MultipoleKind, order: u32) -> f64 {
    match kind {
        MultipoleKind::Electric => {
            b_abs * ELEMENTARY_CHARGE.powi(2) * FEMTOMETRE.powi(2 * order as i32)
        }
        MultipoleKind::Magnetic => {
            b_abs * NUCLEAR_MAGNETON.powi(2) * FEMTOMETRE.powi(2 * order as i32 - 2)
                / SPEED_OF_LIGHT.powi(2)
        }
    }
}

/// Radiative partial width in eV for wave number `k` (1/m) and B(σL) in
/// nuclear units.
pub fn partial_width(
    k: f64,
    kind: MultipoleKind,
    order: u32,
    b_abs: f64,
) -> Result<f64, NuclearError> {
    if order == 0 {
        return Err(NuclearError::InvalidOrder(order));
    }
    if !(k > 0.0) {
        return Err(NuclearError::NonPositive { what: "wave number", value: k });
    }
    if !(b_abs > 0.0) {
        return Err(NuclearError::NonPositive { what: "B_abs", value: b_abs });
    }
    let l = f64::from(order);
    let df = double_factorial_odd(order);
    let prefactor = 8.0 * PI * (l + 1.0) / (l * df * df);
    let width_j =
        prefactor * k.powi(2 * order as i32 + 1) * b_to_si(b_abs, kind, order) / (4.0 * PI * EPSILON_0);
    Ok(width_j / ELEMENTARY_CHARGE)
}

/// One driven multipole transition |3⟩ → |j⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleTransition {
    pub kind: MultipoleKind,
    pub order: u32,
    /// Reduced transition probability in Weisskopf units.
    pub b_wu: f64,
    /// Absolute B(σL): e²·fm^(2L) (electric) or μ_N²·fm^(2L−2) (magnetic).
    pub b_abs: f64,
    /// Transition wave number (1/m).
    pub wave_number: f64,
}

impl MultipoleTransition {
    pub fn new(
        kind: MultipoleKind,
        order: u32,
        b_wu: f64,
        mass_number: u32,
        energy_ev: f64,
    ) -> Result<Self, NuclearError> {
        if !(energy_ev > 0.0) {
            return Err(NuclearError::NonPositive { what: "transition energy", value: energy_ev });
        }
        let b_abs = to_absolute(b_wu, kind, order, mass_number)?;
        Ok(Self { kind, order, b_wu, b_abs, wave_number: energy_ev / HBAR_C_EV_M })
    }

    /// B(σL) in C²·m^(2L), magnetic values already divided by c².
    pub fn b_si(&self) -> f64 {
        b_to_si(self.b_abs, self.kind, self.order)
    }

    pub fn energy_ev(&self) -> f64 {
        self.wave_number * HBAR_C_EV_M
    }

    pub fn partial_width_ev(&self) -> f64 {
        partial_width(self.wave_number, self.kind, self.order, self.b_abs)
            .expect("validated at construction")
    }

    /// Multipolarity label such as "E2" or "M1".
    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.order)
    }
}

/// Transition entry of a nuclear configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub kind: MultipoleKind,
    #[serde(rename = "L")]
    pub order: u32,
    #[serde(rename = "B_wu")]
    pub b_wu: f64,
}

/// Complete description of a Λ system before derived quantities are computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct NuclearConfig {
    pub A: u32,
    pub E1_keV: f64,
    pub E2_keV: f64,
    pub E3_keV: f64,
    pub t31: TransitionSpec,
    pub t32: TransitionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_loss_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Gamma3_eV: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Gamma2_eV: Option<f64>,
}

/// A built Λ system. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NuclearSystem {
    pub mass_number: u32,
    /// Level energies E1, E2, E3 in eV.
    pub levels_ev: [f64; 3],
    pub t31: MultipoleTransition,
    pub t32: MultipoleTransition,
    pub gamma31_ev: f64,
    pub gamma32_ev: f64,
    /// Total width of |3⟩.
    pub gamma3_ev: f64,
    /// Width of |2⟩.
    pub gamma2_ev: f64,
}

impl NuclearSystem {
    pub fn e31_ev(&self) -> f64 {
        self.levels_ev[2] - self.levels_ev[0]
    }

    pub fn e32_ev(&self) -> f64 {
        self.levels_ev[2] - self.levels_ev[1]
    }

    /// Linewidth of the pump transition |1⟩ ↔ |3⟩.
    pub fn pump_linewidth_ev(&self) -> f64 {
        self.gamma3_ev
    }

    /// Linewidth of the Stokes transition |2⟩ ↔ |3⟩.
    pub fn stokes_linewidth_ev(&self) -> f64 {
        self.gamma3_ev + self.gamma2_ev
    }

    /// Width of |3⟩ not accounted for by the two radiative branches.
    pub fn loss_width_ev(&self) -> f64 {
        (self.gamma3_ev - self.gamma31_ev - self.gamma32_ev).max(0.0)
    }
}

/// Builds a [`NuclearSystem`] from a configuration, computing wave numbers,
/// absolute B values and radiative widths.
pub fn build_system(config: &NuclearConfig) -> Result<NuclearSystem, NuclearError> {
    let [e1, e2, e3] = [config.E1_keV, config.E2_keV, config.E3_keV].map(|e| e * KEV);
    if !(e1 >= 0.0 && e2 > e1 && e3 > e2) {
        return Err(NuclearError::LevelOrdering { e1, e2, e3 });
    }
    if config.A == 0 {
        return Err(NuclearError::InvalidMassNumber(config.A));
    }
    let t31 = MultipoleTransition::new(config.t31.kind, config.t31.order, config.t31.b_wu, config.A, e3 - e1)?;
    let t32 = MultipoleTransition::new(config.t32.kind, config.t32.order, config.t32.b_wu, config.A, e3 - e2)?;
    let gamma31_ev = t31.partial_width_ev();
    let gamma32_ev = t32.partial_width_ev();
    let radiative = gamma31_ev + gamma32_ev;

    let extra = config.extra_loss_eV.unwrap_or(0.0);
    if !(extra >= 0.0) {
        return Err(NuclearError::Negative { what: "extra_loss_eV", value: extra });
    }
    let gamma3_ev = match config.Gamma3_eV {
        Some(g) if g < radiative => {
            return Err(NuclearError::Gamma3BelowPartials { gamma3: g, sum: radiative })
        }
        Some(g) => g,
        None => radiative + extra,
    };
    let gamma2_ev = config.Gamma2_eV.unwrap_or(0.0);
    if !(gamma2_ev >= 0.0) {
        return Err(NuclearError::Negative { what: "Gamma2_eV", value: gamma2_ev });
    }

    Ok(NuclearSystem {
        mass_number: config.A,
        levels_ev: [e1, e2, e3],
        t31,
        t32,
        gamma31_ev,
        gamma32_ev,
        gamma3_ev,
        gamma2_ev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gd154() -> NuclearConfig {
        NuclearConfig {
            A: 154,
            E1_keV: 0.0,
            E2_keV: 123.0,
            E3_keV: 1241.0,
            t31: TransitionSpec { kind: MultipoleKind::Electric, order: 1, b_wu: 4.4e-2 },
            t32: TransitionSpec { kind: MultipoleKind::Electric, order: 1, b_wu: 4.9e-2 },
            extra_loss_eV: None,
            Gamma3_eV: None,
            Gamma2_eV: None,
        }
    }

    #[test]
    fn e1_weisskopf_unit_for_a_single_nucleon() {
        // (1/4π)(3/4)²(1.2)²
        let expected = 0.5625 * 1.44 / (4.0 * PI);
        let w = weisskopf_unit(MultipoleKind::Electric, 1, 1).unwrap();
        assert_relative_eq!(w, expected, max_relative = 1e-14);
        assert!((w - 0.0645).abs() < 1e-4);
    }

    #[test]
    fn e2_weisskopf_unit_scales_as_a_four_thirds() {
        let w154 = weisskopf_unit(MultipoleKind::Electric, 2, 154).unwrap();
        let w1 = weisskopf_unit(MultipoleKind::Electric, 2, 1).unwrap();
        assert_relative_eq!(w154 / w1, 154f64.powf(4.0 / 3.0), max_relative = 1e-12);
        // (1/4π)(3/5)²(1.2)^4·154^(4/3), evaluated independently at high precision.
        assert_relative_eq!(w154, 49.035_647_611_896_5, max_relative = 1e-12);
    }

    #[test]
    fn m1_weisskopf_unit_is_mass_independent() {
        let a = weisskopf_unit(MultipoleKind::Magnetic, 1, 1).unwrap();
        let b = weisskopf_unit(MultipoleKind::Magnetic, 1, 238).unwrap();
        assert_eq!(a, b);
        assert!((a - 1.790).abs() < 1e-3);
    }

    #[test]
    fn zero_order_rejected() {
        assert_eq!(
            weisskopf_unit(MultipoleKind::Electric, 0, 10),
            Err(NuclearError::InvalidOrder(0))
        );
        assert!(to_absolute(1.0, MultipoleKind::Magnetic, 0, 10).is_err());
    }

    #[test]
    fn to_absolute_multiplies_the_unit() {
        let unit = weisskopf_unit(MultipoleKind::Electric, 2, 185).unwrap();
        assert_eq!(to_absolute(1.0, MultipoleKind::Electric, 2, 185).unwrap(), unit);
        assert_relative_eq!(
            to_absolute(64.0, MultipoleKind::Electric, 2, 185).unwrap(),
            64.0 * unit,
            max_relative = 1e-15
        );
        let e1 = weisskopf_unit(MultipoleKind::Electric, 1, 154).unwrap();
        assert_relative_eq!(
            to_absolute(4.4e-2, MultipoleKind::Electric, 1, 154).unwrap(),
            4.4e-2 * e1,
            max_relative = 1e-15
        );
        assert!(to_absolute(0.0, MultipoleKind::Electric, 1, 154).is_err());
    }

    #[test]
    fn partial_width_scalings() {
        let w = partial_width(1e13, MultipoleKind::Electric, 1, 0.5).unwrap();
        let w2b = partial_width(1e13, MultipoleKind::Electric, 1, 1.0).unwrap();
        let w2k = partial_width(2e13, MultipoleKind::Electric, 1, 0.5).unwrap();
        assert_relative_eq!(w2b / w, 2.0, max_relative = 1e-13);
        assert_relative_eq!(w2k / w, 8.0, max_relative = 1e-13);
    }

    #[test]
    fn e1_width_matches_textbook_rate() {
        // λ(E1) = 1.59e15 · E[MeV]³ · B[e²fm²] s⁻¹ (Krane); Γ = ħλ.
        let sys = build_system(&gd154()).unwrap();
        let e = 1.241_f64;
        let lambda = 1.59e15 * e.powi(3) * sys.t31.b_abs;
        let gamma_ev = lambda * crate::constants::HBAR_EV_S;
        assert_relative_eq!(sys.gamma31_ev, gamma_ev, max_relative = 5e-3);
        // Order of an eV for MeV E1 transitions.
        assert!(sys.gamma31_ev > 0.01 && sys.gamma31_ev < 10.0);
    }

    #[test]
    fn m1_width_matches_textbook_rate() {
        // λ(M1) = 1.76e13 · E[MeV]³ · B[μN²] s⁻¹
        let b = to_absolute(0.37, MultipoleKind::Magnetic, 1, 185).unwrap();
        let k = 159e3 / HBAR_C_EV_M;
        let w = partial_width(k, MultipoleKind::Magnetic, 1, b).unwrap();
        let lambda = 1.76e13 * 0.159_f64.powi(3) * b;
        assert_relative_eq!(w, lambda * crate::constants::HBAR_EV_S, max_relative = 5e-3);
    }

    #[test]
    fn build_computes_wave_numbers_and_total_width() {
        let sys = build_system(&gd154()).unwrap();
        assert_relative_eq!(sys.t31.wave_number * HBAR_C_EV_M, 1241e3, max_relative = 1e-12);
        assert_relative_eq!(sys.t32.wave_number * HBAR_C_EV_M, 1118e3, max_relative = 1e-12);
        assert_eq!(sys.gamma3_ev, sys.gamma31_ev + sys.gamma32_ev);
        assert_eq!(sys.gamma2_ev, 0.0);
    }

    #[test]
    fn extra_loss_and_override() {
        let mut cfg = gd154();
        cfg.extra_loss_eV = Some(0.5);
        let sys = build_system(&cfg).unwrap();
        assert_relative_eq!(sys.gamma3_ev, sys.gamma31_ev + sys.gamma32_ev + 0.5, max_relative = 1e-14);
        assert_relative_eq!(sys.loss_width_ev(), 0.5, max_relative = 1e-12);

        cfg.extra_loss_eV = None;
        cfg.Gamma3_eV = Some(1e-6);
        assert!(matches!(build_system(&cfg), Err(NuclearError::Gamma3BelowPartials { .. })));
        cfg.Gamma3_eV = Some(2.0);
        assert_eq!(build_system(&cfg).unwrap().gamma3_ev, 2.0);
    }

    #[test]
    fn level_ordering_enforced() {
        let mut cfg = gd154();
        cfg.E2_keV = cfg.E1_keV;
        cfg.t32.b_wu = cfg.t31.b_wu;
        assert!(matches!(build_system(&cfg), Err(NuclearError::LevelOrdering { .. })));
        let mut cfg = gd154();
        cfg.E3_keV = 100.0;
        assert!(build_system(&cfg).is_err());
    }

    proptest! {
        #[test]
        fn width_is_homogeneous(
            k in 1e10f64..1e14,
            b in 1e-4f64..1e3,
            order in 1u32..4,
            scale in 0.1f64..10.0,
            magnetic in any::<bool>(),
        ) {
            let kind = if magnetic { MultipoleKind::Magnetic } else { MultipoleKind::Electric };
            let base = partial_width(k, kind, order, b).unwrap();
            let by_b = partial_width(k, kind, order, b * scale).unwrap();
            let by_k = partial_width(k * scale, kind, order, b).unwrap();
            prop_assert!((by_b / base / scale - 1.0).abs() < 1e-12);
            let expected = scale.powi(2 * order as i32 + 1);
            prop_assert!((by_k / base / expected - 1.0).abs() < 1e-12);
        }
    }
}
