//! Built-in nuclear presets with their tabulated level data and the
//! Stokes-to-pump intensity ratios used for each beam geometry.

use crate::kinematics::Geometry;
use crate::nuclear::{
    build_system, MultipoleKind::Electric as E, MultipoleKind::Magnetic as M, NuclearConfig,
    NuclearError, NuclearSystem, TransitionSpec,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub label: &'static str,
    pub mass_number: u32,
    /// E1, E2, E3 in keV.
    pub levels_kev: [f64; 3],
    pub t31: TransitionSpec,
    pub t32: TransitionSpec,
    /// I_S / I_p for crossed beams.
    pub ratio_crossed: f64,
    /// I_S / I_p for copropagating beams.
    pub ratio_copropagating: f64,
}

const fn tr(kind: crate::nuclear::MultipoleKind, order: u32, b_wu: f64) -> TransitionSpec {
    TransitionSpec { kind, order, b_wu }
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        id: "re185",
        label: "185Re",
        mass_number: 185,
        levels_kev: [0.0, 125.0, 284.0],
        t31: tr(E, 2, 6.4e1),
        t32: tr(M, 1, 3.7e-1),
        ratio_crossed: 0.02,
        ratio_copropagating: 0.03,
    },
    Preset {
        id: "tc97",
        label: "97Tc",
        mass_number: 97,
        // |1⟩ is the 96.57 keV isomer.
        levels_kev: [96.57, 324.0, 657.0],
        t31: tr(E, 2, 5e2),
        t32: tr(E, 1, 6.7e-5),
        ratio_crossed: 20.82,
        ratio_copropagating: 35.06,
    },
    Preset {
        id: "gd154",
        label: "154Gd",
        mass_number: 154,
        levels_kev: [0.0, 123.0, 1241.0],
        t31: tr(E, 1, 4.4e-2),
        t32: tr(E, 1, 4.9e-2),
        ratio_crossed: 0.81,
        ratio_copropagating: 0.90,
    },
    Preset {
        id: "er168",
        label: "168Er",
        mass_number: 168,
        levels_kev: [0.0, 79.0, 1786.0],
        t31: tr(E, 1, 3.2e-3),
        t32: tr(E, 1, 9.1e-3),
        ratio_crossed: 0.34,
        ratio_copropagating: 0.35,
    },
];

impl Preset {
    pub fn config(&self) -> NuclearConfig {
        NuclearConfig {
            A: self.mass_number,
            E1_keV: self.levels_kev[0],
            E2_keV: self.levels_kev[1],
            E3_keV: self.levels_kev[2],
            t31: self.t31,
            t32: self.t32,
            extra_loss_eV: None,
            Gamma3_eV: None,
            Gamma2_eV: None,
        }
    }

    pub fn system(&self) -> Result<NuclearSystem, NuclearError> {
        build_system(&self.config())
    }

    pub fn ratio(&self, geometry: Geometry) -> f64 {
        match geometry {
            Geometry::Crossed => self.ratio_crossed,
            Geometry::Copropagating => self.ratio_copropagating,
        }
    }
}

pub fn find(id: &str) -> Option<&'static Preset> {
    let id = id.to_ascii_lowercase();
    PRESETS.iter().find(|p| p.id == id)
}

pub fn ids() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build() {
        for p in &PRESETS {
            let sys = p.system().unwrap();
            assert!(sys.gamma3_ev > 0.0, "{}", p.id);
            assert!(sys.levels_ev[0] < sys.levels_ev[1]);
        }
    }

    #[test]
    fn tabulated_values_verbatim() {
        let re = find("re185").unwrap();
        assert_eq!(re.levels_kev, [0.0, 125.0, 284.0]);
        assert_eq!((re.t31.kind, re.t31.order, re.t31.b_wu), (E, 2, 64.0));
        assert_eq!((re.t32.kind, re.t32.order, re.t32.b_wu), (M, 1, 0.37));

        let tc = find("tc97").unwrap();
        assert_eq!(tc.levels_kev, [96.57, 324.0, 657.0]);
        assert_eq!((tc.t31.kind, tc.t31.order, tc.t31.b_wu), (E, 2, 500.0));
        assert_eq!((tc.t32.kind, tc.t32.order, tc.t32.b_wu), (E, 1, 6.7e-5));

        let gd = find("gd154").unwrap();
        assert_eq!(gd.levels_kev, [0.0, 123.0, 1241.0]);
        assert_eq!((gd.t31.b_wu, gd.t32.b_wu), (4.4e-2, 4.9e-2));

        let er = find("er168").unwrap();
        assert_eq!(er.levels_kev, [0.0, 79.0, 1786.0]);
        assert_eq!((er.t31.b_wu, er.t32.b_wu), (3.2e-3, 9.1e-3));
        assert_eq!((er.t31.kind, er.t32.kind), (E, E));
    }

    #[test]
    fn ratios_per_geometry() {
        let tc = find("TC97").unwrap();
        assert_eq!(tc.ratio(Geometry::Crossed), 20.82);
        assert_eq!(tc.ratio(Geometry::Copropagating), 35.06);
        assert!(find("u235").is_none());
    }
}
