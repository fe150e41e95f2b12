//! Run configuration: a strict TOML schema, preset merging, defaults and
//! validation.
//!
//! ```toml
//! preset = "gd154"
//! laser = "xfelo"
//! geometry = "copro"
//!
//! [laser_params]
//! intensity_Wcm2 = 1e19
//!
//! [sweep]
//! I_min_Wcm2 = 1e17
//! I_max_Wcm2 = 1e19
//! points = 21
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

use crate::constants::{KEV, MEV_MILLI, PICOSECOND};
use crate::dynamics::{DynamicsOptions, IntensityFrame, StepControl};
use crate::kinematics::Geometry;
use crate::nuclear::{build_system, NuclearConfig, NuclearSystem, TransitionSpec};
use crate::presets;
use crate::scan::{
    pi_pulse_intensity, DelaySearch, LaserProfile, LaserSettings, ScanContext, SweepSpec, Transition,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// Dotted key path, empty for document-level errors.
    pub path: String,
    /// 1-based line in the source text, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.path.is_empty(), self.line) {
            (true, Some(l)) => write!(f, "config line {l}: {}", self.message),
            (true, None) => write!(f, "config: {}", self.message),
            (false, Some(l)) => write!(f, "config key `{}` (line {l}): {}", self.path, self.message),
            (false, None) => write!(f, "config key `{}`: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Nucleus fields; with a preset, any subset overrides it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct NucleusInput {
    pub A: Option<u32>,
    pub E1_keV: Option<f64>,
    pub E2_keV: Option<f64>,
    pub E3_keV: Option<f64>,
    pub t31: Option<TransitionSpec>,
    pub t32: Option<TransitionSpec>,
    pub extra_loss_eV: Option<f64>,
    pub Gamma3_eV: Option<f64>,
    pub Gamma2_eV: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct LaserInput {
    pub photon_keV: Option<f64>,
    pub intensity_Wcm2: Option<f64>,
    pub duration_ps: Option<f64>,
    pub bandwidth_meV: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SweepInput {
    pub I_min_Wcm2: Option<f64>,
    pub I_max_Wcm2: Option<f64>,
    pub points: Option<usize>,
    pub window_widths: Option<f64>,
    pub coarse_points: Option<usize>,
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RobustInput {
    pub intensity_Wcm2: Option<f64>,
    pub delay_s: Option<f64>,
    pub delta_meV: Option<Vec<f64>>,
    pub dtheta_rad: Option<f64>,
    pub dgamma_rel: Option<f64>,
    pub grid_points: Option<usize>,
    pub multipliers: Option<Vec<f64>>,
    pub target: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorInput {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
    pub h_max_s: Option<f64>,
    pub fixed_step_s: Option<f64>,
    pub dephasing_per_s: Option<f64>,
    pub intensity_frame: Option<FrameChoice>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    Lab,
    Rest,
}

/// The document as written; everything optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub nucleus: Option<NucleusInput>,
    pub laser: Option<LaserProfile>,
    pub geometry: Option<Geometry>,
    pub ratio: Option<f64>,
    pub delay_s: Option<f64>,
    #[serde(default)]
    pub laser_params: LaserInput,
    #[serde(default)]
    pub sweep: SweepInput,
    #[serde(default)]
    pub robust: RobustInput,
    #[serde(default)]
    pub integrator: IntegratorInput,
    pub output: Option<String>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct LaserParams {
    pub photon_keV: f64,
    pub intensity_Wcm2: f64,
    pub duration_ps: f64,
    pub bandwidth_meV: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct SweepParams {
    pub I_min_Wcm2: f64,
    pub I_max_Wcm2: f64,
    pub points: usize,
    pub window_widths: f64,
    pub coarse_points: usize,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct RobustParams {
    pub intensity_Wcm2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_s: Option<f64>,
    pub delta_meV: Vec<f64>,
    pub dtheta_rad: f64,
    pub dgamma_rel: f64,
    pub grid_points: usize,
    pub multipliers: Vec<f64>,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegratorParams {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_max_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_step_s: Option<f64>,
    pub dephasing_per_s: f64,
    pub intensity_frame: FrameChoice,
}

/// Effective configuration after merging the preset and applying defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub laser: LaserProfile,
    pub geometry: Geometry,
    pub ratio: f64,
    /// Pump–Stokes delay τ_p − τ_S for single runs; optimized when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "is_zero")]
    pub workers: usize,
    pub nucleus: NuclearConfig,
    pub laser_params: LaserParams,
    pub sweep: SweepParams,
    pub robust: RobustParams,
    pub integrator: IntegratorParams,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

pub const DEFAULT_DELTA_MEV: [f64; 7] = [-10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0];
pub const DEFAULT_MULTIPLIERS: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0];

/// Parses a TOML document into the raw schema.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| toml_error(text, "", &e))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        toml_error(text, &path, e.inner())
    })
}

fn toml_error(text: &str, path: &str, e: &toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| line_of(text, s.start)).or_else(|| locate(text, path));
    ConfigError { path: path.to_string(), line, message: e.message().trim().to_string() }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the value at dotted `path`, if present in `text`.
pub fn locate(text: &str, path: &str) -> Option<usize> {
    if path.is_empty() {
        return None;
    }
    let doc = toml::de::DeTable::parse(text).ok()?;
    let mut table = doc.get_ref();
    let mut segments = path.split('.').peekable();
    while let Some(seg) = segments.next() {
        let (_, value) = table.iter().find(|(k, _)| k.get_ref().as_ref() == seg)?;
        if segments.peek().is_none() {
            return Some(line_of(text, value.span().start));
        }
        table = value.get_ref().as_table()?;
    }
    None
}

/// Parses and resolves a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = parse_raw(text)?;
    resolve(&raw).map_err(|mut e| {
        if e.line.is_none() {
            e.line = locate(text, &e.path);
        }
        e
    })
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), line: None, message: message.into() }
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(path, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(path, format!("must be non-negative and finite, got {v}")))
    }
}

fn merge_nucleus(preset: Option<&presets::Preset>, input: Option<&NucleusInput>) -> Result<NuclearConfig, ConfigError> {
    let empty = NucleusInput::default();
    let n = input.unwrap_or(&empty);
    let base = preset.map(|p| p.config());
    macro_rules! pick {
        ($field:ident) => {
            match (n.$field, base.as_ref().map(|b| b.$field)) {
                (Some(v), _) => v,
                (None, Some(v)) => v,
                (None, None) => {
                    return Err(err(concat!("nucleus.", stringify!($field)), "required when no preset is given"))
                }
            }
        };
    }
    let cfg = NuclearConfig {
        A: pick!(A),
        E1_keV: pick!(E1_keV),
        E2_keV: pick!(E2_keV),
        E3_keV: pick!(E3_keV),
        t31: pick!(t31),
        t32: pick!(t32),
        extra_loss_eV: n.extra_loss_eV,
        Gamma3_eV: n.Gamma3_eV,
        Gamma2_eV: n.Gamma2_eV,
    };
    for (path, v) in [("nucleus.E1_keV", cfg.E1_keV), ("nucleus.E2_keV", cfg.E2_keV), ("nucleus.E3_keV", cfg.E3_keV)] {
        non_negative(path, v)?;
    }
    positive("nucleus.t31.B_wu", cfg.t31.b_wu)?;
    positive("nucleus.t32.B_wu", cfg.t32.b_wu)?;
    if let Some(v) = cfg.extra_loss_eV {
        non_negative("nucleus.extra_loss_eV", v)?;
    }
    if let Some(v) = cfg.Gamma3_eV {
        positive("nucleus.Gamma3_eV", v)?;
    }
    if let Some(v) = cfg.Gamma2_eV {
        non_negative("nucleus.Gamma2_eV", v)?;
    }
    Ok(cfg)
}

/// Applies defaults and validates every field.
pub fn resolve(raw: &RawConfig) -> Result<RunConfig, ConfigError> {
    let preset = match &raw.preset {
        Some(id) => Some(presets::find(id).ok_or_else(|| {
            err("preset", format!("unknown preset '{id}' (known: {})", presets::ids().collect::<Vec<_>>().join(", ")))
        })?),
        None => None,
    };
    let nucleus = merge_nucleus(preset, raw.nucleus.as_ref())?;
    let system = build_system(&nucleus).map_err(|e| err("nucleus", e.to_string()))?;

    let laser = raw.laser.unwrap_or(LaserProfile::Sxfel);
    let geometry = raw.geometry.unwrap_or(Geometry::Crossed);
    let ratio = match (raw.ratio, preset) {
        (Some(r), _) => positive("ratio", r)?,
        (None, Some(p)) => p.ratio(geometry),
        (None, None) => return Err(err("ratio", "required when no preset is given")),
    };
    if let Some(d) = raw.delay_s {
        if !d.is_finite() {
            return Err(err("delay_s", "must be finite"));
        }
    }

    let defaults = laser.settings();
    let lp = &raw.laser_params;
    let photon_kev = positive("laser_params.photon_keV", lp.photon_keV.unwrap_or(defaults.photon_energy_ev / KEV))?;
    let duration_ps = positive("laser_params.duration_ps", lp.duration_ps.unwrap_or(defaults.duration / PICOSECOND))?;
    let bandwidth_mev =
        positive("laser_params.bandwidth_meV", lp.bandwidth_meV.unwrap_or(defaults.bandwidth_ev / MEV_MILLI))?;
    if let Some(i) = lp.intensity_Wcm2 {
        positive("laser_params.intensity_Wcm2", i)?;
    }

    let settings = LaserSettings {
        photon_energy_ev: photon_kev * KEV,
        duration: duration_ps * PICOSECOND,
        bandwidth_ev: bandwidth_mev * MEV_MILLI,
    };
    let ctx = ScanContext::new(system, settings, geometry, ratio).map_err(|e| err("laser_params.photon_keV", e.to_string()))?;
    let i_pi = pi_pulse_intensity(&ctx, Transition::Pump).map_err(|e| err("nucleus", e.to_string()))?.intensity_wcm2;
    let intensity_wcm2 = lp.intensity_Wcm2.unwrap_or(i_pi);

    let s = &raw.sweep;
    let search = DelaySearch::default();
    let sweep = SweepParams {
        I_min_Wcm2: positive("sweep.I_min_Wcm2", s.I_min_Wcm2.unwrap_or(1e-2 * i_pi))?,
        I_max_Wcm2: positive("sweep.I_max_Wcm2", s.I_max_Wcm2.unwrap_or(1e4 * i_pi))?,
        points: s.points.unwrap_or(25),
        window_widths: positive("sweep.window_widths", s.window_widths.unwrap_or(search.window_widths))?,
        coarse_points: s.coarse_points.unwrap_or(search.coarse_points),
        rel_tol: positive("sweep.rel_tol", s.rel_tol.unwrap_or(search.rel_tol))?,
    };
    if sweep.I_max_Wcm2 < sweep.I_min_Wcm2 {
        return Err(err("sweep.I_max_Wcm2", "must not be below sweep.I_min_Wcm2"));
    }
    if sweep.points == 0 || (sweep.points == 1 && sweep.I_max_Wcm2 != sweep.I_min_Wcm2) {
        return Err(err("sweep.points", "need at least two points for a range"));
    }
    if sweep.coarse_points < 3 {
        return Err(err("sweep.coarse_points", "must be at least 3"));
    }

    let r = &raw.robust;
    let robust = RobustParams {
        intensity_Wcm2: positive("robust.intensity_Wcm2", r.intensity_Wcm2.unwrap_or(intensity_wcm2))?,
        delay_s: r.delay_s,
        delta_meV: r.delta_meV.clone().unwrap_or_else(|| DEFAULT_DELTA_MEV.to_vec()),
        dtheta_rad: non_negative("robust.dtheta_rad", r.dtheta_rad.unwrap_or(1e-5))?,
        dgamma_rel: non_negative("robust.dgamma_rel", r.dgamma_rel.unwrap_or(1e-6))?,
        grid_points: r.grid_points.unwrap_or(3),
        multipliers: r.multipliers.clone().unwrap_or_else(|| DEFAULT_MULTIPLIERS.to_vec()),
        target: r.target.unwrap_or(0.99),
    };
    if robust.delay_s.is_some_and(|d| !d.is_finite()) {
        return Err(err("robust.delay_s", "must be finite"));
    }
    if robust.delta_meV.is_empty() || robust.delta_meV.iter().any(|d| !d.is_finite()) {
        return Err(err("robust.delta_meV", "must be a non-empty list of finite values"));
    }
    if robust.grid_points == 0 {
        return Err(err("robust.grid_points", "must be at least 1"));
    }
    if robust.multipliers.is_empty() || robust.multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(err("robust.multipliers", "must be a non-empty list of positive values"));
    }
    if !(robust.target > 0.0 && robust.target <= 1.0) {
        return Err(err("robust.target", format!("must lie in (0, 1], got {}", robust.target)));
    }

    let g = &raw.integrator;
    let control = StepControl::default();
    let integrator = IntegratorParams {
        rtol: positive("integrator.rtol", g.rtol.unwrap_or(control.rtol))?,
        atol: positive("integrator.atol", g.atol.unwrap_or(control.atol))?,
        max_steps: g.max_steps.unwrap_or(control.max_steps),
        h_max_s: g.h_max_s.map(|h| positive("integrator.h_max_s", h)).transpose()?,
        fixed_step_s: g.fixed_step_s.map(|h| positive("integrator.fixed_step_s", h)).transpose()?,
        dephasing_per_s: non_negative("integrator.dephasing_per_s", g.dephasing_per_s.unwrap_or(0.0))?,
        intensity_frame: g.intensity_frame.unwrap_or(FrameChoice::Lab),
    };
    if integrator.max_steps == 0 {
        return Err(err("integrator.max_steps", "must be positive"));
    }

    Ok(RunConfig {
        preset: preset.map(|p| p.id.to_string()),
        laser,
        geometry,
        ratio,
        delay_s: raw.delay_s,
        output: raw.output.clone(),
        workers: raw.workers.unwrap_or(0),
        nucleus,
        laser_params: LaserParams {
            photon_keV: photon_kev,
            intensity_Wcm2: intensity_wcm2,
            duration_ps,
            bandwidth_meV: bandwidth_mev,
        },
        sweep,
        robust,
        integrator,
    })
}

impl RunConfig {
    pub fn system(&self) -> NuclearSystem {
        build_system(&self.nucleus).expect("validated during resolve")
    }

    pub fn laser_settings(&self) -> LaserSettings {
        LaserSettings {
            photon_energy_ev: self.laser_params.photon_keV * KEV,
            duration: self.laser_params.duration_ps * PICOSECOND,
            bandwidth_ev: self.laser_params.bandwidth_meV * MEV_MILLI,
        }
    }

    pub fn dynamics_options(&self) -> DynamicsOptions {
        let g = &self.integrator;
        DynamicsOptions {
            control: StepControl {
                rtol: g.rtol,
                atol: g.atol,
                h_max: g.h_max_s,
                max_steps: g.max_steps,
                fixed_step: g.fixed_step_s,
                ..StepControl::default()
            },
            intensity_frame: match g.intensity_frame {
                FrameChoice::Lab => IntensityFrame::Lab,
                FrameChoice::Rest => IntensityFrame::Rest,
            },
            dephasing: g.dephasing_per_s,
            ..DynamicsOptions::default()
        }
    }

    pub fn context(&self) -> ScanContext {
        let mut ctx = ScanContext::new(self.system(), self.laser_settings(), self.geometry, self.ratio)
            .expect("validated during resolve");
        ctx.delay_search = DelaySearch {
            window_widths: self.sweep.window_widths,
            coarse_points: self.sweep.coarse_points,
            rel_tol: self.sweep.rel_tol,
        };
        ctx.options = self.dynamics_options();
        ctx.workers = self.workers;
        ctx
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec::log_spaced(self.sweep.I_min_Wcm2, self.sweep.I_max_Wcm2, self.sweep.points)
            .expect("validated during resolve")
    }

    /// Effective configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 over the effective configuration, leaving out settings that
    /// cannot change results (worker count, output path).
    pub fn hash(&self) -> String {
        let canonical = RunConfig { workers: 0, output: None, ..self.clone() };
        let digest = Sha256::digest(canonical.echo().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Label of the nucleus for output files.
    pub fn nucleus_label(&self) -> String {
        self.preset.clone().unwrap_or_else(|| format!("A{}", self.nucleus.A))
    }
}
