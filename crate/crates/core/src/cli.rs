//! The `ncpt` command line.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_raw, resolve, ConfigError, RawConfig, RunConfig};
use crate::constants::{KEV, MEV_MILLI};
use crate::csvio::{
    fmt_f64, write_csv, CsvError, CsvRecord, DetuningRow, MismatchRow, PiPulseRow, PlanRow, TrajectoryRow,
};
use crate::dynamics::Sampling;
use crate::kinematics::Geometry;
use crate::presets::PRESETS;
use crate::scan::robust::symmetric_grid;
use crate::scan::{
    detuning_robustness, intensity_sweep, mismatch_robustness, optimize_delay, pi_pulse_intensity, pi_ratio,
    restoring_multiplier, LaserProfile, Perturbation, ScanError, Transition,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const WORKERS_ENV: &str = "NCPT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "ncpt", version, about = "Nuclear coherent population transfer on relativistic nuclei")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonance kinematics: γ, Stokes angle or energy, Doppler factors.
    Plan(Common),
    /// One evolution; writes the density-matrix trajectory.
    Simulate(SimulateArgs),
    /// Pump-intensity sweep with the delay optimized at each point.
    Sweep(SweepArgs),
    /// π-pulse intensities of both transitions.
    Pipulse(Common),
    /// Transfer versus an equal detuning of both fields.
    RobustDetuning(DetuningArgs),
    /// Transfer over a grid of Stokes-angle and γ errors.
    RobustMismatch(MismatchArgs),
    /// Built-in nuclei and their Stokes ratios.
    Presets(PresetsArgs),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// sxfel or xfelo.
    #[arg(long)]
    pub laser: Option<LaserProfile>,
    /// copro or crossed.
    #[arg(long)]
    pub geometry: Option<Geometry>,
    /// Stokes-to-pump intensity ratio.
    #[arg(long, allow_hyphen_values = true)]
    pub ratio: Option<f64>,
    /// Pump photon energy (keV).
    #[arg(long, allow_hyphen_values = true)]
    pub photon_kev: Option<f64>,
    /// Pump peak intensity (W/cm²).
    #[arg(long, allow_hyphen_values = true)]
    pub intensity: Option<f64>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Delay τ_p − τ_S (s); optimized when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub delay: Option<f64>,
    /// Number of evenly spaced samples.
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Write every accepted integrator step instead.
    #[arg(long)]
    pub every_step: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub i_min: Option<f64>,
    #[arg(long)]
    pub i_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DetuningArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated equal detunings (meV).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_mev: Option<Vec<f64>>,
    /// Fixed delay (s); the unperturbed optimum when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub delay: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MismatchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Half-width of the angle grid (rad).
    #[arg(long)]
    pub dtheta: Option<f64>,
    /// Half-width of the relative γ grid.
    #[arg(long)]
    pub dgamma: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Comma-separated intensity multipliers tried in order.
    #[arg(long, value_delimiter = ',')]
    pub multipliers: Option<Vec<f64>>,
    /// Fixed delay (s); evaluates only the base intensity.
    #[arg(long, allow_hyphen_values = true)]
    pub delay: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Integration(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Integration(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Integration(m) => write!(f, "integration failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Pool(m) => CliError::Io(m),
            e if e.is_integration_failure() => CliError::Integration(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(c) => cmd_plan(&c),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Pipulse(c) => cmd_pipulse(&c),
        Command::RobustDetuning(a) => cmd_detuning(&a),
        Command::RobustMismatch(a) => cmd_mismatch(&a),
        Command::Presets(a) => cmd_presets(&a),
    }
}

/// Worker count from the environment, if set.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Input(format!("{WORKERS_ENV} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

/// Reads the config file (if any), applies flags and the environment, and
/// resolves defaults.
fn load(common: &Common, tweak: impl FnOnce(&mut RawConfig)) -> Result<RunConfig, CliError> {
    let (mut raw, text) = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            (parse_raw(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?, Some(text))
        }
        None => (RawConfig::default(), None),
    };
    if common.preset.is_some() {
        raw.preset = common.preset.clone();
    }
    if common.laser.is_some() {
        raw.laser = common.laser;
    }
    if common.geometry.is_some() {
        raw.geometry = common.geometry;
    }
    if common.ratio.is_some() {
        raw.ratio = common.ratio;
    }
    if common.photon_kev.is_some() {
        raw.laser_params.photon_keV = common.photon_kev;
    }
    if common.intensity.is_some() {
        raw.laser_params.intensity_Wcm2 = common.intensity;
    }
    if let Some(out) = &common.out {
        raw.output = Some(out.display().to_string());
    }
    if let Some(w) = workers_from_env()? {
        raw.workers = Some(w);
    }
    tweak(&mut raw);
    resolve(&raw).map_err(|mut e| {
        if let (None, Some(text)) = (e.line, &text) {
            e.line = crate::config::locate(text, &e.path);
        }
        e.into()
    })
}

/// Version and hash line followed by the effective configuration.
fn header_comments(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("ncpt {VERSION} config={} preset={}", cfg.hash(), cfg.nucleus_label()),
        "effective configuration:".into(),
        cfg.echo(),
    ]
}

fn emit<R: CsvRecord>(cfg: Option<&RunConfig>, rows: &[R], mut comments: Vec<String>, trailer: &[String]) -> Result<(), CliError> {
    if let Some(cfg) = cfg {
        let mut head = header_comments(cfg);
        head.append(&mut comments);
        comments = head;
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, rows, &comments)?;
    for t in trailer {
        buf.extend_from_slice(format!("# {t}\r\n").as_bytes());
    }
    match cfg.and_then(|c| c.output.as_ref()) {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn cmd_plan(c: &Common) -> Result<(), CliError> {
    let cfg = load(c, |_| {})?;
    let ctx = cfg.context();
    let p = &ctx.plan;
    let row = PlanRow {
        nucleus: cfg.nucleus_label(),
        geometry: p.geometry.short_name().into(),
        e_pump_kev: p.e_pump_ev / KEV,
        gamma: p.frame.gamma,
        theta_s_rad: p.theta_stokes,
        e_s_kev: p.e_stokes_ev / KEV,
        d_pump: p.frame.d_pump,
        d_stokes: p.frame.d_stokes,
    };
    let t = ctx.laser.duration;
    let notes = vec![
        format!("beta={}", fmt_f64(p.frame.beta)),
        format!("rest_width_pump_s={} rest_width_stokes_s={}", fmt_f64(t / p.frame.d_pump), fmt_f64(t / p.frame.d_stokes)),
        format!(
            "rest_energy_pump_keV={} rest_energy_stokes_keV={}",
            fmt_f64(p.frame.d_pump * p.e_pump_ev / KEV),
            fmt_f64(p.frame.d_stokes * p.e_stokes_ev / KEV)
        ),
    ];
    emit(Some(&cfg), &[row], notes, &[])
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = load(&a.common, |raw| {
        if a.delay.is_some() {
            raw.delay_s = a.delay;
        }
    })?;
    if !a.every_step && a.samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    let ctx = cfg.context();
    let i_p = cfg.laser_params.intensity_Wcm2;
    let delay = match cfg.delay_s {
        Some(d) => d,
        None => ctx.pool()?.install(|| optimize_delay(&ctx, i_p))?.delay,
    };
    let sampling = if a.every_step { Sampling::EveryStep } else { Sampling::Uniform(a.samples) };
    let traj = ctx.trajectory(i_p, delay, &Perturbation::default(), sampling)?;
    let rows: Vec<TrajectoryRow> = traj.samples.iter().map(TrajectoryRow::from).collect();
    let eta = crate::dynamics::transfer_efficiency(&traj);
    let notes = vec![format!("I_p_Wcm2={} delay_s={}", fmt_f64(i_p), fmt_f64(delay))];
    let trailer = vec![format!(
        "eta={} max_rho33={} steps={} rejected={}",
        fmt_f64(eta),
        fmt_f64(traj.max_rho33),
        traj.stats.accepted,
        traj.stats.rejected
    )];
    emit(Some(&cfg), &rows, notes, &trailer)
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = load(&a.common, |raw| {
        if a.i_min.is_some() {
            raw.sweep.I_min_Wcm2 = a.i_min;
        }
        if a.i_max.is_some() {
            raw.sweep.I_max_Wcm2 = a.i_max;
        }
        if a.points.is_some() {
            raw.sweep.points = a.points;
        }
    })?;
    let ctx = cfg.context();
    let result = intensity_sweep(&cfg.sweep_spec(), &ctx)?;
    let mut trailer = vec![match result.plateau_onset {
        Some(i) => format!("plateau_onset_Wcm2={}", fmt_f64(i)),
        None => "plateau_onset_Wcm2=none".into(),
    }];
    for &i in &result.window_edge_rows {
        trailer.push(format!("warning: optimum at delay-window edge for I_p_Wcm2={}", fmt_f64(result.rows[i].i_p_wcm2)));
    }
    let failures: Vec<String> = result
        .failed_rows()
        .map(|r| format!("failed I_p_Wcm2={}: {}", fmt_f64(r.i_p_wcm2), r.error.as_deref().unwrap_or("")))
        .collect();
    trailer.extend(failures.iter().cloned());
    emit(Some(&cfg), &result.rows, vec![], &trailer)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Integration(failures.join("; ")))
    }
}

fn cmd_pipulse(c: &Common) -> Result<(), CliError> {
    let cfg = load(c, |_| {})?;
    let ctx = cfg.context();
    let rows = [(Transition::Pump, "pump"), (Transition::Stokes, "stokes")]
        .into_iter()
        .map(|(t, name)| {
            let p = pi_pulse_intensity(&ctx, t)?;
            Ok(PiPulseRow {
                transition: name.into(),
                omega0: p.omega0,
                intensity_wcm2: p.intensity_wcm2,
                doppler: p.doppler,
                width_s: p.width,
            })
        })
        .collect::<Result<Vec<_>, ScanError>>()?;
    let notes = vec![format!("ratio_input={} ratio_from_pi={}", fmt_f64(cfg.ratio), fmt_f64(pi_ratio(&ctx)?))];
    emit(Some(&cfg), &rows, notes, &[])
}

fn cmd_detuning(a: &DetuningArgs) -> Result<(), CliError> {
    let cfg = load(&a.common, |raw| {
        if a.delta_mev.is_some() {
            raw.robust.delta_meV = a.delta_mev.clone();
        }
        if a.delay.is_some() {
            raw.robust.delay_s = a.delay;
        }
        if a.common.intensity.is_some() {
            raw.robust.intensity_Wcm2 = a.common.intensity;
        }
    })?;
    let ctx = cfg.context();
    let r = &cfg.robust;
    let grid: Vec<f64> = r.delta_meV.iter().map(|d| d * MEV_MILLI).collect();
    let curve = detuning_robustness(&ctx, r.intensity_Wcm2, r.delay_s, &grid)?;
    let rows: Vec<DetuningRow> =
        curve.points.iter().map(|&(d, eta)| DetuningRow { delta_mev: d / MEV_MILLI, eta }).collect();
    let notes = vec![format!(
        "I_p_Wcm2={} delay_s={} baseline_eta={} max_relative_drop={}",
        fmt_f64(curve.i_p_wcm2),
        fmt_f64(curve.delay),
        fmt_f64(curve.baseline_eta),
        fmt_f64(curve.max_relative_drop)
    )];
    emit(Some(&cfg), &rows, notes, &[])
}

fn cmd_mismatch(a: &MismatchArgs) -> Result<(), CliError> {
    let cfg = load(&a.common, |raw| {
        if a.dtheta.is_some() {
            raw.robust.dtheta_rad = a.dtheta;
        }
        if a.dgamma.is_some() {
            raw.robust.dgamma_rel = a.dgamma;
        }
        if a.grid_points.is_some() {
            raw.robust.grid_points = a.grid_points;
        }
        if a.multipliers.is_some() {
            raw.robust.multipliers = a.multipliers.clone();
        }
        if a.delay.is_some() {
            raw.robust.delay_s = a.delay;
        }
        if a.common.intensity.is_some() {
            raw.robust.intensity_Wcm2 = a.common.intensity;
        }
    })?;
    let ctx = cfg.context();
    let r = &cfg.robust;
    let dtheta = symmetric_grid(r.dtheta_rad, r.grid_points);
    let dgamma = symmetric_grid(r.dgamma_rel, r.grid_points);
    let (restored, surfaces) = match r.delay_s {
        Some(d) => {
            let s = mismatch_robustness(&ctx, r.intensity_Wcm2, Some(d), &dtheta, &dgamma)?;
            ((s.min_eta >= r.target).then_some(1.0), vec![(1.0, s)])
        }
        None => restoring_multiplier(&ctx, r.intensity_Wcm2, &dtheta, &dgamma, &r.multipliers, r.target)?,
    };
    let rows: Vec<MismatchRow> = surfaces
        .iter()
        .flat_map(|(m, s)| s.cells.iter().map(move |c| MismatchRow::new(*m, s.i_p_wcm2, s.delay, c)))
        .collect();
    let mut trailer: Vec<String> = surfaces
        .iter()
        .map(|(m, s)| {
            format!("multiplier={} baseline_eta={} min_eta={}", fmt_f64(*m), fmt_f64(s.baseline_eta), fmt_f64(s.min_eta))
        })
        .collect();
    trailer.push(match restored {
        Some(m) => format!("restoring_multiplier={}", fmt_f64(m)),
        None => format!("restoring_multiplier=none (target {})", fmt_f64(r.target)),
    });
    emit(Some(&cfg), &rows, vec![], &trailer)
}

struct PresetRow {
    id: &'static str,
    label: &'static str,
    a: u32,
    levels: [f64; 3],
    t31: String,
    t32: String,
    ratio_crossed: f64,
    ratio_copro: f64,
    gamma3_ev: f64,
    gamma2_ev: f64,
}

impl CsvRecord for PresetRow {
    const HEADER: &'static [&'static str] = &[
        "id",
        "nucleus",
        "A",
        "E1_keV",
        "E2_keV",
        "E3_keV",
        "t31",
        "t32",
        "ratio_crossed",
        "ratio_copro",
        "Gamma3_eV",
        "Gamma2_eV",
    ];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.id.to_string(), self.label.to_string(), self.a.to_string()];
        f.extend(self.levels.map(|e| e.to_string()));
        f.push(self.t31.clone());
        f.push(self.t32.clone());
        f.push(self.ratio_crossed.to_string());
        f.push(self.ratio_copro.to_string());
        f.push(fmt_f64(self.gamma3_ev));
        f.push(fmt_f64(self.gamma2_ev));
        f
    }

    fn from_fields(_: &[&str]) -> Result<Self, String> {
        Err("preset table is write-only".into())
    }
}

fn cmd_presets(a: &PresetsArgs) -> Result<(), CliError> {
    let rows = PRESETS
        .iter()
        .map(|p| {
            let sys = p.system().map_err(|e| CliError::Input(e.to_string()))?;
            Ok(PresetRow {
                id: p.id,
                label: p.label,
                a: p.mass_number,
                levels: p.levels_kev,
                t31: format!("{} B={}", sys.t31.label(), p.t31.b_wu),
                t32: format!("{} B={}", sys.t32.label(), p.t32.b_wu),
                ratio_crossed: p.ratio_crossed,
                ratio_copro: p.ratio_copropagating,
                gamma3_ev: sys.gamma3_ev,
                gamma2_ev: sys.gamma2_ev,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows, &[format!("ncpt {VERSION} presets")])?;
    match &a.out {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}
