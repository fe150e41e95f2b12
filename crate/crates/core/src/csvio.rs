//! CSV records with fixed column order and a stable float format.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::DensityMatrix;
use crate::scan::{MismatchCell, Regime, SweepRow};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}: {message}")]
    Field { row: usize, message: String },
}

/// Floats with 12 significant digits, identical on every platform.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// A row type with a fixed header.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    /// Rebuilds a row; `fields` has exactly `HEADER.len()` entries.
    fn from_fields(fields: &[&str]) -> Result<Self, String>;
}

/// Writes the header and rows to `out`, preceded by `#` comment lines. All
/// lines end in CRLF.
pub fn write_csv<R: CsvRecord, W: Write>(out: W, rows: &[R], comments: &[String]) -> Result<(), CsvError> {
    let mut out = out;
    for c in comments {
        for line in c.lines() {
            write!(out, "# {line}\r\n").map_err(|source| CsvError::Io { path: PathBuf::from("<stream>"), source })?;
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|source| CsvError::Io { path: PathBuf::from("<stream>"), source })?;
    Ok(())
}

/// Writes a plain CSV file: header plus one line per row.
pub fn emit_csv<R: CsvRecord>(rows: &[R], path: &Path) -> Result<(), CsvError> {
    emit_csv_with(rows, path, &[])
}

pub fn emit_csv_with<R: CsvRecord>(rows: &[R], path: &Path, comments: &[String]) -> Result<(), CsvError> {
    let io_err = |source| CsvError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    write_csv(&mut buf, rows, comments).map_err(|e| with_path(e, path))?;
    buf.flush().map_err(io_err)
}

fn with_path(e: CsvError, path: &Path) -> CsvError {
    match e {
        CsvError::Io { source, .. } => CsvError::Io { path: path.to_path_buf(), source },
        CsvError::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(source) => CsvError::Io { path: path.to_path_buf(), source },
            _ => unreachable!(),
        },
        other => other,
    }
}

/// Parsed file: `#` comment lines (without the marker) and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvDocument<R> {
    pub comments: Vec<String>,
    pub rows: Vec<R>,
}

pub fn parse_csv<R: CsvRecord>(text: &str) -> Result<CsvDocument<R>, CsvError> {
    let comments = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.strip_prefix(' ').unwrap_or(l).to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != R::HEADER {
        return Err(CsvError::Header { expected: R::HEADER.iter().map(|s| s.to_string()).collect(), found });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().collect();
        rows.push(R::from_fields(&fields).map_err(|message| CsvError::Field { row: i + 1, message })?);
    }
    Ok(CsvDocument { comments, rows })
}

pub fn read_csv<R: CsvRecord>(path: &Path) -> Result<CsvDocument<R>, CsvError> {
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text)
}

/// Lines after the comment block; used to compare outputs that differ only
/// in provenance.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn num(s: &str, col: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{col}: cannot parse '{s}': {e}"))
}

macro_rules! parse_floats {
    ($fields:expr, $header:expr) => {{
        let mut v = Vec::with_capacity($fields.len());
        for (s, col) in $fields.iter().zip($header.iter()) {
            v.push(num(s, col)?);
        }
        v
    }};
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanRow {
    pub nucleus: String,
    pub geometry: String,
    pub e_pump_kev: f64,
    pub gamma: f64,
    pub theta_s_rad: f64,
    pub e_s_kev: f64,
    pub d_pump: f64,
    pub d_stokes: f64,
}

impl CsvRecord for PlanRow {
    const HEADER: &'static [&'static str] =
        &["nucleus", "geometry", "E_pump_keV", "gamma", "theta_S_rad", "E_S_keV", "D_pump", "D_stokes"];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.nucleus.clone(), self.geometry.clone()];
        f.extend(
            [self.e_pump_kev, self.gamma, self.theta_s_rad, self.e_s_kev, self.d_pump, self.d_stokes].map(fmt_f64),
        );
        f
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let v = parse_floats!(f[2..], Self::HEADER[2..]);
        Ok(Self {
            nucleus: f[0].into(),
            geometry: f[1].into(),
            e_pump_kev: v[0],
            gamma: v[1],
            theta_s_rad: v[2],
            e_s_kev: v[3],
            d_pump: v[4],
            d_stokes: v[5],
        })
    }
}

/// One trajectory sample; coherences in the upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub values: [f64; 10],
}

impl From<&DensityMatrix> for TrajectoryRow {
    fn from(s: &DensityMatrix) -> Self {
        let r = &s.rho;
        Self {
            t: s.t,
            values: [
                r[(0, 0)].re,
                r[(1, 1)].re,
                r[(2, 2)].re,
                r[(0, 1)].re,
                r[(0, 1)].im,
                r[(0, 2)].re,
                r[(0, 2)].im,
                r[(1, 2)].re,
                r[(1, 2)].im,
                s.p_loss,
            ],
        }
    }
}

impl CsvRecord for TrajectoryRow {
    const HEADER: &'static [&'static str] = &[
        "t_s", "rho11", "rho22", "rho33", "re_rho12", "im_rho12", "re_rho13", "im_rho13", "re_rho23", "im_rho23",
        "p_loss",
    ];

    fn fields(&self) -> Vec<String> {
        std::iter::once(self.t).chain(self.values).map(fmt_f64).collect()
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let v = parse_floats!(f, Self::HEADER);
        let mut values = [0.0; 10];
        values.copy_from_slice(&v[1..]);
        Ok(Self { t: v[0], values })
    }
}

impl CsvRecord for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "I_p_Wcm2",
        "delay_s",
        "eta",
        "regime",
        "omega_p_peak",
        "omega_s_peak",
        "adiabaticity",
        "max_rho33",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.i_p_wcm2),
            fmt_f64(self.delay),
            fmt_f64(self.eta),
            self.regime.label().to_string(),
            fmt_f64(self.omega_p_peak),
            fmt_f64(self.omega_s_peak),
            fmt_f64(self.adiabaticity),
            fmt_f64(self.max_rho33),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let h = Self::HEADER;
        Ok(Self {
            i_p_wcm2: num(f[0], h[0])?,
            delay: num(f[1], h[1])?,
            eta: num(f[2], h[2])?,
            regime: f[3].parse::<Regime>()?,
            omega_p_peak: num(f[4], h[4])?,
            omega_s_peak: num(f[5], h[5])?,
            adiabaticity: num(f[6], h[6])?,
            max_rho33: num(f[7], h[7])?,
            at_window_edge: false,
            error: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiPulseRow {
    pub transition: String,
    pub omega0: f64,
    pub intensity_wcm2: f64,
    pub doppler: f64,
    pub width_s: f64,
}

impl CsvRecord for PiPulseRow {
    const HEADER: &'static [&'static str] = &["transition", "omega0_per_s", "I_pi_Wcm2", "D", "width_s"];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.transition.clone()];
        f.extend([self.omega0, self.intensity_wcm2, self.doppler, self.width_s].map(fmt_f64));
        f
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let v = parse_floats!(f[1..], Self::HEADER[1..]);
        Ok(Self { transition: f[0].into(), omega0: v[0], intensity_wcm2: v[1], doppler: v[2], width_s: v[3] })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetuningRow {
    pub delta_mev: f64,
    pub eta: f64,
}

impl CsvRecord for DetuningRow {
    const HEADER: &'static [&'static str] = &["delta_meV", "eta"];

    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.delta_mev), fmt_f64(self.eta)]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let v = parse_floats!(f, Self::HEADER);
        Ok(Self { delta_mev: v[0], eta: v[1] })
    }
}

/// A mismatch cell at pump intensity `multiplier` × the base intensity.
#[derive(Clone, Debug, PartialEq)]
pub struct MismatchRow {
    pub multiplier: f64,
    pub i_p_wcm2: f64,
    pub delay_s: f64,
    pub dtheta_rad: f64,
    pub dgamma_rel: f64,
    pub eta: f64,
}

impl MismatchRow {
    pub fn new(multiplier: f64, i_p_wcm2: f64, delay_s: f64, cell: &MismatchCell) -> Self {
        Self { multiplier, i_p_wcm2, delay_s, dtheta_rad: cell.dtheta, dgamma_rel: cell.dgamma_rel, eta: cell.eta }
    }
}

impl CsvRecord for MismatchRow {
    const HEADER: &'static [&'static str] = &["multiplier", "I_p_Wcm2", "delay_s", "dtheta_rad", "dgamma_rel", "eta"];

    fn fields(&self) -> Vec<String> {
        [self.multiplier, self.i_p_wcm2, self.delay_s, self.dtheta_rad, self.dgamma_rel, self.eta]
            .map(fmt_f64)
            .to_vec()
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        let v = parse_floats!(f, Self::HEADER);
        Ok(Self { multiplier: v[0], i_p_wcm2: v[1], delay_s: v[2], dtheta_rad: v[3], dgamma_rel: v[4], eta: v[5] })
    }
}
