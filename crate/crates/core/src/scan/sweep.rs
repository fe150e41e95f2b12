//! Pump-intensity sweeps with per-point delay optimization.

use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use super::delay::optimize_delay;
use super::{ScanContext, ScanError};

/// eta at or above which the transfer counts as complete.
pub const PLATEAU_THRESHOLD: f64 = 0.99;
/// |Δτ| below this fraction of the pulse width is labelled mixed.
pub const MIXED_DELAY_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Lab pump intensities (W/cm²), strictly increasing.
    pub intensities_wcm2: Vec<f64>,
}

impl SweepSpec {
    pub fn new(intensities_wcm2: Vec<f64>) -> Result<Self, ScanError> {
        let spec = Self { intensities_wcm2 };
        spec.validate()?;
        Ok(spec)
    }

    /// `n` points spaced evenly in log between `lo` and `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self, ScanError> {
        if !(lo > 0.0 && hi >= lo) || n == 0 || (n == 1 && hi != lo) {
            return Err(ScanError::InvalidSpec(format!("bad log grid [{lo:e}, {hi:e}] with {n} points")));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let grid = (0..n)
            .map(|i| match i {
                0 => lo,
                _ if i == n - 1 => hi,
                _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
            })
            .collect();
        Self::new(grid)
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let g = &self.intensities_wcm2;
        if g.is_empty() {
            return Err(ScanError::InvalidSpec("intensity grid is empty".into()));
        }
        if g.iter().any(|&i| !(i > 0.0 && i.is_finite())) {
            return Err(ScanError::InvalidSpec("intensities must be positive and finite".into()));
        }
        if g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScanError::InvalidSpec("intensity grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Pump before Stokes.
    PiPulse,
    /// Stokes before pump.
    Stirap,
    Mixed,
    Failed,
}

impl Regime {
    pub fn classify(delay: f64, pulse_width: f64) -> Self {
        if delay.abs() <= MIXED_DELAY_FRACTION * pulse_width {
            Regime::Mixed
        } else if delay < 0.0 {
            Regime::PiPulse
        } else {
            Regime::Stirap
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::PiPulse => "pi-pulse",
            Regime::Stirap => "stirap",
            Regime::Mixed => "mixed",
            Regime::Failed => "failed",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi-pulse" => Ok(Regime::PiPulse),
            "stirap" => Ok(Regime::Stirap),
            "mixed" => Ok(Regime::Mixed),
            "failed" => Ok(Regime::Failed),
            other => Err(format!("unknown regime '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub i_p_wcm2: f64,
    pub delay: f64,
    pub eta: f64,
    pub regime: Regime,
    pub omega_p_peak: f64,
    pub omega_s_peak: f64,
    pub adiabaticity: f64,
    pub max_rho33: f64,
    pub at_window_edge: bool,
    /// Failure message for rows whose evolution did not complete.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(i_p_wcm2: f64, err: &ScanError) -> Self {
        Self {
            i_p_wcm2,
            delay: f64::NAN,
            eta: f64::NAN,
            regime: Regime::Failed,
            omega_p_peak: f64::NAN,
            omega_s_peak: f64::NAN,
            adiabaticity: f64::NAN,
            max_rho33: f64::NAN,
            at_window_edge: false,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Lowest intensity from which eta stays at or above the plateau
    /// threshold for every larger grid point.
    pub plateau_onset: Option<f64>,
    /// Rows whose optimum sits at the edge of the delay window.
    pub window_edge_rows: Vec<usize>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.regime == Regime::Failed)
    }
}

pub fn plateau_onset(rows: &[SweepRow], threshold: f64) -> Option<f64> {
    let mut onset = None;
    for row in rows.iter().rev() {
        if row.eta >= threshold {
            onset = Some(row.i_p_wcm2);
        } else {
            break;
        }
    }
    onset
}

/// Runs [`optimize_delay`] at every grid point on the context's worker pool.
/// Failed points become [`Regime::Failed`] rows.
pub fn intensity_sweep(spec: &SweepSpec, ctx: &ScanContext) -> Result<SweepResult, ScanError> {
    spec.validate()?;
    ctx.validate()?;
    let width = ctx.pulse_width();
    let rows: Vec<SweepRow> = ctx.pool()?.install(|| {
        spec.intensities_wcm2
            .par_iter()
            .map(|&i_p| match optimize_delay(ctx, i_p) {
                Ok(opt) => SweepRow {
                    i_p_wcm2: i_p,
                    delay: opt.delay,
                    eta: opt.eta,
                    regime: Regime::classify(opt.delay, width),
                    omega_p_peak: opt.outcome.omega_p_peak,
                    omega_s_peak: opt.outcome.omega_s_peak,
                    adiabaticity: opt.outcome.adiabaticity,
                    max_rho33: opt.outcome.max_rho33,
                    at_window_edge: opt.at_window_edge,
                    error: None,
                },
                Err(e) => SweepRow::failed(i_p, &e),
            })
            .collect()
    });
    let window_edge_rows = rows.iter().enumerate().filter(|(_, r)| r.at_window_edge).map(|(i, _)| i).collect();
    Ok(SweepResult { plateau_onset: plateau_onset(&rows, PLATEAU_THRESHOLD), window_edge_rows, rows })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::context;
    use super::super::LaserProfile;
    use super::*;
    use crate::kinematics::Geometry;

    fn row(i: f64, eta: f64) -> SweepRow {
        SweepRow {
            i_p_wcm2: i,
            delay: 0.0,
            eta,
            regime: Regime::Mixed,
            omega_p_peak: 0.0,
            omega_s_peak: 0.0,
            adiabaticity: 0.0,
            max_rho33: 0.0,
            at_window_edge: false,
            error: None,
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SweepSpec::new(vec![]).is_err());
        assert!(SweepSpec::new(vec![0.0, 0.0]).is_err());
        assert!(SweepSpec::new(vec![2.0, 1.0]).is_err());
        assert!(SweepSpec::new(vec![-1.0]).is_err());
        let g = SweepSpec::log_spaced(1e17, 1e19, 9).unwrap();
        assert_eq!(g.intensities_wcm2.len(), 9);
        assert_eq!(g.intensities_wcm2[0], 1e17);
        assert_eq!(g.intensities_wcm2[8], 1e19);
        assert!((g.intensities_wcm2[4] / 1e18 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_detection() {
        let rows: Vec<_> = [(1.0, 0.5), (2.0, 0.995), (3.0, 0.98), (4.0, 0.991), (5.0, 0.999)]
            .iter()
            .map(|&(i, e)| row(i, e))
            .collect();
        assert_eq!(plateau_onset(&rows, 0.99), Some(4.0));
        assert_eq!(plateau_onset(&rows[..3], 0.99), None);
        let mut failed = rows.clone();
        failed[4].eta = f64::NAN;
        assert_eq!(plateau_onset(&failed, 0.99), None);
    }

    #[test]
    fn regime_labels_follow_delay_sign() {
        assert_eq!(Regime::classify(-1.0, 1.0), Regime::PiPulse);
        assert_eq!(Regime::classify(1.0, 1.0), Regime::Stirap);
        assert_eq!(Regime::classify(0.05, 1.0), Regime::Mixed);
        for r in [Regime::PiPulse, Regime::Stirap, Regime::Mixed, Regime::Failed] {
            assert_eq!(r.label().parse::<Regime>().unwrap(), r);
        }
    }

    #[test]
    fn small_sweep_is_ordered_and_worker_independent() {
        let mut ctx = context("gd154", LaserProfile::Xfelo, Geometry::Copropagating);
        ctx.delay_search.coarse_points = 9;
        let spec = SweepSpec::log_spaced(1e18, 1e19, 3).unwrap();
        ctx.workers = 1;
        let a = intensity_sweep(&spec, &ctx).unwrap();
        ctx.workers = 4;
        let b = intensity_sweep(&spec, &ctx).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.windows(2).all(|w| w[0].i_p_wcm2 < w[1].i_p_wcm2));
        assert!(a.rows.iter().all(|r| (0.0..=1.0).contains(&r.eta)));
    }
}
