//! Sensitivity of the transfer to detunings and beam mismatches.

use rayon::prelude::*;

use super::delay::optimize_delay;
use super::{Perturbation, ScanContext, ScanError};
use crate::kinematics::Geometry;

#[derive(Clone, Debug, PartialEq)]
pub struct DetuningCurve {
    pub i_p_wcm2: f64,
    /// Delay held fixed over the curve.
    pub delay: f64,
    pub baseline_eta: f64,
    /// (equal detuning in eV, eta)
    pub points: Vec<(f64, f64)>,
    /// Largest (baseline − eta)/baseline over the grid.
    pub max_relative_drop: f64,
}

fn fixed_delay(ctx: &ScanContext, i_p_wcm2: f64, delay: Option<f64>) -> Result<f64, ScanError> {
    match delay {
        Some(d) => Ok(d),
        None => Ok(optimize_delay(ctx, i_p_wcm2)?.delay),
    }
}

/// eta with the same detuning on both fields. The delay is optimized once
/// without detuning unless given.
pub fn detuning_robustness(
    ctx: &ScanContext,
    i_p_wcm2: f64,
    delay: Option<f64>,
    delta_grid_ev: &[f64],
) -> Result<DetuningCurve, ScanError> {
    ctx.pool()?.install(|| {
        let delay = fixed_delay(ctx, i_p_wcm2, delay)?;
        let baseline_eta = ctx.run(i_p_wcm2, delay)?.eta;
        let points = delta_grid_ev
            .par_iter()
            .map(|&d| {
                let pert = Perturbation { equal_detuning_ev: d, ..Default::default() };
                Ok((d, ctx.run_perturbed(i_p_wcm2, delay, &pert)?.eta))
            })
            .collect::<Result<Vec<_>, ScanError>>()?;
        let max_relative_drop = points
            .iter()
            .map(|&(_, eta)| if baseline_eta > 0.0 { (baseline_eta - eta) / baseline_eta } else { 0.0 })
            .fold(0.0, f64::max);
        Ok(DetuningCurve { i_p_wcm2, delay, baseline_eta, points, max_relative_drop })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MismatchCell {
    pub dtheta: f64,
    pub dgamma_rel: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MismatchSurface {
    pub i_p_wcm2: f64,
    pub delay: f64,
    pub baseline_eta: f64,
    /// Row-major over (dtheta, dgamma).
    pub cells: Vec<MismatchCell>,
    pub min_eta: f64,
}

/// eta over a grid of Stokes-angle and γ errors at fixed delay. Only
/// meaningful for crossed beams, where the angle sets the resonance.
pub fn mismatch_robustness(
    ctx: &ScanContext,
    i_p_wcm2: f64,
    delay: Option<f64>,
    dtheta_grid: &[f64],
    dgamma_grid: &[f64],
) -> Result<MismatchSurface, ScanError> {
    if ctx.geometry() != Geometry::Crossed {
        return Err(ScanError::InvalidSpec("mismatch scan needs the crossed-beam geometry".into()));
    }
    if dtheta_grid.is_empty() || dgamma_grid.is_empty() {
        return Err(ScanError::InvalidSpec("mismatch grids must be non-empty".into()));
    }
    ctx.pool()?.install(|| {
        let delay = fixed_delay(ctx, i_p_wcm2, delay)?;
        let baseline_eta = ctx.run(i_p_wcm2, delay)?.eta;
        let grid: Vec<(f64, f64)> =
            dtheta_grid.iter().flat_map(|&t| dgamma_grid.iter().map(move |&g| (t, g))).collect();
        let cells = grid
            .par_iter()
            .map(|&(dtheta, dgamma_rel)| {
                let pert = Perturbation { dtheta, dgamma_rel, ..Default::default() };
                Ok(MismatchCell { dtheta, dgamma_rel, eta: ctx.run_perturbed(i_p_wcm2, delay, &pert)?.eta })
            })
            .collect::<Result<Vec<_>, ScanError>>()?;
        let min_eta = cells.iter().map(|c| c.eta).fold(f64::INFINITY, f64::min);
        Ok(MismatchSurface { i_p_wcm2, delay, baseline_eta, cells, min_eta })
    })
}

/// First multiplier reaching the target, and every surface tried.
pub type RestoringSearch = (Option<f64>, Vec<(f64, MismatchSurface)>);

/// Smallest multiplier from `multipliers` (tried in order) for which the
/// mismatch box minimum reaches `target`, with the delay re-optimized at
/// each scaled intensity. Returns the surfaces computed along the way.
pub fn restoring_multiplier(
    ctx: &ScanContext,
    i_p_wcm2: f64,
    dtheta_grid: &[f64],
    dgamma_grid: &[f64],
    multipliers: &[f64],
    target: f64,
) -> Result<RestoringSearch, ScanError> {
    let mut tried = Vec::new();
    for &m in multipliers {
        let surface = mismatch_robustness(ctx, m * i_p_wcm2, None, dtheta_grid, dgamma_grid)?;
        let ok = surface.min_eta >= target;
        tried.push((m, surface));
        if ok {
            return Ok((Some(m), tried));
        }
    }
    Ok((None, tried))
}

/// `n` evenly spaced points on [−half, half]; `n` = 1 gives the centre.
pub fn symmetric_grid(half: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect(),
    }
}
