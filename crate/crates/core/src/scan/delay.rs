//! Search for the pump–Stokes delay that maximizes the transfer.

use rayon::prelude::*;

use super::{Perturbation, RunOutcome, ScanContext, ScanError};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`. Returns every
/// point evaluated so the caller can keep the best one.
pub fn golden_section_max<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<(f64, f64)>, E> {
    let mut seen = Vec::new();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    seen.push((c, fc));
    seen.push((d, fd));
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            seen.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            seen.push((d, fd));
        }
    }
    Ok(seen)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayOptimum {
    pub delay: f64,
    pub eta: f64,
    /// Best (delay, eta) on the coarse grid.
    pub coarse_best: (f64, f64),
    /// The optimum sits in the outermost coarse cell; widen the window and
    /// retry.
    pub at_window_edge: bool,
    pub outcome: RunOutcome,
    pub evaluations: usize,
}

/// Maximizes eta over Δτ for pump intensity `i_p_wcm2`.
pub fn optimize_delay(ctx: &ScanContext, i_p_wcm2: f64) -> Result<DelayOptimum, ScanError> {
    optimize_delay_perturbed(ctx, i_p_wcm2, &Perturbation::default())
}

pub fn optimize_delay_perturbed(ctx: &ScanContext, i_p_wcm2: f64, pert: &Perturbation) -> Result<DelayOptimum, ScanError> {
    ctx.validate()?;
    let search = ctx.delay_search;
    let half = search.window_widths * ctx.pulse_width();
    let n = search.coarse_points;
    let step = 2.0 * half / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| if i == n - 1 { half } else { -half + i as f64 * step }).collect();

    let coarse: Vec<RunOutcome> = grid
        .par_iter()
        .map(|&delay| ctx.run_perturbed(i_p_wcm2, delay, pert))
        .collect::<Result<_, _>>()?;

    // first index wins ties so the result does not depend on scheduling
    let best_idx = coarse
        .iter()
        .enumerate()
        .fold(0, |best, (i, o)| if o.eta > coarse[best].eta { i } else { best });
    let coarse_best = coarse[best_idx];
    let mut best = coarse_best;
    let mut evaluations = n;

    if coarse_best.eta > 0.0 {
        let lo = grid[best_idx.saturating_sub(1)];
        let hi = grid[(best_idx + 1).min(n - 1)];
        let mut outcomes = Vec::new();
        golden_section_max(
            |delay| {
                let o = ctx.run_perturbed(i_p_wcm2, delay, pert)?;
                outcomes.push(o);
                Ok::<_, ScanError>(o.eta)
            },
            lo,
            hi,
            search.rel_tol * ctx.pulse_width(),
            200,
        )?;
        evaluations += outcomes.len();
        for o in outcomes {
            if o.eta > best.eta {
                best = o;
            }
        }
    }

    let at_window_edge = coarse_best.eta > 0.0 && (best.delay <= grid[1] || best.delay >= grid[n - 2]);
    Ok(DelayOptimum {
        delay: best.delay,
        eta: best.eta,
        coarse_best: (coarse_best.delay, coarse_best.eta),
        at_window_edge,
        outcome: best,
        evaluations,
    })
}
