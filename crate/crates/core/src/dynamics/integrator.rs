//! Dormand–Prince 5(4) integrator with embedded error control.
//!
//! Works on fixed-size real state vectors. The error norm is the max-norm of
//! the scaled local error `err_i / (atol + rtol·max(|y_i|, |y_new_i|))`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t:e} s (h = {h:e} s); problem may be stiff")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {steps} exhausted at t = {t:e} s")]
    TooManySteps { t: f64, steps: usize },
    #[error("invalid time span [{t0:e}, {t1:e}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("invalid step control: {0}")]
    InvalidControl(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; defaults to a tenth of the maximum step.
    pub h_init: Option<f64>,
    /// Upper bound on the step; defaults to a problem-supplied hint.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Disables error control and steps with this size.
    pub fixed_step: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 2_000_000,
            fixed_step: None,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn fixed(h: f64) -> Self {
        Self { fixed_step: Some(h), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |m: String| Err(IntegrationError::InvalidControl(m));
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return bad(format!("rtol = {}, atol = {}", self.rtol, self.atol));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) {
                return bad(format!("fixed step {h}"));
            }
        }
        if let Some(h) = self.h_max {
            if !(h > 0.0) {
                return bad(format!("h_max {h}"));
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps = 0".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Sum of the unscaled max-norm local error over accepted steps.
    pub error_sum: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let c = h * coef;
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t_end`.
///
/// Every time in `checkpoints` (sorted, inside `(t0, t_end]`) is hit exactly.
/// `observer` sees every accepted step; its flag is true on checkpoints.
/// `h_hint` bounds the step when `control.h_max` is unset.
#[allow(clippy::too_many_arguments)]
pub fn integrate<const N: usize, E: From<IntegrationError>>(
    mut rhs: impl FnMut(f64, &[f64; N], &mut [f64; N]),
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    control: &StepControl,
    h_hint: f64,
    checkpoints: &[f64],
    mut observer: impl FnMut(f64, &[f64; N], bool) -> Result<(), E>,
) -> Result<([f64; N], IntegrationStats), E> {
    control.validate()?;
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(IntegrationError::InvalidSpan { t0, t1: t_end }.into());
    }
    let span = t_end - t0;
    let h_max = control.h_max.unwrap_or(h_hint).min(span);
    let h_min = span * 1e-13;
    let mut h = control
        .fixed_step
        .unwrap_or_else(|| control.h_init.unwrap_or(0.1 * h_max))
        .min(h_max);

    let mut stats = IntegrationStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = [0.0; N];
    rhs(t, &y, &mut k1);
    stats.evaluations += 1;

    let mut next_cp = checkpoints.iter().copied().filter(|&c| c > t0 && c <= t_end).peekable();
    let mut rejected_last = false;

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);

    while t < t_end {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(IntegrationError::TooManySteps { t, steps: control.max_steps }.into());
        }
        // Land exactly on the next checkpoint or the end of the span.
        let target = next_cp.peek().copied().unwrap_or(t_end);
        let mut step = h;
        let mut hits_target = false;
        if t + step >= target || (target - t - step) < 1e-9 * step {
            step = target - t;
            hits_target = true;
        }

        let y2 = combine(&y, step, &[(A21, &k1)]);
        rhs(t + C2 * step, &y2, &mut k2);
        let y3 = combine(&y, step, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * step, &y3, &mut k3);
        let y4 = combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * step, &y4, &mut k4);
        let y5 = combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * step, &y5, &mut k5);
        let y6 = combine(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(t + step, &y6, &mut k6);
        let y_new = combine(&y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        rhs(t + step, &y_new, &mut k7);
        stats.evaluations += 6;

        let mut err_scaled = 0.0f64;
        let mut err_abs = 0.0f64;
        for i in 0..N {
            let e = step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
            let ratio = e.abs() / scale;
            // NaN compares false; treat it as a failed step.
            if !(ratio <= err_scaled) {
                err_scaled = if ratio.is_nan() { f64::INFINITY } else { ratio };
            }
            err_abs = err_abs.max(e.abs());
        }
        let finite = y_new.iter().all(|v| v.is_finite());

        if control.fixed_step.is_some() {
            if !finite {
                return Err(IntegrationError::StepUnderflow { t, h: step }.into());
            }
            accept(&mut t, &mut y, &mut k1, step, y_new, k7, hits_target, target, &mut stats, err_abs);
            let is_cp = hits_target && next_cp.peek().is_some_and(|&c| c == target);
            if is_cp {
                next_cp.next();
            }
            observer(t, &y, is_cp)?;
            continue;
        }

        if err_scaled <= 1.0 && finite {
            accept(&mut t, &mut y, &mut k1, step, y_new, k7, hits_target, target, &mut stats, err_abs);
            let is_cp = hits_target && next_cp.peek().is_some_and(|&c| c == target);
            if is_cp {
                next_cp.next();
            }
            observer(t, &y, is_cp)?;
            let mut fac = if err_scaled == 0.0 { FAC_MAX } else { SAFETY * err_scaled.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            let proposed = (step * fac).min(h_max);
            // A truncated landing step should not shrink the step sequence.
            h = if hits_target && fac >= 1.0 { proposed.max(h) } else { proposed };
            rejected_last = false;
        } else {
            stats.rejected += 1;
            let fac = if err_scaled.is_finite() {
                (SAFETY * err_scaled.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h = step * fac;
            rejected_last = true;
            if h < h_min {
                return Err(IntegrationError::StepUnderflow { t, h }.into());
            }
        }
    }
    Ok((y, stats))
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn accept<const N: usize>(
    t: &mut f64,
    y: &mut [f64; N],
    k1: &mut [f64; N],
    step: f64,
    y_new: [f64; N],
    k7: [f64; N],
    hits_target: bool,
    target: f64,
    stats: &mut IntegrationStats,
    err_abs: f64,
) {
    *t = if hits_target { target } else { *t + step };
    *y = y_new;
    *k1 = k7;
    stats.accepted += 1;
    stats.error_sum += err_abs;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<const N: usize>(
        rhs: impl FnMut(f64, &[f64; N], &mut [f64; N]),
        y0: [f64; N],
        t1: f64,
        control: &StepControl,
    ) -> ([f64; N], IntegrationStats) {
        integrate::<N, IntegrationError>(rhs, 0.0, y0, t1, control, t1, &[], |_, _, _| Ok(())).unwrap()
    }

    #[test]
    fn exponential_decay() {
        let (y, _) = run(|_, y: &[f64; 1], d: &mut [f64; 1]| d[0] = -y[0], [1.0], 5.0, &StepControl::default());
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_over_many_periods() {
        let control = StepControl::with_tolerance(1e-11, 1e-13);
        let t1 = 20.0 * std::f64::consts::TAU;
        let (y, stats) = run(
            |_, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            [1.0, 0.0],
            t1,
            &control,
        );
        assert!((y[0] - 1.0).abs() < 1e-8, "{y:?}");
        assert!(y[1].abs() < 1e-8);
        assert!(stats.rejected < stats.accepted);
    }

    #[test]
    fn fixed_step_converges_at_fifth_order() {
        let f = |t: f64, y: &[f64; 1], d: &mut [f64; 1]| d[0] = -2.0 * t * y[0];
        let exact = (-4.0f64).exp();
        let err = |h: f64| (run(f, [1.0], 2.0, &StepControl::fixed(h)).0[0] - exact).abs();
        let (e1, e2) = (err(0.1), err(0.05));
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 6.5, "observed order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn checkpoints_are_hit_exactly() {
        let cps = [0.25, 0.5, 0.75, 1.0];
        let mut seen = Vec::new();
        integrate::<1, IntegrationError>(
            |_, _, d| d[0] = 1.0,
            0.0,
            [0.0],
            1.0,
            &StepControl::default(),
            0.3,
            &cps,
            |t, y, cp| {
                if cp {
                    seen.push((t, y[0]));
                }
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 4);
        for ((t, y), c) in seen.iter().zip(cps) {
            assert_eq!(*t, c);
            assert!((y - c).abs() < 1e-14);
        }
    }

    #[test]
    fn blow_up_reports_underflow() {
        let r = integrate::<1, IntegrationError>(
            |_, y, d| d[0] = y[0] * y[0],
            0.0,
            [1.0],
            2.0,
            &StepControl::default(),
            0.1,
            &[],
            |_, _, _| Ok(()),
        );
        assert!(matches!(
            r,
            Err(IntegrationError::StepUnderflow { .. }) | Err(IntegrationError::TooManySteps { .. })
        ));
    }

    #[test]
    fn bad_span_and_control_rejected() {
        let r = integrate::<1, IntegrationError>(
            |_, _, d| d[0] = 0.0,
            1.0,
            [0.0],
            1.0,
            &StepControl::default(),
            0.1,
            &[],
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(IntegrationError::InvalidSpan { .. })));
        assert!(StepControl::with_tolerance(0.0, 1e-12).validate().is_err());
        assert!(StepControl::fixed(-1.0).validate().is_err());
    }
}
