//! Adaptive Dormand–Prince 5(4) integrator for complex first-order systems.
//!
//! The integrator steps exactly onto each requested sample time, so callers
//! get values at their own grid without interpolation error.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::hilbert::{cr, C64};
use crate::math::{pow, sqrt};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks one from the first derivative.
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, initial_step: None, max_step: f64::INFINITY, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand–Prince tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0`, returning the state at every entry of
/// `sample_times` (which must be non-decreasing and `≥ t0`).
pub fn integrate<F>(
    mut rhs: F,
    y0: &[C64],
    t0: f64,
    sample_times: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<C64>>, OdeStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let dim = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = [
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
        vec![cr(0.0); dim],
    ];
    let mut tmp = vec![cr(0.0); dim];
    let mut y_new = vec![cr(0.0); dim];

    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            let dnorm = rms(&k[0]).max(1e-300);
            let ynorm = rms(&y).max(1e-300);
            (0.01 * ynorm / dnorm).min(opts.max_step).max(1e-12)
        }
    };

    let mut out = Vec::with_capacity(sample_times.len());
    let mut last_sample = t0;
    for &target in sample_times {
        if target < last_sample {
            return Err(Error::InvalidParams(format!("sample times must be non-decreasing ({target} after {last_sample})")));
        }
        last_sample = target;
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::ToleranceNotMet(format!("step budget {} exhausted at t = {t}", opts.max_steps)));
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step <= f64::EPSILON * t.abs().max(1.0) * 4.0 && !clipped {
                return Err(Error::ToleranceNotMet(format!("step size underflow at t = {t}")));
            }

            stage(&y, &[(A21, &k[0])], step, &mut tmp);
            rhs(t + C2 * step, &tmp, &mut k[1]);
            stage(&y, &[(A31, &k[0]), (A32, &k[1])], step, &mut tmp);
            rhs(t + C3 * step, &tmp, &mut k[2]);
            stage(&y, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], step, &mut tmp);
            rhs(t + C4 * step, &tmp, &mut k[3]);
            stage(&y, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])], step, &mut tmp);
            rhs(t + C5 * step, &tmp, &mut k[4]);
            stage(&y, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])], step, &mut tmp);
            rhs(t + step, &tmp, &mut k[5]);
            stage(&y, &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])], step, &mut y_new);
            rhs(t + step, &y_new, &mut k[6]);
            stats.rhs_evals += 6;

            let mut err_acc = 0.0;
            for i in 0..dim {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_acc += e.norm_sqr() / (scale * scale);
            }
            let err = sqrt(err_acc / dim.max(1) as f64);

            if err <= 1.0 {
                t = if clipped { target } else { t + step };
                core::mem::swap(&mut y, &mut y_new);
                // FSAL: last stage is the derivative at the new point
                let (first, rest) = k.split_at_mut(1);
                core::mem::swap(&mut first[0], &mut rest[5]);
                stats.accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
                if !clipped || factor < 1.0 {
                    h = (step * factor).min(opts.max_step);
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * pow(err, -0.2)).clamp(0.1, 1.0);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}

fn stage(y: &[C64], terms: &[(f64, &Vec<C64>)], h: f64, out: &mut [C64]) {
    out.copy_from_slice(y);
    for (coef, k) in terms {
        let s = coef * h;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * s;
        }
    }
}

fn rms(v: &[C64]) -> f64 {
    sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len().max(1) as f64)
}
