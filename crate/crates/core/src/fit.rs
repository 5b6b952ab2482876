//! Least-squares sinusoid fits for extracting oscillation frequencies from
//! sampled trajectories.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::math::{cos, sin, sqrt};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// Angular frequency.
    pub frequency: f64,
    pub offset: f64,
    /// Coefficients of `cos(ωt)` and `sin(ωt)`.
    pub cos_coef: f64,
    pub sin_coef: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

impl SinusoidFit {
    pub fn amplitude(&self) -> f64 {
        sqrt(self.cos_coef * self.cos_coef + self.sin_coef * self.sin_coef)
    }

    pub fn period(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.frequency
    }
}

/// Fits `c + a cos(ωt) + b sin(ωt)` with `ω ∈ [w_min, w_max]`.
///
/// A coarse scan over `grid` frequencies picks the basin, which golden-section
/// search then refines; the linear coefficients are solved exactly at each
/// trial frequency.
pub fn fit_sinusoid(ts: &[f64], ys: &[f64], w_min: f64, w_max: f64, grid: usize) -> Result<SinusoidFit> {
    if ts.len() != ys.len() || ts.len() < 4 {
        return Err(Error::InvalidParams("need at least 4 matching samples".into()));
    }
    if !(w_min > 0.0 && w_max > w_min) || grid < 3 {
        return Err(Error::InvalidParams("need 0 < w_min < w_max and grid >= 3".into()));
    }
    let step = (w_max - w_min) / (grid - 1) as f64;
    let scan: Vec<(f64, f64)> = (0..grid)
        .map(|i| {
            let w = w_min + step * i as f64;
            (w, linear_fit(ts, ys, w).map_or(f64::INFINITY, |f| f.rms_residual))
        })
        .collect();
    let best = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut lo = w_min.max(w_min + step * (best as f64 - 1.0));
    let mut hi = w_max.min(w_min + step * (best as f64 + 1.0));
    let inv_phi = 0.5 * (sqrt(5.0) - 1.0);
    let cost = |w: f64| linear_fit(ts, ys, w).map_or(f64::INFINITY, |f| f.rms_residual);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = cost(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = cost(d);
        }
    }
    linear_fit(ts, ys, 0.5 * (lo + hi))
}

/// Linear least squares for `c + a cos(ωt) + b sin(ωt)` at fixed `ω`.
pub fn linear_fit(ts: &[f64], ys: &[f64], w: f64) -> Result<SinusoidFit> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (&t, &y) in ts.iter().zip(ys) {
        let row = Vector3::new(1.0, cos(w * t), sin(w * t));
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| Error::InvalidParams("singular sinusoid design matrix".into()))?;
    let sse: f64 = ts
        .iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let r = y - coef[0] - coef[1] * cos(w * t) - coef[2] * sin(w * t);
            r * r
        })
        .sum();
    Ok(SinusoidFit {
        frequency: w,
        offset: coef[0],
        cos_coef: coef[1],
        sin_coef: coef[2],
        rms_residual: sqrt(sse / ts.len() as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_frequency() {
        let ts: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| 0.3 + 0.7 * libm::cos(1.37 * t + 0.4)).collect();
        let f = fit_sinusoid(&ts, &ys, 0.5, 3.0, 200).unwrap();
        assert!((f.frequency - 1.37).abs() < 1e-8);
        assert!((f.amplitude() - 0.7).abs() < 1e-8);
        assert!((f.offset - 0.3).abs() < 1e-8);
    }
}
