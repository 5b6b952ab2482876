//! Wigner functions on rectangular phase-space grids, fringe extraction and
//! time blurring.
//!
//! `W(x, p) = (1/π) Σ_k (−1)^k |⟨k|D(−z)|ψ⟩|²` with `z = (x + ip)/√2`, so a
//! coherent state `|α₀⟩` peaks at `(√2 Re α₀, √2 Im α₀)` with height `1/π`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::hilbert::{cr, hermitian_deviation, C64};
use crate::math::{ceil, cos, exp, sin, sqrt, PI, SQRT_2};
use crate::specfun::apply_displacement;
use crate::{Error, Result, StateVector};

/// Smallest accepted grid side.
pub const MIN_GRID_POINTS: usize = 16;

/// Margin around the state's centroid that a grid must cover, on top of its
/// spread.
pub const COVERAGE_MARGIN: f64 = 5.0;

/// Fewest samples per fringe period accepted by [`fringe_wavenumber`].
pub const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

/// Rectangular `(x, p)` lattice, endpoints included. `values[(i, j)]` sits
/// at `(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub values: DMatrix<f64>,
}

impl PhaseSpaceGrid {
    pub fn zeros(x_range: (f64, f64), p_range: (f64, f64), nx: usize, np: usize) -> Result<Self> {
        if nx < MIN_GRID_POINTS || np < MIN_GRID_POINTS {
            return Err(Error::GridTooSmall(format!("grid {nx}x{np} below {MIN_GRID_POINTS} points per side")));
        }
        if !(x_range.1 > x_range.0 && p_range.1 > p_range.0) {
            return Err(Error::InvalidParams("grid ranges must be increasing".into()));
        }
        Ok(Self { x_min: x_range.0, x_max: x_range.1, p_min: p_range.0, p_max: p_range.1, values: DMatrix::zeros(nx, np) })
    }

    /// Grid filled by `f(x, p)`.
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(
        x_range: (f64, f64),
        p_range: (f64, f64),
        nx: usize,
        np: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut g = Self::zeros(x_range, p_range, nx, np)?;
        for i in 0..nx {
            let x = g.x(i);
            for j in 0..np {
                g.values[(i, j)] = f(x, g.p(j));
            }
        }
        Ok(g)
    }

    /// Empty grid with the same lattice.
    pub fn like(&self) -> Self {
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            p_min: self.p_min,
            p_max: self.p_max,
            values: DMatrix::zeros(self.nx(), self.np()),
        }
    }

    pub fn nx(&self) -> usize {
        self.values.nrows()
    }

    pub fn np(&self) -> usize {
        self.values.ncols()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx() - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + self.dp() * j as f64
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.p_min == other.p_min
            && self.p_max == other.p_max
            && self.nx() == other.nx()
            && self.np() == other.np()
    }

    /// 2D trapezoid integral.
    pub fn integral(&self) -> f64 {
        let (nx, np) = (self.nx(), self.np());
        let mut acc = 0.0;
        for i in 0..nx {
            let wi = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            for j in 0..np {
                let wj = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                acc += wi * wj * self.values[(i, j)];
            }
        }
        acc * self.dx() * self.dp()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Whether the disc of radius `radius` about `(x0, p0)` lies inside.
    pub fn covers(&self, x0: f64, p0: f64, radius: f64) -> bool {
        x0 - radius >= self.x_min && x0 + radius <= self.x_max && p0 - radius >= self.p_min && p0 + radius <= self.p_max
    }
}

/// Photon state given to [`wigner_from_state`]: a pure vector on a Fock
/// basis with no spins, or a density matrix on Fock levels.
#[derive(Debug, Clone, Copy)]
pub enum PhotonState<'a> {
    Pure(&'a StateVector),
    Density(&'a DMatrix<C64>),
}

/// Pure components `(weight, amplitudes)` of a photon state.
#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    components: Vec<(f64, Vec<C64>)>,
    levels: usize,
    mean_a: C64,
    mean_n: f64,
}

/// Eigenvalues of a density matrix below this are dropped.
const DENSITY_WEIGHT_FLOOR: f64 = 1e-15;

impl WignerEvaluator {
    pub fn new(state: PhotonState<'_>) -> Result<Self> {
        let components: Vec<(f64, Vec<C64>)> = match state {
            PhotonState::Pure(psi) => {
                if psi.basis().spins() != 0 {
                    return Err(Error::BasisMismatch("trace out spins before computing a Wigner function"));
                }
                alloc::vec![(1.0, psi.amplitudes().iter().copied().collect())]
            }
            PhotonState::Density(rho) => {
                if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
                    return Err(Error::BasisMismatch("density matrix must be square"));
                }
                let dev = hermitian_deviation(rho);
                if dev > 1e-10 {
                    return Err(Error::NotHermitian { deviation: dev });
                }
                let eig = rho.clone().symmetric_eigen();
                let mut comps = Vec::new();
                for (k, &w) in eig.eigenvalues.iter().enumerate() {
                    if w > DENSITY_WEIGHT_FLOOR {
                        comps.push((w, eig.eigenvectors.column(k).iter().copied().collect()));
                    }
                }
                comps
            }
        };
        let levels = components.first().map_or(1, |c| c.1.len());
        let mut mean_a = cr(0.0);
        let mut mean_n = 0.0;
        for (w, v) in &components {
            for k in 1..levels {
                mean_a += v[k - 1].conj() * v[k] * sqrt(k as f64) * *w;
                mean_n += v[k].norm_sqr() * k as f64 * w;
            }
        }
        Ok(Self { components, levels, mean_a, mean_n })
    }

    /// Phase-space centroid `(√2 Re⟨a⟩, √2 Im⟨a⟩)`.
    pub fn centroid(&self) -> (f64, f64) {
        (SQRT_2 * self.mean_a.re, SQRT_2 * self.mean_a.im)
    }

    /// Radius a grid must cover about the centroid.
    pub fn coverage_radius(&self) -> f64 {
        let spread = (self.mean_n - self.mean_a.norm_sqr()).max(0.0);
        COVERAGE_MARGIN + sqrt(2.0 * spread)
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let z = C64::new(x, p) / cr(SQRT_2);
        let out_levels = displaced_levels(self.levels, z.norm());
        let mut acc = 0.0;
        for (w, v) in &self.components {
            let shifted = apply_displacement(-z, v, out_levels);
            let parity: f64 = shifted
                .iter()
                .enumerate()
                .map(|(k, a)| if k % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum();
            acc += w * parity;
        }
        acc / PI
    }

    /// Checks that `grid` covers the state.
    pub fn validate_grid(&self, grid: &PhaseSpaceGrid) -> Result<()> {
        let (x0, p0) = self.centroid();
        let r = self.coverage_radius();
        if !grid.covers(x0, p0, r) {
            return Err(Error::GridTooSmall(format!(
                "grid [{}, {}]x[{}, {}] does not cover ({x0:.3}, {p0:.3}) +/- {r:.3}",
                grid.x_min, grid.x_max, grid.p_min, grid.p_max
            )));
        }
        Ok(())
    }
}

/// Wigner function of `state` on the lattice of `grid`.
pub fn wigner_from_state(state: PhotonState<'_>, grid: &PhaseSpaceGrid) -> Result<PhaseSpaceGrid> {
    let ev = WignerEvaluator::new(state)?;
    ev.validate_grid(grid)?;
    let mut out = grid.like();
    for i in 0..grid.nx() {
        let x = grid.x(i);
        for j in 0..grid.np() {
            out.values[(i, j)] = ev.eval(x, grid.p(j));
        }
    }
    Ok(out)
}

/// Wigner function of a pure photon state at one point.
pub fn wigner_point(psi: &[C64], x: f64, p: f64) -> f64 {
    let levels = psi.len();
    let z = C64::new(x, p) / cr(SQRT_2);
    let out_levels = displaced_levels(levels, z.norm());
    let shifted = apply_displacement(-z, psi, out_levels);
    shifted.iter().enumerate().map(|(k, a)| if k % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum::<f64>() / PI
}

/// Levels kept after displacing by `|z|`, so that the displaced tail is
/// captured.
fn displaced_levels(levels: usize, r: f64) -> usize {
    levels + ceil(r * r + 10.0 * r + 10.0) as usize
}

/// Wigner function of the coherent state `|γ⟩`.
pub fn coherent_blob(gamma: C64, x: f64, p: f64) -> f64 {
    let dx = x - SQRT_2 * gamma.re;
    let dp = p - SQRT_2 * gamma.im;
    exp(-dx * dx - dp * dp) / PI
}

/// Interference term of the evolved cat state `|αe^{iφ}⟩ + |αe^{−iφ}⟩`
/// driven by `N` atoms, without the normalization `𝒩²`:
///
/// `(2/π) exp[−(x + √2c(1−cos ωt) − √2α cos φ cos ωt)²]
///        exp[−(p + √2c sin ωt + √2α cos φ sin ωt)²]
///        cos[2√2α sin φ (p sin ωt − x cos ωt) + α² sin 2φ + 4αc sin φ (1−cos ωt)]`
///
/// with `c = Ng/ω`.
#[allow(clippy::too_many_arguments)]
pub fn wigner_interference_analytic(x: f64, p: f64, alpha: f64, phi: f64, n_atoms: usize, g: f64, omega: f64, t: f64) -> f64 {
    wigner_interference_with_offset(x, p, alpha, phi, n_atoms, g, omega, t, 4.0)
}

/// As [`wigner_interference_analytic`] with the constant phase
/// `k α c sin φ (1 − cos ωt)` for a caller-chosen `k`.
#[allow(clippy::too_many_arguments)]
pub fn wigner_interference_with_offset(
    x: f64,
    p: f64,
    alpha: f64,
    phi: f64,
    n_atoms: usize,
    g: f64,
    omega: f64,
    t: f64,
    k: f64,
) -> f64 {
    let c = n_atoms as f64 * g / omega;
    let (s, co) = (sin(omega * t), cos(omega * t));
    let gx = x + SQRT_2 * c * (1.0 - co) - SQRT_2 * alpha * cos(phi) * co;
    let gp = p + SQRT_2 * c * s + SQRT_2 * alpha * cos(phi) * s;
    let arg = 2.0 * SQRT_2 * alpha * sin(phi) * (p * s - x * co)
        + alpha * alpha * sin(2.0 * phi)
        + k * alpha * c * sin(phi) * (1.0 - co);
    2.0 / PI * exp(-gx * gx) * exp(-gp * gp) * cos(arg)
}

/// Phase-space axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeEstimate {
    /// Dominant angular wavenumber along the axis.
    pub wavenumber: f64,
    /// Spacing of the zero-padded spectrum.
    pub bin_width: f64,
}

/// Zero-padding factor for the fringe spectrum.
const FRINGE_PADDING: usize = 8;

/// Dominant spatial wavenumber along `axis`, from the Hann-windowed,
/// zero-padded spectrum of every grid line, powers summed across lines.
///
/// Pass an interference-only grid: smooth blobs put their power at zero
/// wavenumber, and a peak there is reported as [`Error::NoFringe`].
pub fn fringe_wavenumber(w: &PhaseSpaceGrid, axis: Axis) -> Result<FringeEstimate> {
    let (len, lines, step) = match axis {
        Axis::X => (w.nx(), w.np(), w.dx()),
        Axis::P => (w.np(), w.nx(), w.dp()),
    };
    let padded = FRINGE_PADDING * len;
    let bins = padded / 2 + 1;
    let bin_width = 2.0 * PI / (padded as f64 * step);
    let hann: Vec<f64> = (0..len).map(|i| 0.5 - 0.5 * cos(2.0 * PI * i as f64 / (len - 1) as f64)).collect();
    // twiddles e^{−2πi jk/padded}
    let twiddle: Vec<C64> = (0..padded).map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / padded as f64)).collect();
    let mut power = alloc::vec![0.0; bins];
    let mut line = alloc::vec![0.0; len];
    for l in 0..lines {
        for (i, v) in line.iter_mut().enumerate() {
            let raw = match axis {
                Axis::X => w.values[(i, l)],
                Axis::P => w.values[(l, i)],
            };
            *v = raw * hann[i];
        }
        for (j, pw) in power.iter_mut().enumerate() {
            let mut acc = cr(0.0);
            for (i, v) in line.iter().enumerate() {
                acc += twiddle[(i * j) % padded] * *v;
            }
            *pw += acc.norm_sqr();
        }
    }
    let (peak, peak_power) = power.iter().enumerate().fold((0, 0.0), |b, (j, &p)| if p > b.1 { (j, p) } else { b });
    if peak == 0 || peak_power == 0.0 {
        return Err(Error::NoFringe);
    }
    let wavenumber = peak as f64 * bin_width;
    let samples_per_period = 2.0 * PI / (wavenumber * step);
    if samples_per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Underresolved(format!(
            "{samples_per_period:.2} samples per fringe period, need {MIN_SAMPLES_PER_PERIOD}"
        )));
    }
    Ok(FringeEstimate { wavenumber, bin_width })
}

/// Time average of `family(t)` over `[t0, t0 + window]` by the trapezoid
/// rule on `samples` equally spaced times.
///
/// `max_rate` bounds the angular rate at which any grid value oscillates;
/// fewer than `⌈2·max_rate·window/π⌉ + 1` samples (two per period) is
/// rejected as undersampled.
pub fn time_blur<F>(family: F, t0: f64, window: f64, samples: usize, max_rate: f64) -> Result<PhaseSpaceGrid>
where
    F: Fn(f64) -> Result<PhaseSpaceGrid>,
{
    if window < 0.0 {
        return Err(Error::InvalidParams(format!("window must be >= 0, got {window}")));
    }
    if window == 0.0 {
        return family(t0);
    }
    let required = required_blur_samples(window, max_rate);
    if samples < required {
        return Err(Error::Undersampled { samples, required });
    }
    let h = window / (samples - 1) as f64;
    let mut acc: Option<PhaseSpaceGrid> = None;
    for s in 0..samples {
        let g = family(t0 + h * s as f64)?;
        let weight = if s == 0 || s == samples - 1 { 0.5 } else { 1.0 } / (samples - 1) as f64;
        match acc.as_mut() {
            None => {
                let mut first = g;
                first.values *= weight;
                acc = Some(first);
            }
            Some(a) => {
                if !a.same_lattice(&g) {
                    return Err(Error::BasisMismatch("family changed its grid lattice"));
                }
                a.values += g.values * weight;
            }
        }
    }
    acc.ok_or(Error::Undersampled { samples, required })
}

/// Minimum sample count for [`time_blur`].
pub fn required_blur_samples(window: f64, max_rate: f64) -> usize {
    (ceil(2.0 * max_rate.abs() * window / PI) as usize + 1).max(2)
}

/// Largest `|∂/∂t|` of the interference phase over `|x|, |p| ≤ extent`.
pub fn cat_fringe_rate(alpha: f64, phi: f64, n_atoms: usize, g: f64, omega: f64, extent: f64) -> f64 {
    let c = n_atoms as f64 * g / omega;
    omega * alpha.abs() * sin(phi).abs() * (2.0 * SQRT_2 * 2.0 * extent + 4.0 * c)
}

/// Analytic Wigner function of the two coherent branches, each weighted by
/// `weight`.
pub fn two_blobs(g1: C64, g2: C64, weight: f64, x: f64, p: f64) -> f64 {
    weight * (coherent_blob(g1, x, p) + coherent_blob(g2, x, p))
}

/// Mean photon number of a pure photon vector.
pub fn mean_photons(psi: &DVector<C64>) -> f64 {
    psi.iter().enumerate().map(|(k, a)| k as f64 * a.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::FockBasis;

    #[test]
    fn vacuum_origin() {
        let v = [cr(1.0), cr(0.0), cr(0.0)];
        assert!((wigner_point(&v, 0.0, 0.0) - 1.0 / PI).abs() < 1e-14);
        let one = [cr(0.0), cr(1.0), cr(0.0)];
        assert!((wigner_point(&one, 0.0, 0.0) + 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn coherent_matches_blob() {
        let fock = FockBasis::new(40).unwrap();
        let gamma = C64::new(0.8, -0.5);
        let psi = StateVector::coherent(gamma, fock).unwrap();
        let amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        for (x, p) in [(0.0, 0.0), (1.1, -0.7), (-1.0, 2.0)] {
            assert!((wigner_point(&amps, x, p) - coherent_blob(gamma, x, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_guards() {
        assert!(matches!(PhaseSpaceGrid::zeros((-1.0, 1.0), (-1.0, 1.0), 8, 32), Err(Error::GridTooSmall(_))));
        let fock = FockBasis::new(30).unwrap();
        let psi = StateVector::coherent(C64::new(2.0, 0.0), fock).unwrap();
        let small = PhaseSpaceGrid::zeros((-2.0, 2.0), (-2.0, 2.0), 16, 16).unwrap();
        assert!(matches!(wigner_from_state(PhotonState::Pure(&psi), &small), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn blur_guards() {
        let fam = |_t: f64| PhaseSpaceGrid::from_fn((-1.0, 1.0), (-1.0, 1.0), 16, 16, |x, p| x * p);
        let g = time_blur(fam, 0.0, 1.0, 5, 1.0).unwrap();
        let g0 = fam(0.0).unwrap();
        assert!((g.values - g0.values).abs().max() < 1e-15);
        assert!(matches!(time_blur(fam, 0.0, 10.0, 3, 5.0), Err(Error::Undersampled { .. })));
    }

    #[test]
    fn interference_special_points() {
        let (alpha, phi) = (1.3, 0.6);
        let v = wigner_interference_analytic(SQRT_2 * alpha * cos(phi), 0.0, alpha, phi, 7, 0.3, 1.0, 0.0);
        assert!((v - 2.0 / PI * cos(alpha * alpha * sin(2.0 * phi))).abs() < 1e-14);
    }
}
