//! Closed forms for large ensembles of two-level systems: classical
//! scaling of energy fluctuations, decoherence of a central spin, vacuum
//! amplification of the mode, and the evolution of a cat state.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::hilbert::{c, coherent_amplitudes, cr, fock_tail_mass, required_n_max, sigma_x_eigenstate, FockBasis, StateVector, C64, TAIL_TOLERANCE};
use crate::math::{compensated_sum, cos, exp, ln, sin, sqrt};
use crate::{Error, Result};

const SPEC_NORM_TOL: f64 = 1e-12;

/// Product state `Πᵢ (αᵢ|↓⟩ + βᵢ|↑⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    /// `(αᵢ, βᵢ)`: amplitudes on `|↓⟩` and `|↑⟩` of site `i`.
    coeffs: Vec<(C64, C64)>,
}

impl EnsembleSpec {
    pub fn new(coeffs: Vec<(C64, C64)>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams("ensemble needs at least one site".into()));
        }
        for (i, (a, b)) in coeffs.iter().enumerate() {
            let norm = a.norm_sqr() + b.norm_sqr();
            if (norm - 1.0).abs() > SPEC_NORM_TOL {
                return Err(Error::InvalidParams(format!("site {i}: |alpha|^2 + |beta|^2 = {norm}")));
            }
        }
        Ok(Self { coeffs })
    }

    /// Every site with `|βᵢ|² = beta_sq`, real non-negative amplitudes.
    pub fn uniform(n_atoms: usize, beta_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta_sq) {
            return Err(Error::InvalidParams(format!("beta_sq must lie in [0, 1], got {beta_sq}")));
        }
        let pair = (cr(sqrt(1.0 - beta_sq)), cr(sqrt(beta_sq)));
        Self::new(alloc::vec![pair; n_atoms])
    }

    pub fn n_atoms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[(C64, C64)] {
        &self.coeffs
    }

    /// Site states as `[⟨↑|s⟩, ⟨↓|s⟩]`, the layout used by
    /// [`StateVector::product`].
    pub fn site_states(&self) -> Vec<[C64; 2]> {
        self.coeffs.iter().map(|&(a, b)| [b, a]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEnergy {
    /// `⟨H_c⟩ = (Δ/2) Σ(|βᵢ|² − |αᵢ|²)`.
    pub value: f64,
    /// `k_H = ⟨H_c⟩ / (N Δ/2)`, in `[−1, 1]`.
    pub k_h: f64,
}

/// Mean of `H_c = (Δ/2) Σ σ₃ᵢ` in the product state.
pub fn classical_mean_energy(spec: &EnsembleSpec, delta: f64) -> MeanEnergy {
    let k_sum = compensated_sum(spec.coeffs.iter().map(|(a, b)| b.norm_sqr() - a.norm_sqr()));
    MeanEnergy { value: 0.5 * delta * k_sum, k_h: k_sum / spec.n_atoms() as f64 }
}

/// Variance `Δ² Σ |βᵢ|²(1 − |βᵢ|²)` of `H_c` in the product state.
pub fn energy_fluctuation(spec: &EnsembleSpec, delta: f64) -> f64 {
    delta * delta * compensated_sum(spec.coeffs.iter().map(|(a, b)| b.norm_sqr() * a.norm_sqr()))
}

/// `k′_H = Σ|βᵢ|²(1 − |βᵢ|²) / N`.
pub fn fluctuation_constant(spec: &EnsembleSpec) -> f64 {
    compensated_sum(spec.coeffs.iter().map(|(a, b)| b.norm_sqr() * a.norm_sqr())) / spec.n_atoms() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n_atoms: usize,
    pub mean: f64,
    pub stddev: f64,
    /// `stddev / |mean|`.
    pub ratio: f64,
}

/// Relative energy fluctuation `ΔH_c/|⟨H_c⟩|` for each ensemble size,
/// the family being generated per `N`.
pub fn fluctuation_scaling<F>(family: F, delta: f64, sizes: &[usize]) -> Result<Vec<ScalingRow>>
where
    F: Fn(usize) -> Result<EnsembleSpec>,
{
    sizes
        .iter()
        .map(|&n| {
            let spec = family(n)?;
            let mean = classical_mean_energy(&spec, delta);
            if mean.value == 0.0 {
                return Err(Error::DegenerateFamily { n_atoms: n });
            }
            let stddev = sqrt(energy_fluctuation(&spec, delta));
            Ok(ScalingRow { n_atoms: n, mean: mean.value, stddev, ratio: stddev / mean.value.abs() })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (ln(x), ln(y))).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Collective spin expectations `⟨Σx⟩, ⟨Σy⟩, ⟨Σz⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Free precession under `H_c` of the product state: each site evolves as
/// `αᵢ e^{iΔt/2}|↓⟩ + βᵢ e^{−iΔt/2}|↑⟩`, so `d⟨Σx⟩/dt = −Δ⟨Σy⟩`,
/// `d⟨Σy⟩/dt = Δ⟨Σx⟩` and `⟨Σz⟩` is constant.
pub fn bloch_trajectory(spec: &EnsembleSpec, delta: f64, t: f64) -> BlochVector {
    let rot = C64::from_polar(1.0, delta * t);
    let mut x = Vec::with_capacity(spec.n_atoms());
    let mut y = Vec::with_capacity(spec.n_atoms());
    let mut z = Vec::with_capacity(spec.n_atoms());
    for &(a, b) in &spec.coeffs {
        // ⟨σx⟩ + i⟨σy⟩ = 2 u* d with u = ⟨↑|s⟩, d = ⟨↓|s⟩
        let w = b.conj() * a * rot * 2.0;
        x.push(w.re);
        y.push(w.im);
        z.push(b.norm_sqr() - a.norm_sqr());
    }
    BlochVector { x: compensated_sum(x), y: compensated_sum(y), z: compensated_sum(z) }
}

/// 2×2 density matrix of one spin in the `{|↑⟩, |↓⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity2x2 {
    pub uu: C64,
    pub ud: C64,
    pub du: C64,
    pub dd: C64,
}

impl ReducedDensity2x2 {
    pub fn new(uu: C64, ud: C64, du: C64, dd: C64) -> Self {
        Self { uu, ud, du, dd }
    }

    pub fn trace(&self) -> C64 {
        self.uu + self.dd
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.uu * self.uu + self.ud * self.du + self.du * self.ud + self.dd * self.dd).re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (self.ud - self.du.conj()).norm().max(self.uu.im.abs()).max(self.dd.im.abs())
    }

    /// Eigenvalues (ascending) of the Hermitian part.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.uu.re + self.dd.re);
        let half_diff = 0.5 * (self.uu.re - self.dd.re);
        let off = 0.5 * (self.ud + self.du.conj());
        let r = sqrt(half_diff * half_diff + off.norm_sqr());
        [mean - r, mean + r]
    }

    pub fn off_diagonal_magnitude(&self) -> f64 {
        self.ud.norm()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_distance(&self, other: &Self) -> f64 {
        [(self.uu - other.uu), (self.ud - other.ud), (self.du - other.du), (self.dd - other.dd)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Central-spin state `exp(−iNJtσx)|↓⟩` left by a bath prepared in
/// `Π|−1⟩ᵢ`: `ρ↑↑ = (1 − cos 2NJt)/2`, `ρ↑↓ = −(i/2) sin 2NJt`.
///
/// Always pure. `Ω₀` and the bath splittings are neglected; see
/// [`leading_order_validity`].
pub fn reduced_density_leading(n_atoms: usize, j_coupling: f64, t: f64) -> ReducedDensity2x2 {
    let theta = 2.0 * n_atoms as f64 * j_coupling * t;
    let (s, cth) = (sin(theta), cos(theta));
    ReducedDensity2x2::new(cr(0.5 * (1.0 - cth)), c(0.0, -0.5 * s), c(0.0, 0.5 * s), cr(0.5 * (1.0 + cth)))
}

/// Time average of [`reduced_density_leading`] over `[0, T]`.
///
/// With `θ = 2NJT`: diagonals `1/2 ∓ sin θ/(2θ)` and
/// `ρ↑↓ = −(i/2)(1 − cos θ)/θ`, whose magnitude is at most `1/(2NJT)`.
pub fn time_averaged_density(n_atoms: usize, j_coupling: f64, window: f64) -> Result<ReducedDensity2x2> {
    if !(window > 0.0) {
        return Err(Error::InvalidParams(format!("averaging window must be > 0, got {window}")));
    }
    let theta = 2.0 * n_atoms as f64 * j_coupling * window;
    let (sinc, versinc) = if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, theta * (0.5 - t2 / 24.0 + t2 * t2 / 720.0))
    } else {
        (sin(theta) / theta, (1.0 - cos(theta)) / theta)
    };
    Ok(ReducedDensity2x2::new(
        cr(0.5 - 0.5 * sinc),
        c(0.0, -0.5 * versinc),
        c(0.0, 0.5 * versinc),
        cr(0.5 + 0.5 * sinc),
    ))
}

/// Envelope `1/(2NJT)` bounding the averaged coherence.
pub fn coherence_envelope(n_atoms: usize, j_coupling: f64, window: f64) -> f64 {
    1.0 / (2.0 * n_atoms as f64 * j_coupling * window)
}

/// Threshold on `Ω₀/(NJ)` above which the closed forms are flagged.
pub const OMEGA0_VALIDITY_RATIO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingOrderValidity {
    pub omega0_ratio: f64,
    pub valid: bool,
}

/// Whether `Ω₀` is small enough against `NJ` to drop it.
pub fn leading_order_validity(omega0: f64, n_atoms: usize, j_coupling: f64) -> LeadingOrderValidity {
    let nj = n_atoms as f64 * j_coupling;
    let omega0_ratio = if nj > 0.0 { omega0 / nj } else if omega0 == 0.0 { 0.0 } else { f64::INFINITY };
    LeadingOrderValidity { omega0_ratio, valid: omega0_ratio <= OMEGA0_VALIDITY_RATIO }
}

/// Coherent drive of the mode by `N` atoms in `Π|−1⟩ᵢ` at `Δ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentDriveResult {
    /// `ξ(t) = (N²g²/ω²)(ωt − sin ωt)`.
    pub xi: f64,
    /// `α̂(t) = −(Ng/ω)(e^{−iωt} − 1)`.
    pub alpha_hat: C64,
    pub t: f64,
    pub n_atoms: usize,
}

impl CoherentDriveResult {
    pub fn mean_photons(&self) -> f64 {
        self.alpha_hat.norm_sqr()
    }

    /// Poisson standard deviation `|α̂|`.
    pub fn photon_stddev(&self) -> f64 {
        self.alpha_hat.norm()
    }

    /// `stddev / mean = 1/|α̂|`.
    pub fn relative_fluctuation(&self) -> f64 {
        1.0 / self.alpha_hat.norm()
    }

    /// `e^{iξ}|α̂⟩ ⊗ Π|−1⟩ᵢ` on the Fock ⊗ spin⊗N basis.
    pub fn full_state(&self, fock: FockBasis) -> Result<StateVector> {
        let photon = checked_coherent(self.alpha_hat, fock)? * C64::from_polar(1.0, self.xi);
        let bath = alloc::vec![sigma_x_eigenstate(-1); self.n_atoms];
        StateVector::product(&photon, &bath)
    }
}

/// Leading-order field produced from the vacuum by `N` atoms.
pub fn amplification(n_atoms: usize, g: f64, omega: f64, t: f64) -> CoherentDriveResult {
    let ratio = n_atoms as f64 * g / omega;
    let wt = omega * t;
    CoherentDriveResult {
        xi: ratio * ratio * (wt - sin(wt)),
        alpha_hat: -(C64::from_polar(1.0, -wt) - cr(1.0)) * ratio,
        t,
        n_atoms,
    }
}

/// Mean photon number, its standard deviation and their ratio across `N`.
pub fn amplification_sweep(sizes: &[usize], g: f64, omega: f64, t: f64) -> Vec<ScalingRow> {
    sizes
        .iter()
        .map(|&n| {
            let r = amplification(n, g, omega, t);
            ScalingRow { n_atoms: n, mean: r.mean_photons(), stddev: r.photon_stddev(), ratio: r.relative_fluctuation() }
        })
        .collect()
}

/// Cat state `𝒩(|αe^{iφ}⟩ + |αe^{−iφ}⟩)` evolved with `N` atoms at `Δ = 0`.
///
/// Stored exactly as the closed form reads: `β(t) = (Ng/ω)(1 − e^{iωt})`,
/// `φ₁ = −i(α/2)[βe^{−iφ} − β*e^{iφ}]`, `φ₂` with `φ → −φ`. With these
/// signs the state is the exact evolution for a bath whose collective σ₁ is
/// `+N` (every atom in `|+1⟩`). For the `Π|−1⟩ᵢ` bath evaluate with `−g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatEvolutionResult {
    pub beta_t: C64,
    pub phi1: f64,
    pub phi2: f64,
    pub xi: f64,
    pub alpha: f64,
    pub phi: f64,
    pub omega: f64,
    pub t: f64,
    pub n_atoms: usize,
}

/// `−i(α/2)[β e^{−iφ} − β* e^{iφ}]` before discarding its (zero) imaginary part.
pub fn cat_phase_complex(alpha: f64, phi: f64, beta: C64) -> C64 {
    c(0.0, -0.5 * alpha) * (beta * C64::from_polar(1.0, -phi) - beta.conj() * C64::from_polar(1.0, phi))
}

pub fn cat_evolution(alpha: f64, phi: f64, n_atoms: usize, g: f64, omega: f64, t: f64) -> CatEvolutionResult {
    let ratio = n_atoms as f64 * g / omega;
    let wt = omega * t;
    let beta_t = (cr(1.0) - C64::from_polar(1.0, wt)) * ratio;
    CatEvolutionResult {
        beta_t,
        phi1: cat_phase_complex(alpha, phi, beta_t).re,
        phi2: cat_phase_complex(alpha, -phi, beta_t).re,
        xi: ratio * ratio * (wt - sin(wt)),
        alpha,
        phi,
        omega,
        t,
        n_atoms,
    }
}

impl CatEvolutionResult {
    /// Coherent amplitudes `βe^{−iωt} + αe^{±iφ−iωt}` of the two branches.
    pub fn branch_amplitudes(&self) -> (C64, C64) {
        let rot = C64::from_polar(1.0, -self.omega * self.t);
        let center = self.beta_t * rot;
        (center + C64::from_polar(self.alpha, self.phi) * rot, center + C64::from_polar(self.alpha, -self.phi) * rot)
    }

    /// `𝒩²`, fixed by normalizing the two-branch superposition.
    pub fn normalization_sq(&self) -> f64 {
        let (g1, g2) = self.branch_amplitudes();
        let overlap = exp(-0.5 * g1.norm_sqr() - 0.5 * g2.norm_sqr()) * (g1.conj() * g2).exp();
        let cross = C64::from_polar(1.0, self.phi2 - self.phi1) * overlap;
        1.0 / (2.0 + 2.0 * cross.re)
    }

    /// Photon state `e^{iξ}𝒩(e^{iφ₁}|γ₁⟩ + e^{iφ₂}|γ₂⟩)`.
    pub fn photon_state(&self, fock: FockBasis) -> Result<StateVector> {
        let (g1, g2) = self.branch_amplitudes();
        let v1 = checked_coherent(g1, fock)? * C64::from_polar(1.0, self.phi1);
        let v2 = checked_coherent(g2, fock)? * C64::from_polar(1.0, self.phi2);
        let sum = (v1 + v2) * C64::from_polar(1.0, self.xi);
        StateVector::normalized(fock.basis(), sum)
    }

    /// Photon state ⊗ `Π|+1⟩ᵢ`, the bath for which the stored signs are exact.
    pub fn full_state(&self, fock: FockBasis) -> Result<StateVector> {
        let photon = self.photon_state(fock)?;
        let bath = alloc::vec![sigma_x_eigenstate(1); self.n_atoms];
        StateVector::product(photon.amplitudes(), &bath)
    }
}

/// Cat state at `t = 0`: `𝒩(|αe^{iφ}⟩ + |αe^{−iφ}⟩)`.
pub fn cat_state(alpha: f64, phi: f64, fock: FockBasis) -> Result<StateVector> {
    let v = checked_coherent(C64::from_polar(alpha, phi), fock)? + checked_coherent(C64::from_polar(alpha, -phi), fock)?;
    StateVector::normalized(fock.basis(), v)
}

fn checked_coherent(alpha: C64, fock: FockBasis) -> Result<DVector<C64>> {
    let amps = coherent_amplitudes(alpha, fock.levels());
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0) + fock_tail_mass(&amps, fock.basis());
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation { tail_mass: tail, tolerance: TAIL_TOLERANCE, suggested_n_max: required_n_max(alpha.norm()) });
    }
    Ok(amps)
}
