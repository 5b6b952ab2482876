//! Dressed states of the interaction `g σ₁(a + a†)`, the two bands that the
//! splitting `Δ` opens at first order, and the full amplitude equations in
//! the frame that removes the interaction.
//!
//! Band states are indexed `2n` for `σ = +1` and `2n + 1` for `σ = −1`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::hilbert::{cr, sigma_x_eigenstate, Basis, FockBasis, ModelParams, StateVector, C64};
use crate::math::{exp, sqrt};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::specfun::{displacement_table, laguerre_sequence};
use crate::{Error, Result};

/// Relative half-width of the resonance window used by [`rabi_frequency`].
pub const RESONANCE_WINDOW: f64 = 0.05;

/// Population a band state may leave outside the lab basis.
const DRESSED_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandIndex {
    pub n: usize,
    /// ±1.
    pub sigma: i8,
}

impl BandIndex {
    pub fn new(n: usize, sigma: i8) -> Self {
        debug_assert!(sigma == 1 || sigma == -1);
        Self { n, sigma }
    }

    pub fn flat(&self) -> usize {
        2 * self.n + usize::from(self.sigma < 0)
    }

    pub fn from_flat(k: usize) -> Self {
        Self { n: k / 2, sigma: if k.is_multiple_of(2) { 1 } else { -1 } }
    }
}

/// Amplitudes `a_{n,σ}(t)` for `n ≤ n_max` in the flat ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct BandAmplitudes {
    pub t: f64,
    pub a: Vec<C64>,
    pub params: ModelParams,
}

impl BandAmplitudes {
    pub fn n_max(&self) -> usize {
        self.a.len() / 2 - 1
    }

    pub fn get(&self, idx: BandIndex) -> C64 {
        self.a[idx.flat()]
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.a.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }
}

/// `|v_{n,λ}⟩ = |λ⟩ e^{(g/ω)λ(a − a†)}|n⟩`, eigenstate of `ω a†a + gσ₁(a + a†)`
/// with energy `nω − g²/ω`.
pub fn dressed_state(n: usize, lambda: i8, params: &ModelParams, basis: FockBasis) -> Result<StateVector> {
    params.validate()?;
    let table = displacement_table(f64::from(lambda) * params.g_over_omega(), basis.levels().max(n + 1));
    let photon = checked_column(&table, n, basis.levels())?;
    StateVector::product(&photon, &[sigma_x_eigenstate(lambda)])
}

/// `E_n = nω − g²/ω`.
pub fn dressed_energy(n: usize, params: &ModelParams) -> f64 {
    n as f64 * params.omega - params.g * params.g / params.omega
}

/// `e^{−2g²/ω²} L_n(4g²/ω²)`.
pub fn band_factor(n: usize, g_over_omega: f64) -> f64 {
    let x = g_over_omega * g_over_omega;
    exp(-2.0 * x) * laguerre_sequence(n, 0.0, 4.0 * x)[n]
}

/// `E_{n,σ} = σ(Δ/2) e^{−2g²/ω²} L_n(4g²/ω²)`.
pub fn band_energy(idx: BandIndex, params: &ModelParams) -> f64 {
    f64::from(idx.sigma) * 0.5 * params.delta * band_factor(idx.n, params.g_over_omega())
}

/// `|ψ_{n;σ}⟩ = (σ|v_{n,+1}⟩ + |v_{n,−1}⟩)/√2`.
pub fn band_eigenstate(idx: BandIndex, params: &ModelParams, basis: FockBasis) -> Result<StateVector> {
    let plus = dressed_state(idx.n, 1, params, basis)?;
    let minus = dressed_state(idx.n, -1, params, basis)?;
    let v = plus.amplitudes() * cr(f64::from(idx.sigma)) + minus.amplitudes();
    StateVector::normalized(plus.basis(), v)
}

/// Precomputed couplings of the amplitude equations for fixed parameters
/// and band cutoff.
///
/// The equations read
/// `i ȧ_{m,σ′} = Σ_{n≠m,σ} C_{mσ′,nσ} e^{−i(E_{n,σ}−E_{m,σ′})t} e^{i(m−n)ωt} a_{n,σ}`
/// with `C_{mσ′,nσ} = (Δ/2)[⟨m|e^{−(2g/ω)(a−a†)}|n⟩σ′/2 + ⟨m|e^{(2g/ω)(a−a†)}|n⟩σ/2]`.
/// `C` is real symmetric and its `n = m` blocks vanish; intraband motion is
/// carried by the band energies in the phases.
#[derive(Debug, Clone)]
pub struct BandModel {
    params: ModelParams,
    n_max: usize,
    coupling: DMatrix<f64>,
    /// `E_{k,σ} + kω`, the rate of each frame phase.
    rates: Vec<f64>,
}

impl BandModel {
    pub fn new(params: &ModelParams, n_max: usize) -> Result<Self> {
        params.validate()?;
        let levels = n_max + 1;
        let x2 = 2.0 * params.g_over_omega();
        let d_minus = displacement_table(-x2, levels);
        let d_plus = displacement_table(x2, levels);
        let dim = 2 * levels;
        let mut coupling = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mi = BandIndex::from_flat(i);
            for j in 0..dim {
                let nj = BandIndex::from_flat(j);
                if mi.n == nj.n {
                    continue;
                }
                let (m, n) = (mi.n, nj.n);
                coupling[(i, j)] = 0.5
                    * params.delta
                    * (0.5 * d_minus[(m, n)] * f64::from(mi.sigma) + 0.5 * d_plus[(m, n)] * f64::from(nj.sigma));
            }
        }
        let rates = (0..dim)
            .map(|k| {
                let idx = BandIndex::from_flat(k);
                band_energy(idx, params) + idx.n as f64 * params.omega
            })
            .collect();
        Ok(Self { params: params.clone(), n_max, coupling, rates })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `C_{mσ′,nσ}` in the flat ordering.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// Writes `ȧ` into `out`.
    pub fn rhs_into(&self, t: f64, a: &[C64], out: &mut [C64]) {
        // phases factor as e^{iθ_m} e^{−iθ_n}, θ_k = (E_{k,σ} + kω) t
        let rotated: Vec<C64> = a.iter().zip(&self.rates).map(|(ak, r)| ak * C64::from_polar(1.0, -r * t)).collect();
        for (i, slot) in out.iter_mut().enumerate().take(self.dim()) {
            let mut acc = cr(0.0);
            for (j, rj) in rotated.iter().enumerate() {
                let cij = self.coupling[(i, j)];
                if cij != 0.0 {
                    acc += rj * cij;
                }
            }
            *slot = C64::new(0.0, -1.0) * C64::from_polar(1.0, self.rates[i] * t) * acc;
        }
    }
}

/// Right-hand side of the amplitude equations at time `t`.
pub fn amplitude_rhs(t: f64, amps: &BandAmplitudes, params: &ModelParams, n_max: usize) -> Result<Vec<C64>> {
    let model = BandModel::new(params, n_max)?;
    if amps.a.len() != model.dim() {
        return Err(Error::BasisMismatch("amplitude vector length differs from 2(n_max + 1)"));
    }
    let mut out = alloc::vec![cr(0.0); model.dim()];
    model.rhs_into(t, &amps.a, &mut out);
    Ok(out)
}

/// Band states `|ψ_{n;σ}⟩`, `n ≤ n_max`, as columns on `fock ⊗ spin`.
///
/// Built from the analytic displaced number states; columns for large `n`
/// may be cut by the lab basis, which only matters if the dynamics reaches
/// them.
pub fn band_vectors(params: &ModelParams, n_max: usize, fock: FockBasis) -> DMatrix<C64> {
    let levels = fock.levels();
    let size = levels.max(n_max + 1);
    let x = params.g_over_omega();
    let plus = displacement_table(x, size);
    let minus = displacement_table(-x, size);
    let basis = Basis::with_spins(fock, 1);
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut out = DMatrix::zeros(basis.dim(), 2 * (n_max + 1));
    for k in 0..2 * (n_max + 1) {
        let idx = BandIndex::from_flat(k);
        let sig = f64::from(idx.sigma);
        for l in 0..levels {
            // |±1⟩ = (|↑⟩ ± |↓⟩)/√2
            let p = plus[(l, idx.n)] * s;
            let m = minus[(l, idx.n)] * s;
            out[(basis.index(l, 0), k)] = cr(s * (sig * p + m));
            out[(basis.index(l, 1), k)] = cr(s * (sig * p - m));
        }
    }
    out
}

/// Band-basis components `⟨ψ_{n;σ}|ψ⟩` of a single-atom state.
pub fn project(psi: &StateVector, params: &ModelParams, n_max: usize) -> Result<Vec<C64>> {
    let basis = psi.basis();
    if basis.spins() != 1 {
        return Err(Error::BasisMismatch("band projection needs exactly one spin"));
    }
    let fock = FockBasis::new(basis.fock_levels() - 1)?;
    let vecs = band_vectors(params, n_max, fock);
    Ok((vecs.adjoint() * psi.amplitudes()).iter().copied().collect())
}

/// Integrates the amplitude equations from `initial` and samples at
/// `sample_times` (non-decreasing, `≥ 0`).
///
/// Fails with a truncation error if the projection of `initial` onto the
/// bands below `n_max` misses more than `tol` of its norm, and with
/// `ToleranceNotMet` if the norm drifts by more than `10·tol`.
pub fn evolve_amplitudes(
    initial: &StateVector,
    sample_times: &[f64],
    params: &ModelParams,
    n_max: usize,
    tol: f64,
) -> Result<Vec<BandAmplitudes>> {
    evolve_amplitudes_with_stats(initial, sample_times, params, n_max, tol).map(|(v, _)| v)
}

pub fn evolve_amplitudes_with_stats(
    initial: &StateVector,
    sample_times: &[f64],
    params: &ModelParams,
    n_max: usize,
    tol: f64,
) -> Result<(Vec<BandAmplitudes>, OdeStats)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be > 0, got {tol}")));
    }
    let model = BandModel::new(params, n_max)?;
    let a0 = project(initial, params, n_max)?;
    let kept: f64 = a0.iter().map(|z| z.norm_sqr()).sum();
    let missing = (1.0 - kept).abs();
    if missing > tol {
        return Err(Error::Truncation { tail_mass: missing, tolerance: tol, suggested_n_max: 2 * n_max });
    }
    let opts = OdeOptions { rtol: 0.01 * tol, atol: 1e-3 * tol, ..OdeOptions::default() };
    let (ys, stats) = integrate(|t, y, dy| model.rhs_into(t, y, dy), &a0, 0.0, sample_times, &opts)?;
    let norm0 = sqrt(kept);
    let mut out = Vec::with_capacity(ys.len());
    for (t, y) in sample_times.iter().zip(ys) {
        let norm = sqrt(y.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if (norm - norm0).abs() > 10.0 * tol {
            return Err(Error::ToleranceNotMet(format!("norm drift {} at t = {t}", norm - norm0)));
        }
        out.push(BandAmplitudes { t: *t, a: y, params: params.clone() });
    }
    Ok((out, stats))
}

/// Lab-frame state `Σ e^{−i(E_n + E_{n,σ})t} a_{n,σ}(t) |ψ_{n;σ}⟩`, normalized.
pub fn lab_frame_state(amps: &BandAmplitudes, fock: FockBasis) -> Result<StateVector> {
    let n_max = amps.n_max();
    let vecs = band_vectors(&amps.params, n_max, fock);
    let coeffs = DVector::from_iterator(
        amps.a.len(),
        amps.a.iter().enumerate().map(|(k, ak)| {
            let idx = BandIndex::from_flat(k);
            let e = dressed_energy(idx.n, &amps.params) + band_energy(idx, &amps.params);
            ak * C64::from_polar(1.0, -e * amps.t)
        }),
    );
    StateVector::normalized(Basis::with_spins(fock, 1), vecs * coeffs)
}

/// Rabi frequency of the two-state reduction for the pair `(m, σ′)`,
/// `(n, σ)`.
///
/// For `m ≠ n` this is `Δ|⟨m|e^{−(2g/ω)(a−a†)}|n⟩σ′/2 + ⟨m|e^{(2g/ω)(a−a†)}|n⟩σ/2|`
/// and the pair must satisfy `|E_{n,σ} − E_{m,σ′} + (n − m)ω| ≤ 0.05 Ω_R`.
/// For `m = n`, `σ′ = −σ` the two band states are stationary and the
/// oscillation between `|v_{n,+1}⟩` and `|v_{n,−1}⟩` beats at their splitting
/// `Δ e^{−2g²/ω²}|L_n(4g²/ω²)|`; no resonance condition applies.
pub fn rabi_frequency(m_idx: BandIndex, n_idx: BandIndex, params: &ModelParams) -> Result<f64> {
    rabi_frequency_windowed(m_idx, n_idx, params, RESONANCE_WINDOW)
}

pub fn rabi_frequency_windowed(m_idx: BandIndex, n_idx: BandIndex, params: &ModelParams, window: f64) -> Result<f64> {
    params.validate()?;
    if m_idx.n == n_idx.n {
        if m_idx.sigma == n_idx.sigma {
            return Err(Error::InvalidParams("Rabi pair must be two distinct band states".into()));
        }
        return Ok((params.delta * band_factor(m_idx.n, params.g_over_omega())).abs());
    }
    let (m, n) = (m_idx.n, n_idx.n);
    let x2 = 2.0 * params.g_over_omega();
    let size = m.max(n) + 1;
    let d_minus = displacement_table(-x2, size)[(m, n)];
    let d_plus = displacement_table(x2, size)[(m, n)];
    let omega_r =
        (params.delta * (0.5 * d_minus * f64::from(m_idx.sigma) + 0.5 * d_plus * f64::from(n_idx.sigma))).abs();
    let detuning = band_energy(n_idx, params) - band_energy(m_idx, params) + (n as f64 - m as f64) * params.omega;
    if omega_r == 0.0 || detuning.abs() > window * omega_r {
        return Err(Error::NotResonant { detuning, window: window * omega_r });
    }
    Ok(omega_r)
}

fn checked_column(table: &DMatrix<f64>, n: usize, levels: usize) -> Result<DVector<C64>> {
    let col = DVector::from_iterator(levels, (0..levels).map(|l| cr(table[(l, n)])));
    let kept: f64 = col.iter().map(|z| z.norm_sqr()).sum();
    let top = (levels / 10).max(1);
    let top_mass: f64 = col.iter().skip(levels - top).map(|z| z.norm_sqr()).sum();
    let tail = (1.0 - kept).abs() + top_mass;
    if tail > DRESSED_TAIL_TOLERANCE {
        return Err(Error::Truncation {
            tail_mass: tail,
            tolerance: DRESSED_TAIL_TOLERANCE,
            suggested_n_max: 2 * levels.max(n + 1),
        });
    }
    Ok(col)
}
