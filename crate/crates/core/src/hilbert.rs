//! Truncated Hilbert spaces, ladder and spin operators, and the model
//! Hamiltonians: single atom, atom ensemble, and central spin plus bath.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};

use crate::math::{ceil, sqrt, exp, SQRT_2};
use crate::{Error, Result, DEFAULT_DIMENSION_CAP};

pub type C64 = Complex<f64>;

/// Tail-mass tolerance used by constructors that materialize displaced states.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Threshold below which a matrix element counts as zero in
/// [`su2_decompose`].
pub const SU2_ZERO_THRESHOLD: f64 = 1e-14;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Photon-number cutoff: the mode is represented on `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParams(format!("n_max must be >= 1, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.levels(), 0)
    }
}

/// Smallest cutoff for which a displacement of magnitude `alpha_abs` keeps
/// the coherent tail below [`TAIL_TOLERANCE`]: `ceil(|α|² + 10|α| + 10)`.
pub fn required_n_max(alpha_abs: f64) -> usize {
    ceil(alpha_abs * alpha_abs + 10.0 * alpha_abs + 10.0) as usize
}

/// Shape of a Fock ⊗ spin⊗N tensor basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Basis {
    fock_levels: usize,
    spins: usize,
}

impl Basis {
    /// `fock_levels = 1` describes a spin-only space.
    pub fn new(fock_levels: usize, spins: usize) -> Self {
        assert!(fock_levels >= 1, "basis needs at least one Fock level");
        Self { fock_levels, spins }
    }

    pub fn spin_only(spins: usize) -> Self {
        Self::new(1, spins)
    }

    pub fn with_spins(fock: FockBasis, spins: usize) -> Self {
        Self::new(fock.levels(), spins)
    }

    pub fn fock_levels(&self) -> usize {
        self.fock_levels
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.spins
    }

    pub fn dim(&self) -> usize {
        self.fock_levels << self.spins
    }

    #[inline]
    pub fn index(&self, n_fock: usize, spin_config: usize) -> usize {
        (n_fock << self.spins) | spin_config
    }

    /// Bit mask selecting spin site `site` inside a spin configuration.
    #[inline]
    pub fn site_mask(&self, site: usize) -> usize {
        1 << (self.spins - 1 - site)
    }
}

/// Normalized state on a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    basis: Basis,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a dimension mismatch or zero vector.
    pub fn normalized(basis: Basis, mut amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch("amplitude length differs from basis dimension"));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParams(format!("cannot normalize vector of norm {norm}")));
        }
        amplitudes /= cr(norm);
        Ok(Self { amplitudes, basis })
    }

    /// Wraps amplitudes without renormalizing. Used by propagators whose
    /// output is normalized by construction.
    pub(crate) fn from_raw(basis: Basis, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        Self { amplitudes, basis }
    }

    /// Basis state `|n_fock⟩ ⊗ |spin_config⟩`.
    pub fn basis_state(basis: Basis, n_fock: usize, spin_config: usize) -> Self {
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[basis.index(n_fock, spin_config)] = cr(1.0);
        Self { amplitudes, basis }
    }

    /// Fock state `|n⟩` of the bare mode.
    pub fn fock(basis: FockBasis, n: usize) -> Result<Self> {
        if n > basis.n_max() {
            return Err(Error::InvalidParams(format!("Fock level {n} above n_max {}", basis.n_max())));
        }
        Ok(Self::basis_state(basis.basis(), n, 0))
    }

    /// Coherent state `|α⟩` from its analytic Fock amplitudes.
    pub fn coherent(alpha: C64, basis: FockBasis) -> Result<Self> {
        let amps = coherent_amplitudes(alpha, basis.levels());
        let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let tail = (1.0 - kept).max(0.0) + fock_tail_mass(&amps, basis.basis());
        if tail > TAIL_TOLERANCE {
            return Err(Error::Truncation {
                tail_mass: tail,
                tolerance: TAIL_TOLERANCE,
                suggested_n_max: required_n_max(alpha.norm()),
            });
        }
        Self::normalized(basis.basis(), amps)
    }

    /// Tensor product `photon ⊗ spin_0 ⊗ spin_1 ⊗ …`, each spin given as
    /// `[⟨↑|s⟩, ⟨↓|s⟩]`. The result is normalized.
    pub fn product(photon: &DVector<C64>, spins: &[[C64; 2]]) -> Result<Self> {
        let basis = Basis::new(photon.len(), spins.len());
        let mut spin_part = alloc::vec![cr(1.0)];
        for s in spins {
            let mut next = Vec::with_capacity(spin_part.len() * 2);
            for a in &spin_part {
                next.push(a * s[0]);
                next.push(a * s[1]);
            }
            spin_part = next;
        }
        let mut amps = DVector::zeros(basis.dim());
        for (n, pn) in photon.iter().enumerate() {
            for (s, ps) in spin_part.iter().enumerate() {
                amps[basis.index(n, s)] = pn * ps;
            }
        }
        Self::normalized(basis, amps)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("inner product of states on different bases"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &DenseOperator) -> Result<C64> {
        if op.basis != self.basis {
            return Err(Error::BasisMismatch("operator and state live on different bases"));
        }
        Ok(self.amplitudes.dotc(&(&op.matrix * &self.amplitudes)))
    }
}

/// Analytic amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < levels`.
pub fn coherent_amplitudes(alpha: C64, levels: usize) -> DVector<C64> {
    let mut amps = DVector::zeros(levels);
    let mut cur = cr(exp(-0.5 * alpha.norm_sqr()));
    for n in 0..levels {
        amps[n] = cur;
        cur = cur * alpha / cr(sqrt((n + 1) as f64));
    }
    amps
}

/// Population carried by the top 10% of Fock levels (at least one level),
/// summed over any spin factors.
pub fn fock_tail_mass(amplitudes: &DVector<C64>, basis: Basis) -> f64 {
    let levels = basis.fock_levels();
    let top = ceil(0.1 * levels as f64).max(1.0) as usize;
    let start = levels - top.min(levels);
    let spin_dim = basis.spin_dim();
    (start..levels)
        .flat_map(|n| (0..spin_dim).map(move |s| (n, s)))
        .map(|(n, s)| amplitudes[basis.index(n, s)].norm_sqr())
        .sum()
}

/// Dense complex matrix on a [`Basis`] with Hermitian / unitary flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    basis: Basis,
    hermitian: bool,
    unitary: bool,
}

impl DenseOperator {
    pub fn general(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::BasisMismatch("matrix shape differs from basis dimension"));
        }
        Ok(Self { matrix, basis, hermitian: false, unitary: false })
    }

    /// Flags the matrix Hermitian after checking `max|M − M†|`.
    pub fn hermitian(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::general(basis, matrix)?;
        let dev = hermitian_deviation(&op.matrix);
        if dev > HERMITIAN_TOL * max_abs(&op.matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        op.hermitian = true;
        Ok(op)
    }

    /// Flags the matrix unitary after checking `max|M†M − I|`.
    pub fn unitary(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::general(basis, matrix)?;
        let dev = unitary_deviation(&op.matrix);
        if dev > UNITARY_TOL {
            return Err(Error::InvalidParams(format!("matrix is not unitary (deviation {dev:e})")));
        }
        op.unitary = true;
        Ok(op)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Applies the operator; the result is not renormalized.
    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.basis != self.basis {
            return Err(Error::BasisMismatch("operator and state live on different bases"));
        }
        Ok(&self.matrix * &psi.amplitudes)
    }
}

pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn unitary_deviation(m: &DMatrix<C64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { cr(1.0) } else { cr(0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Annihilation and creation operators, `⟨n−1|a|n⟩ = √n`.
pub fn ladder_ops(basis: FockBasis) -> (DenseOperator, DenseOperator) {
    let levels = basis.levels();
    let mut a = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = cr(sqrt(n as f64));
    }
    let a_dag = a.adjoint();
    let b = basis.basis();
    (
        DenseOperator { matrix: a, basis: b, hermitian: false, unitary: false },
        DenseOperator { matrix: a_dag, basis: b, hermitian: false, unitary: false },
    )
}

pub fn number_op(basis: FockBasis) -> DenseOperator {
    let levels = basis.levels();
    let m = DMatrix::from_fn(levels, levels, |i, j| if i == j { cr(i as f64) } else { cr(0.0) });
    DenseOperator { matrix: m, basis: basis.basis(), hermitian: true, unitary: false }
}

/// Pauli matrices in the `{|↑⟩, |↓⟩}` basis.
pub mod pauli {
    use super::{c, cr, C64};
    use nalgebra::DMatrix;

    pub fn x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }
    pub fn y() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
    }
    pub fn z() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
    }
}

pub const SPIN_UP: [C64; 2] = [Complex { re: 1.0, im: 0.0 }, Complex { re: 0.0, im: 0.0 }];
pub const SPIN_DOWN: [C64; 2] = [Complex { re: 0.0, im: 0.0 }, Complex { re: 1.0, im: 0.0 }];

/// σ₁ eigenstate `|λ⟩ = (|↑⟩ + λ|↓⟩)/√2` for `λ = ±1`.
pub fn sigma_x_eigenstate(lambda: i8) -> [C64; 2] {
    let s = 1.0 / SQRT_2;
    [cr(s), cr(if lambda >= 0 { s } else { -s })]
}

/// Displacement `D(α) = exp(α a† − α* a)` on the truncated mode.
///
/// The exponential of the truncated generator is taken by scaling and
/// squaring a Taylor series, so the result is unitary to machine precision
/// and independent of any eigensolver. Fails when `D(α)|0⟩` leaves more than
/// [`TAIL_TOLERANCE`] in the top 10% of levels.
pub fn displacement(alpha: C64, basis: FockBasis) -> Result<DenseOperator> {
    let levels = basis.levels();
    let mut gen = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        let s = sqrt(n as f64);
        gen[(n, n - 1)] = alpha * s;
        gen[(n - 1, n)] = -alpha.conj() * s;
    }
    let d = expm_taylor(&gen);
    let column0 = d.column(0).into_owned();
    let tail = fock_tail_mass(&column0, basis.basis());
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation {
            tail_mass: tail,
            tolerance: TAIL_TOLERANCE,
            suggested_n_max: required_n_max(alpha.norm()),
        });
    }
    Ok(DenseOperator { matrix: d, basis: basis.basis(), hermitian: false, unitary: true })
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub(crate) fn expm_taylor(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = m * cr(scale);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = (&term * &b) * cr(1.0 / k as f64);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Physical parameters, all in angular-frequency units.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub g: f64,
    pub delta: f64,
    pub n_atoms: usize,
    pub j_coupling: f64,
    pub omega0: f64,
    /// Per-site σx splittings of the bath; empty means all zero.
    pub delta_x: Vec<f64>,
    /// Per-site σz splittings of the bath; empty means all zero.
    pub delta_z: Vec<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            g: 0.0,
            delta: 0.0,
            n_atoms: 1,
            j_coupling: 0.0,
            omega0: 0.0,
            delta_x: Vec::new(),
            delta_z: Vec::new(),
        }
    }
}

impl ModelParams {
    /// Single atom with mode frequency `omega`, coupling `g`, splitting `delta`.
    pub fn single(omega: f64, g: f64, delta: f64) -> Self {
        Self { omega, g, delta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.g, self.delta, self.j_coupling, self.omega0]
            .iter()
            .chain(self.delta_x.iter())
            .chain(self.delta_z.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParams(format!("g must be >= 0, got {}", self.g)));
        }
        if self.j_coupling < 0.0 || self.omega0 < 0.0 {
            return Err(Error::InvalidParams("J and Omega0 must be >= 0".into()));
        }
        if self.n_atoms < 1 {
            return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
        }
        for (name, v) in [("delta_x", &self.delta_x), ("delta_z", &self.delta_z)] {
            if !v.is_empty() && v.len() != self.n_atoms {
                return Err(Error::InvalidParams(format!(
                    "{name} has {} entries, expected n_atoms = {}",
                    v.len(),
                    self.n_atoms
                )));
            }
        }
        Ok(())
    }

    pub fn g_over_omega(&self) -> f64 {
        self.g / self.omega
    }

    fn site_value(v: &[f64], i: usize) -> f64 {
        v.get(i).copied().unwrap_or(0.0)
    }
}

/// `H = ω a†a + (Δ/2)σ₃ + g σ₁(a† + a)` on Fock ⊗ one spin.
pub fn build_h_single(params: &ModelParams, basis: FockBasis) -> Result<DenseOperator> {
    params.validate()?;
    let single = ModelParams { n_atoms: 1, delta_x: Vec::new(), delta_z: Vec::new(), ..params.clone() };
    build_h_ensemble_capped(&single, basis, DEFAULT_DIMENSION_CAP.max(2 * basis.levels()))
}

/// `H = ω a†a + (Δ/2)Σσ₃ᵢ + g Σσ₁ᵢ(a† + a)` for `params.n_atoms` atoms.
pub fn build_h_ensemble(params: &ModelParams, basis: FockBasis) -> Result<DenseOperator> {
    build_h_ensemble_capped(params, basis, DEFAULT_DIMENSION_CAP)
}

pub fn build_h_ensemble_capped(params: &ModelParams, fock: FockBasis, cap: usize) -> Result<DenseOperator> {
    params.validate()?;
    let spins = params.n_atoms;
    let requested = checked_dim(fock.levels(), spins);
    if requested > cap {
        return Err(Error::Dimension { requested, cap });
    }
    let basis = Basis::with_spins(fock, spins);
    let dim = basis.dim();
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..basis.fock_levels() {
        for s in 0..basis.spin_dim() {
            let col = basis.index(n, s);
            let ups = spins as i64 - 2 * s.count_ones() as i64;
            h[(col, col)] = cr(params.omega * n as f64 + 0.5 * params.delta * ups as f64);
            for site in 0..spins {
                let flipped = s ^ basis.site_mask(site);
                if n + 1 < basis.fock_levels() {
                    h[(basis.index(n + 1, flipped), col)] += cr(params.g * sqrt((n + 1) as f64));
                }
                if n > 0 {
                    h[(basis.index(n - 1, flipped), col)] += cr(params.g * sqrt(n as f64));
                }
            }
        }
    }
    Ok(DenseOperator { matrix: h, basis, hermitian: true, unitary: false })
}

/// Central spin (site 0) coupled to `n_atoms` bath spins:
/// `H = (Ω₀/2)σz + ½Σ(Δxᵢσxᵢ + Δzᵢσzᵢ) − J σx Σσxᵢ`.
pub fn build_h_decoherence(params: &ModelParams) -> Result<DenseOperator> {
    build_h_decoherence_capped(params, DEFAULT_DIMENSION_CAP)
}

pub fn build_h_decoherence_capped(params: &ModelParams, cap: usize) -> Result<DenseOperator> {
    params.validate()?;
    let spins = params.n_atoms + 1;
    let requested = checked_dim(1, spins);
    if requested > cap {
        return Err(Error::Dimension { requested, cap });
    }
    let basis = Basis::spin_only(spins);
    let dim = basis.dim();
    let central = basis.site_mask(0);
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let z = |site: usize| if s & basis.site_mask(site) == 0 { 1.0 } else { -1.0 };
        let mut diag = 0.5 * params.omega0 * z(0);
        for i in 0..params.n_atoms {
            diag += 0.5 * ModelParams::site_value(&params.delta_z, i) * z(i + 1);
            let bit = basis.site_mask(i + 1);
            h[(s ^ bit, s)] += cr(0.5 * ModelParams::site_value(&params.delta_x, i));
            h[(s ^ bit ^ central, s)] += cr(-params.j_coupling);
        }
        h[(s, s)] += cr(diag);
    }
    Ok(DenseOperator { matrix: h, basis, hermitian: true, unitary: false })
}

fn checked_dim(levels: usize, spins: usize) -> usize {
    if spins >= usize::BITS as usize - 1 {
        return usize::MAX;
    }
    levels.saturating_mul(1usize << spins)
}

/// One su(2) component `⟨m|V|n⟩ σ†ₙₘ + h.c.` of an interaction, `m > n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Term {
    pub m: usize,
    pub n: usize,
    /// `⟨m|V|n⟩`.
    pub coupling: C64,
    /// `Ẽₘ − Ẽₙ`.
    pub bohr_freq: f64,
}

/// Splits the off-diagonal part of `v` (given in the eigenbasis of the
/// unperturbed Hamiltonian, diagonal already folded into `energies`) into
/// two-level components, one per coupled pair.
pub fn su2_decompose(energies: &[f64], v: &DenseOperator) -> Result<Vec<Su2Term>> {
    let dev = hermitian_deviation(v.matrix());
    if dev > HERMITIAN_TOL * max_abs(v.matrix()).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let dim = v.dim();
    if energies.len() != dim {
        return Err(Error::BasisMismatch("energy list length differs from operator dimension"));
    }
    let mut terms = Vec::new();
    for n in 0..dim {
        for m in (n + 1)..dim {
            let coupling = v.matrix()[(m, n)];
            if coupling.norm() > SU2_ZERO_THRESHOLD {
                terms.push(Su2Term { m, n, coupling, bohr_freq: energies[m] - energies[n] });
            }
        }
    }
    Ok(terms)
}

/// `Σ [⟨m|V|n⟩ |m⟩⟨n| + ⟨n|V|m⟩ |n⟩⟨m|]` over the terms.
pub fn su2_reconstruct(terms: &[Su2Term], dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    for t in terms {
        out[(t.m, t.n)] += t.coupling;
        out[(t.n, t.m)] += t.coupling.conj();
    }
    out
}

/// Interaction-picture form of the decomposed interaction at time `t`: each
/// component rotates at its own Bohr frequency.
pub fn su2_interaction_picture(terms: &[Su2Term], dim: usize, t: f64) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    for term in terms {
        let phase = C64::from_polar(1.0, -term.bohr_freq * t);
        out[(term.m, term.n)] += phase * term.coupling;
        out[(term.n, term.m)] += (phase * term.coupling).conj();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb(n: usize) -> FockBasis {
        FockBasis::new(n).unwrap()
    }

    #[test]
    fn ladder_elements() {
        let (a, ad) = ladder_ops(fb(2));
        assert_eq!(a.matrix()[(0, 1)], cr(1.0));
        let vac = StateVector::fock(fb(2), 0).unwrap();
        assert!(a.apply(&vac).unwrap().norm() == 0.0);
        let (a, ad2) = ladder_ops(fb(6));
        let num = ad2.matrix() * a.matrix();
        assert!((num[(5, 5)] - cr(5.0)).norm() < 1e-15);
        assert_eq!(ad.matrix(), &ladder_ops(fb(2)).0.matrix().adjoint());
    }

    #[test]
    fn commutator_is_identity_below_cutoff() {
        let (a, ad) = ladder_ops(fb(12));
        let comm = a.matrix() * ad.matrix() - ad.matrix() * a.matrix();
        for i in 0..12 {
            for j in 0..12 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((comm[(i, j)] - cr(want)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn displacement_basics() {
        let id = displacement(cr(0.0), fb(10)).unwrap();
        assert!(unitary_deviation(id.matrix()) < 1e-15);
        assert!((id.matrix()[(3, 3)] - cr(1.0)).norm() < 1e-15);

        let d = displacement(cr(1.0), fb(30)).unwrap();
        assert!(d.is_unitary());
        let vac = StateVector::fock(fb(30), 0).unwrap();
        let coh = StateVector::normalized(fb(30).basis(), d.apply(&vac).unwrap()).unwrap();
        let n = coh.expectation(&number_op(fb(30))).unwrap();
        assert!((n.re - 1.0).abs() < 1e-8);
        assert!((d.matrix()[(0, 0)].re - libm::exp(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn displacement_inverse() {
        let alpha = c(0.7, -0.4);
        let basis = fb(required_n_max(alpha.norm()));
        let d = displacement(alpha, basis).unwrap();
        let dm = displacement(-alpha, basis).unwrap();
        let prod = d.matrix() * dm.matrix();
        assert!(unitary_deviation(&prod) < 1e-9);
        let id_dev = (prod - DMatrix::identity(basis.levels(), basis.levels())).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(id_dev < 1e-9);
    }

    #[test]
    fn displacement_detects_truncation() {
        let err = displacement(cr(3.0), fb(8)).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn single_hamiltonian_shape_and_ordering() {
        let p = ModelParams::single(1.0, 0.3, 0.7);
        let h = build_h_single(&p, fb(4)).unwrap();
        assert_eq!(h.dim(), 10);
        assert!(h.is_hermitian());
        // index = 2 n + spin, spin 0 = up
        assert!((h.matrix()[(0, 0)].re - 0.35).abs() < 1e-15);
        assert!((h.matrix()[(1, 1)].re + 0.35).abs() < 1e-15);
        assert!((h.matrix()[(2, 2)].re - 1.35).abs() < 1e-15);
        // g σ1 (a + a†): |1,↓⟩ ← |0,↑⟩
        assert!((h.matrix()[(3, 0)].re - 0.3).abs() < 1e-15);
        assert_eq!(h.matrix()[(2, 0)], cr(0.0));
    }

    #[test]
    fn ensemble_reduces_to_single() {
        let p = ModelParams::single(1.3, 0.45, 0.2);
        let single = build_h_single(&p, fb(7)).unwrap();
        let ens = build_h_ensemble(&p, fb(7)).unwrap();
        assert_eq!(single.matrix(), ens.matrix());
    }

    #[test]
    fn ensemble_dimension_cap() {
        let p = ModelParams { n_atoms: 12, ..ModelParams::single(1.0, 0.1, 0.0) };
        assert!(matches!(build_h_ensemble(&p, fb(4)), Err(Error::Dimension { .. })));
        let q = ModelParams { n_atoms: 12, ..ModelParams::default() };
        assert!(matches!(build_h_decoherence(&q), Err(Error::Dimension { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::single(0.0, 0.1, 0.1).validate().is_err());
        assert!(ModelParams::single(1.0, -0.1, 0.1).validate().is_err());
        let p = ModelParams { n_atoms: 3, delta_x: alloc::vec![0.1, 0.2], ..ModelParams::default() };
        assert!(p.validate().is_err());
        assert!(FockBasis::new(0).is_err());
    }

    #[test]
    fn su2_small_cases() {
        let basis = Basis::spin_only(1);
        let v = DMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.3, -0.2), c(0.3, 0.2), cr(0.0)]);
        let op = DenseOperator::hermitian(basis, v).unwrap();
        let terms = su2_decompose(&[0.0, 1.0], &op).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].coupling, c(0.3, 0.2));
        assert_eq!(terms[0].bohr_freq, 1.0);

        let diag = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![cr(1.0), cr(2.0)]));
        let op = DenseOperator::hermitian(basis, diag).unwrap();
        assert!(su2_decompose(&[1.0, 2.0], &op).unwrap().is_empty());

        let bad = DMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(2.0), cr(0.0)]);
        let op = DenseOperator::general(basis, bad).unwrap();
        assert!(matches!(su2_decompose(&[0.0, 1.0], &op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn coherent_state_truncation() {
        assert!(StateVector::coherent(c(2.0, 1.0), fb(10)).is_err());
        let s = StateVector::coherent(c(2.0, 1.0), fb(required_n_max(libm::sqrt(5.0)))).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}
