//! Brute-force ground truth: dense Hermitian eigensystems, exact
//! propagation, fidelities, partial traces and truncation audits.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ensemble::ReducedDensity2x2;
use crate::hilbert::{cr, fock_tail_mass, hermitian_deviation, max_abs, Basis, DenseOperator, StateVector, C64};
use crate::ode::{integrate, OdeOptions};
use crate::{Error, Result, DEFAULT_DIMENSION_CAP};

/// Relative eigenvalue gap below which levels are treated as one cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    basis: Basis,
}

impl EigenSystem {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `e^{−iHt}|ψ⟩` through the spectral decomposition.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.basis() != self.basis {
            return Err(Error::BasisMismatch("state and Hamiltonian live on different bases"));
        }
        let mut coeffs = self.eigenvectors.ad_mul(psi.amplitudes());
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        Ok(StateVector::from_raw(self.basis, &self.eigenvectors * coeffs))
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(e);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `max_j ‖H v_j − λ_j v_j‖`.
    pub fn residual(&self, h: &DenseOperator) -> f64 {
        let hv = h.matrix() * &self.eigenvectors;
        (0..self.dim())
            .map(|j| (hv.column(j) - self.eigenvectors.column(j) * cr(self.eigenvalues[j])).norm())
            .fold(0.0, f64::max)
    }

    /// `max|V†V − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        crate::hilbert::unitary_deviation(&self.eigenvectors)
    }
}

/// Full Hermitian eigendecomposition with deterministic eigenvectors.
///
/// Within each degenerate cluster the vectors are rebuilt by projecting the
/// canonical basis vectors `e_0, e_1, …` onto the cluster subspace and
/// orthonormalizing in that order. Every vector is then phased so its
/// largest component is real and positive.
pub fn exact_eigensystem(h: &DenseOperator) -> Result<EigenSystem> {
    exact_eigensystem_capped(h, DEFAULT_DIMENSION_CAP)
}

pub fn exact_eigensystem_capped(h: &DenseOperator, cap: usize) -> Result<EigenSystem> {
    check_hermitian(h)?;
    if h.dim() > cap {
        return Err(Error::Dimension { requested: h.dim(), cap });
    }
    let eig = SymmetricEigen::new(h.matrix().clone());
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }

    let scale = max_abs(h.matrix()).max(1.0);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eigenvalues[end] - eigenvalues[end - 1] < DEGENERACY_GAP * scale {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut vectors, start, end);
        }
        start = end;
    }
    for j in 0..dim {
        fix_phase(&mut vectors, j);
    }
    Ok(EigenSystem { eigenvalues, eigenvectors: vectors, basis: h.basis() })
}

fn canonicalize_cluster(vectors: &mut DMatrix<C64>, start: usize, end: usize) {
    let dim = vectors.nrows();
    let k = end - start;
    let cluster = vectors.columns(start, k).into_owned();
    let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(k);
    for row in 0..dim {
        if chosen.len() == k {
            break;
        }
        // projection of e_row onto the cluster: Σ_c v_c conj(v_c[row])
        let mut p = DVector::zeros(dim);
        for c in 0..k {
            p += cluster.column(c) * cluster[(row, c)].conj();
        }
        for q in &chosen {
            let overlap = q.dotc(&p);
            p -= q * overlap;
        }
        let norm = p.norm();
        if norm > 1e-6 {
            chosen.push(p / cr(norm));
        }
    }
    for (offset, v) in chosen.into_iter().enumerate() {
        vectors.set_column(start + offset, &v);
    }
}

fn fix_phase(vectors: &mut DMatrix<C64>, j: usize) {
    let col = vectors.column(j);
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in col.iter().enumerate() {
        // ties broken toward the lowest index
        if z.norm() > best_mag + 1e-12 {
            best_mag = z.norm();
            best = i;
        }
    }
    let pivot = vectors[(best, j)];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / cr(pivot.norm());
        for i in 0..vectors.nrows() {
            vectors[(i, j)] *= phase;
        }
    }
}

fn check_hermitian(h: &DenseOperator) -> Result<()> {
    if h.is_hermitian() {
        return Ok(());
    }
    let dev = hermitian_deviation(h.matrix());
    if dev > 1e-12 * max_abs(h.matrix()).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// `e^{−iHt}|ψ₀⟩`. Uses the spectral decomposition up to `cap`; above it
/// falls back to adaptive integration of the Schrödinger equation.
pub fn exact_propagate(h: &DenseOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    exact_propagate_capped(h, psi0, t, DEFAULT_DIMENSION_CAP)
}

pub fn exact_propagate_capped(h: &DenseOperator, psi0: &StateVector, t: f64, cap: usize) -> Result<StateVector> {
    if psi0.basis() != h.basis() {
        return Err(Error::BasisMismatch("state and Hamiltonian live on different bases"));
    }
    if h.dim() <= cap {
        return exact_eigensystem_capped(h, cap)?.propagate(psi0, t);
    }
    check_hermitian(h)?;
    integrate_schrodinger(h, psi0, t)
}

/// Adaptive-step propagation of `i ψ' = H ψ`, valid for either sign of `t`.
pub fn integrate_schrodinger(h: &DenseOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let m = h.matrix();
    let factor = C64::new(0.0, -sign);
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..OdeOptions::default() };
    let (ys, _) = integrate(
        |_, y, dy| {
            let yv = nalgebra::DVectorView::from_slice(y, y.len());
            let out = m * yv;
            for (d, o) in dy.iter_mut().zip(out.iter()) {
                *d = factor * o;
            }
        },
        psi0.amplitudes().as_slice(),
        0.0,
        &[t.abs()],
        &opts,
    )?;
    let amps = DVector::from_vec(ys.into_iter().next().unwrap_or_default());
    Ok(StateVector::from_raw(psi0.basis(), amps))
}

/// `|⟨ψ₁|ψ₂⟩|`.
pub fn fidelity(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    Ok(psi1.inner(psi2)?.norm().min(1.0))
}

/// Reduced density matrix of spin `site` of a pure state, all other factors
/// (mode and remaining spins) traced out.
pub fn partial_trace_spin(psi: &StateVector, site: usize) -> Result<ReducedDensity2x2> {
    let basis = psi.basis();
    if site >= basis.spins() {
        return Err(Error::BasisMismatch("spin site outside the basis"));
    }
    let mask = basis.site_mask(site);
    let amps = psi.amplitudes();
    let (mut uu, mut ud, mut dd) = (cr(0.0), cr(0.0), cr(0.0));
    for n in 0..basis.fock_levels() {
        for s in 0..basis.spin_dim() {
            if s & mask != 0 {
                continue;
            }
            let up = amps[basis.index(n, s)];
            let down = amps[basis.index(n, s | mask)];
            uu += up * up.conj();
            ud += up * down.conj();
            dd += down * down.conj();
        }
    }
    Ok(ReducedDensity2x2::new(uu, ud, ud.conj(), dd))
}

/// Same as [`partial_trace_spin`] for a density matrix on `basis`.
pub fn partial_trace_spin_density(rho: &DMatrix<C64>, basis: Basis, site: usize) -> Result<ReducedDensity2x2> {
    if rho.nrows() != basis.dim() || rho.ncols() != basis.dim() {
        return Err(Error::BasisMismatch("density matrix shape differs from basis dimension"));
    }
    if site >= basis.spins() {
        return Err(Error::BasisMismatch("spin site outside the basis"));
    }
    let mask = basis.site_mask(site);
    let (mut uu, mut ud, mut du, mut dd) = (cr(0.0), cr(0.0), cr(0.0), cr(0.0));
    for n in 0..basis.fock_levels() {
        for s in 0..basis.spin_dim() {
            if s & mask != 0 {
                continue;
            }
            let i_up = basis.index(n, s);
            let i_dn = basis.index(n, s | mask);
            uu += rho[(i_up, i_up)];
            ud += rho[(i_up, i_dn)];
            du += rho[(i_dn, i_up)];
            dd += rho[(i_dn, i_dn)];
        }
    }
    Ok(ReducedDensity2x2::new(uu, ud, du, dd))
}

/// Photon density matrix with every spin traced out.
pub fn photon_density(psi: &StateVector) -> DMatrix<C64> {
    let basis = psi.basis();
    let levels = basis.fock_levels();
    let amps = psi.amplitudes();
    let mut rho = DMatrix::zeros(levels, levels);
    for m in 0..levels {
        for n in 0..levels {
            let mut acc = cr(0.0);
            for s in 0..basis.spin_dim() {
                acc += amps[basis.index(m, s)] * amps[basis.index(n, s)].conj();
            }
            rho[(m, n)] = acc;
        }
    }
    rho
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub pass: bool,
    pub tail_mass: f64,
}

/// Population in the top 10% of Fock levels of a state truncated at `n_max`.
pub fn truncation_check(psi: &StateVector, n_max: usize, tail_tol: f64) -> Result<TruncationReport> {
    if psi.basis().fock_levels() != n_max + 1 {
        return Err(Error::BasisMismatch("n_max does not match the state's Fock dimension"));
    }
    let tail_mass = fock_tail_mass(psi.amplitudes(), psi.basis());
    Ok(TruncationReport { pass: tail_mass <= tail_tol, tail_mass })
}

/// `e^{−iHt}` as a dense matrix (used to build reference propagators).
pub fn unitary_propagator(h: &DenseOperator, t: f64) -> Result<DMatrix<C64>> {
    let es = exact_eigensystem(h)?;
    let mut scaled = es.eigenvectors.clone();
    for (j, &e) in es.eigenvalues.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= ph;
        }
    }
    Ok(scaled * es.eigenvectors.adjoint())
}
