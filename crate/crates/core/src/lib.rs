//! Numerical laboratory for two-level systems coupled to a single quantized
//! radiation mode, with the rotating-wave approximation relaxed.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; IO, configuration and thread pools live in the
//! `tlsim-lab` companion crate.
//!
//! Conventions used throughout (ħ = 1, energies are angular frequencies):
//!
//! * Product bases are Fock-major, spin-minor: for `N` spins the basis index
//!   is `n_fock · 2^N + s`, where bit `N−1−i` of `s` holds site `i`.
//! * A spin bit `0` is `|↑⟩` (σ₃ = +1) and `1` is `|↓⟩`.
//! * σ₁ eigenstates are `|λ = ±1⟩ = (|↑⟩ ± |↓⟩)/√2`.
//! * Phase space uses `x = √2 Re α`, `p = √2 Im α`, so a coherent state has
//!   Wigner function `(1/π) exp[−(x − √2 Re α)² − (p − √2 Im α)²]`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dressed;
pub mod ensemble;
mod error;
pub mod fit;
pub mod hilbert;
mod math;
pub mod ode;
pub mod oracle;
pub mod specfun;
pub mod wigner;

pub use error::{Error, Result};
pub use hilbert::{Basis, DenseOperator, FockBasis, ModelParams, StateVector, C64};

/// Default cap on dense matrix dimension for exact (brute-force) work.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
