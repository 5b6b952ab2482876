use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("Fock truncation inadequate: tail mass {tail_mass:e} exceeds {tolerance:e} (suggest n_max >= {suggested_n_max})")]
    Truncation {
        tail_mass: f64,
        tolerance: f64,
        suggested_n_max: usize,
    },
    #[error("dimension {requested} exceeds cap {cap}")]
    Dimension { requested: usize, cap: usize },
    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("basis mismatch: {0}")]
    BasisMismatch(&'static str),
    #[error("pair is not resonant: detuning {detuning:e} exceeds window {window:e}")]
    NotResonant { detuning: f64, window: f64 },
    #[error("integration tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("degenerate family: mean energy vanishes (k_H = 0) at N = {n_atoms}")]
    DegenerateFamily { n_atoms: usize },
    #[error("phase-space grid too small: {0}")]
    GridTooSmall(String),
    #[error("fringe under-resolved: {0}")]
    Underresolved(String),
    #[error("no interference fringe detected")]
    NoFringe,
    #[error("time family undersampled: {samples} samples, need at least {required}")]
    Undersampled { samples: usize, required: usize },
}
