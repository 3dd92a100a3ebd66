//! Information-geometric metrics over thermal states of small parametric
//! Hamiltonians.
//!
//! The library computes Bures, Sjöqvist, Fisher-Rao, and Fubini-Study metric
//! tensors on two-parameter manifolds `(β, h)` of Gibbs states
//! `ρ = e^{−βH(h)}/Z`, for built-in two-level models (spin qubit in a z-field,
//! tilted-field spin qubit, superconducting flux qubit) and for user-supplied
//! Hamiltonian tables. Closed-form tensors and independent brute-force
//! distance oracles cross-validate the general spectral engines.
//!
//! Modules:
//! - [`hermitian`]: dense complex Hermitian linear algebra (Jacobi
//!   eigensolver, spectral matrix functions).
//! - [`models`]: parametric Hamiltonian families and thermal states.
//! - [`metrics`]: model-agnostic metric engines and distance oracles.
//! - [`closed_form`]: the analytic tensors the engines are tested against.
//! - [`scan`]: parameter-grid scans with CSV/JSON output.
//! - [`check`]: the self-verification suites behind `qig check`.

#![forbid(unsafe_code)]

pub mod check;
pub mod closed_form;
pub mod hermitian;
pub mod metrics;
pub mod models;
pub mod scan;

use thiserror::Error;

/// Error type shared by all library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    ShapeMismatch(usize, usize),

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian: |A - A^H| reaches {deviation:e} (allowed {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error(
        "eigensolver failed on {context}: off-diagonal residual {residual:e} after {sweeps} sweeps"
    )]
    SolverFailure {
        context: String,
        residual: f64,
        sweeps: usize,
    },

    #[error("spectral function not finite on eigenvalue {eigenvalue}")]
    SpectralDomain { eigenvalue: f64 },

    #[error("degenerate spectrum: gap {gap:e} below threshold {threshold:e}")]
    Degenerate { gap: f64, threshold: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a degenerate spectrum; grid scans flag the
    /// affected row instead of aborting.
    pub fn is_degeneracy(&self) -> bool {
        matches!(self, Error::Degenerate { .. })
    }
}
