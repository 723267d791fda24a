//! Exact Gaussian dynamics of a harmonic oscillator coupled to a finite
//! oscillator chain, together with the spectral-density and non-Markovianity
//! toolkit built on top of it.
//!
//! The crate is organized bottom-up:
//!
//! * [`chain`]: chain Hamiltonians, normal-mode (star) form, full-model
//!   diagonalization and the exact symplectic propagator.
//! * [`gaussian`]: Gaussian states (mean + covariance), symplectic evolution,
//!   partial trace, fidelity, logarithmic negativity, excitation number.
//! * [`trajectory`]: reduced system(+ancilla) dynamics that avoid building the
//!   full (2N+2)-dimensional covariance at every step.
//! * [`spectral`]: damping kernel, windowed cosine transform, local spectral
//!   density of a star model, and synthesis of star couplings from a target
//!   spectral density.
//! * [`nonmarkov`]: BLP (trace-distance-like, via fidelity) and RHP
//!   (entanglement-based) non-Markovianity measures on probe-state grids.
//! * [`experiments`]: parameter-sweep scenarios driven by TOML configs, with
//!   CSV + JSON metadata output.
//!
//! Conventions used throughout: ħ = 1, masses = 1, k_B = 1. Single-mode vacuum
//! covariance is I/2. Logarithms in the negativity are natural logs.

pub mod chain;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod nonmarkov;
pub mod spectral;
pub mod trajectory;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    TomlParse(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
