//! Synthesis and analysis of heteroclinic cycles in Hopfield firing-rate networks.
//!
//! The pipeline turns a binary information string `η` into a coupling matrix
//! via the learning rule `JΣ = ΣP` (exact rational arithmetic), classifies
//! whether the resulting network supports a robust heteroclinic cycle using
//! cyclotomic algebra and closed-form vertex eigenvalues, and verifies the
//! prediction by integrating the regularized firing-rate equations and
//! extracting the visited sign-pattern sequence.

pub mod cyclo;
pub mod dynamics;
pub mod golden;
pub mod patterns;
pub mod ratlinalg;
pub mod stability;
pub mod trace;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cycle is not admissible: {0}")]
    NotAdmissible(String),
    #[error("value outside function domain: {0}")]
    Domain(String),
    #[error("integration failed: non-finite state at t = {t}")]
    IntegrationFailure { t: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
