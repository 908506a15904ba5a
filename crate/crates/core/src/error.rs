use thiserror::Error;

use crate::dynamics::XiTerm;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be ≥ 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// The reconstructed matrix is not positive semidefinite.
    #[error("unphysical state: minimum eigenvalue {min_eigenvalue:.3e}")]
    Unphysical { min_eigenvalue: f64 },

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("outcome {outcome} has probability {probability:.3e}, at or below the branch threshold")]
    ZeroProbabilityBranch { outcome: usize, probability: f64 },

    #[error("nonlinearity returned a non-finite value for {term:?}")]
    NonFiniteXi { term: XiTerm },

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("the Hamiltonian has nonzero interaction terms")]
    NotInteractionFree,

    #[error("no feasible finite-difference step for {component}")]
    PerturbationInfeasible { component: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
