//! Bloch-space description of bipartite finite-dimensional quantum systems.
//!
//! States, projectors and Hamiltonians of an `N₁ × N₂` system are written in
//! coordinates over the generalized Gell-Mann generators of `SU(N)`:
//!
//! ```text
//! ρ₁₂ = (1/N₁N₂)(I + r1·σ⊗I + I⊗r2·λ + Σ r12ᵢⱼ σᵢ⊗λⱼ)
//! ```
//!
//! On top of that representation the crate provides
//!
//! - projective measurements in `(u₀, u)` coordinates, collapse of the remote
//!   partner and the local outcome distribution under a remote measurement,
//! - linear and ξ-weighted nonlinear evolution laws for the joint coordinates,
//! - a finite-difference audit of the three no-signaling conditions
//!   (independence of the local distribution from the remote reduced state,
//!   from the correlations and from the remote measurement choice).

pub mod audit;
pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod json;
pub mod linalg;
pub mod measurement;
pub mod oracle;
pub mod random;
pub mod su_basis;

pub use audit::{audit, AuditConfig, AuditReport, Verdict};
pub use bloch::{Bipartite, BlochState, DensityMatrix, JointBlochState, Subsystem};
pub use dynamics::{
    BlochHamiltonian, Dynamics, EvolutionLaw, IntegratorOptions, Method, PoleSink, XiFunctions, XiTerm,
};
pub use error::{Error, Result};
pub use measurement::{ProjectiveObservable, Projector};
pub use su_basis::{GeneratorSet, Qudit, StructureConstants};

/// Library version, echoed into serialized reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
