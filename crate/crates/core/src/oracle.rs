//! Matrix-route reference computations.
//!
//! These work on reconstructed density matrices and share no code path with
//! the Bloch-coordinate formulas they are used to check.

use crate::bloch::{bloch_coordinates, Bipartite, BlochState, JointBlochState};
use crate::dynamics::BlochHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{kron, trace_out_second, unitary_propagator};
use crate::measurement::{ProjectiveObservable, BRANCH_EPS};

/// `ρ(t) = e^{−iHt} ρ₀ e^{iHt}` converted back to Bloch coordinates.
pub fn unitary_evolution(sys: &Bipartite, h: &BlochHamiltonian, s0: &JointBlochState, t: f64) -> JointBlochState {
    let u = unitary_propagator(&h.matrix(sys), t);
    let rho = sys.matrix(s0);
    sys.coordinates(&(&u * rho * u.adjoint()))
}

/// Outcome probability and collapsed state of the first subsystem, via
/// `Tr₂[(I⊗Pₖ) ρ (I⊗Pₖ)] / pₖ`.
pub fn collapse(
    sys: &Bipartite,
    joint: &JointBlochState,
    remote: &ProjectiveObservable,
    k: usize,
) -> Result<(f64, BlochState)> {
    let (n1, n2) = sys.dims();
    let p = remote
        .outcomes()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome index {k} out of range")))?
        .matrix(sys.second());
    let lift = kron(&sys.first().identity(), &p);
    let post = &lift * sys.matrix(joint) * &lift;
    let prob = post.trace().re;
    if prob <= BRANCH_EPS {
        return Err(Error::ZeroProbabilityBranch {
            outcome: k,
            probability: prob,
        });
    }
    let reduced = trace_out_second(&post, n1, n2).scale(1.0 / prob);
    Ok((prob, bloch_coordinates(&reduced, sys.first())))
}
