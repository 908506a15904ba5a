//! Projectors and projective observables in `(u₀, u)` coordinates.
//!
//! A projector is written `P = u₀ I + (N/2) u·σ` with `u₀ = Tr(P)/N` and
//! `uᵢ = Tr(Pσᵢ)/N`, which turns the Born rule into `p = u₀ + u·r`.
//!
//! Measuring a complete observable `{P⁽ᵏ⁾}` on the second subsystem leaves the
//! first one, for outcome `k`, in
//!
//! ```text
//! r⁽¹;ᵏ⁾ⱼ = (u₀⁽ᵏ⁾ r1ⱼ + Σₙ r12ⱼₙ uₙ⁽ᵏ⁾) / (u₀⁽ᵏ⁾ + u⁽ᵏ⁾·r2)
//! ```
//!
//! and the local distribution of an observable `{v⁽ᵖ⁾}` at time `t` is
//! `Σₖ pₖ (v₀⁽ᵖ⁾ + v⁽ᵖ⁾·r⁽¹⁾(t; r⁽¹;ᵏ⁾))`, each branch evolved by the reduced
//! flow of the first subsystem.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::{Bipartite, BlochState, JointBlochState, Subsystem};
use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_residual, max_abs, outer, unitary_propagator, CMatrix, CVector};
use crate::random;
use crate::su_basis::Qudit;

/// Input projectors must be Hermitian and idempotent to this tolerance.
pub const PROJECTOR_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-12;
pub const ORTHOGONALITY_TOL: f64 = 1e-11;
/// Branches with probability at or below this carry zero weight.
pub const BRANCH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projector {
    pub u0: f64,
    #[serde(with = "dvec")]
    pub u: DVector<f64>,
}

mod dvec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

impl Projector {
    /// Number of levels implied by the length of `u`.
    pub fn dim(&self) -> usize {
        ((self.u.len() + 1) as f64).sqrt().round() as usize
    }

    /// `u₀ I + (N/2) u·σ`
    pub fn matrix(&self, q: &Qudit) -> CMatrix {
        let n = q.dim() as f64;
        q.identity().scale(self.u0) + q.basis().combine(self.u.as_slice()).scale(n / 2.0)
    }

    /// Born rule `u₀ + u·r`.
    pub fn probability(&self, state: &BlochState) -> f64 {
        self.u0 + self.u.dot(state.r())
    }

    /// Rank implied by `u₀ = rank/N`.
    pub fn rank(&self) -> usize {
        (self.u0 * self.dim() as f64).round() as usize
    }
}

pub fn projector_from_matrix(p: &CMatrix, q: &Qudit) -> Result<Projector> {
    let n = q.dim();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.nrows(),
        });
    }
    let herm = hermiticity_residual(p);
    if herm > PROJECTOR_TOL {
        return Err(Error::InvalidProjector(format!("not Hermitian (residual {herm:.3e})")));
    }
    let idem = max_abs(&(p * p - p));
    if idem > PROJECTOR_TOL {
        return Err(Error::InvalidProjector(format!("not idempotent (residual {idem:.3e})")));
    }
    let nf = n as f64;
    Ok(Projector {
        u0: p.trace().re / nf,
        u: DVector::from_iterator(q.coords(), q.basis().traces(p).into_iter().map(|t| t.re / nf)),
    })
}

/// A complete set of mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveObservable {
    dim: usize,
    outcomes: Vec<Projector>,
}

impl ProjectiveObservable {
    /// Validates completeness and mutual orthogonality of the reconstructed projectors.
    pub fn new(outcomes: Vec<Projector>, q: &Qudit) -> Result<Self> {
        let n = q.dim();
        if outcomes.is_empty() || outcomes.len() > n {
            return Err(Error::InvalidObservable(format!(
                "{} outcomes for a {n}-level system",
                outcomes.len()
            )));
        }
        for p in &outcomes {
            if p.u.len() != q.coords() {
                return Err(Error::DimensionMismatch {
                    expected: q.coords(),
                    found: p.u.len(),
                });
            }
        }
        let mats: Vec<CMatrix> = outcomes.iter().map(|p| p.matrix(q)).collect();
        for (k, m) in mats.iter().enumerate() {
            let herm = hermiticity_residual(m);
            let idem = max_abs(&(m * m - m));
            if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
                return Err(Error::InvalidObservable(format!(
                    "outcome {k} is not a projector (idempotence residual {idem:.3e})"
                )));
            }
        }
        let u0_sum: f64 = outcomes.iter().map(|p| p.u0).sum();
        if (u0_sum - 1.0).abs() > COMPLETENESS_TOL {
            return Err(Error::InvalidObservable(format!("Σu₀ = {u0_sum}, expected 1")));
        }
        let u_sum = outcomes
            .iter()
            .fold(DVector::zeros(q.coords()), |acc: DVector<f64>, p| acc + &p.u);
        if u_sum.amax() > COMPLETENESS_TOL {
            return Err(Error::InvalidObservable(format!(
                "Σu has component {:.3e}, expected 0",
                u_sum.amax()
            )));
        }
        for j in 0..mats.len() {
            for k in j + 1..mats.len() {
                let overlap = max_abs(&(&mats[j] * &mats[k]));
                if overlap > ORTHOGONALITY_TOL {
                    return Err(Error::InvalidObservable(format!(
                        "outcomes {j} and {k} overlap ({overlap:.3e})"
                    )));
                }
            }
        }
        Ok(Self { dim: n, outcomes })
    }

    pub fn from_projector_matrices(mats: &[CMatrix], q: &Qudit) -> Result<Self> {
        let outcomes = mats
            .iter()
            .map(|m| projector_from_matrix(m, q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes, q)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[Projector] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn matrices(&self, q: &Qudit) -> Vec<CMatrix> {
        self.outcomes.iter().map(|p| p.matrix(q)).collect()
    }

    /// Measurement in the computational basis `{|k⟩}`.
    pub fn computational(q: &Qudit) -> Self {
        let n = q.dim();
        let vectors: Vec<CVector> = (0..n)
            .map(|k| CVector::from_fn(n, |i, _| if i == k { c(1.0) } else { c(0.0) }))
            .collect();
        observable_from_basis(&vectors, q).expect("computational basis is orthonormal")
    }

    /// Fourier basis `|k̃⟩ = Σⱼ e^{2πijk/N}|j⟩/√N`; the Hadamard basis for `N = 2`.
    pub fn fourier(q: &Qudit) -> Self {
        let n = q.dim();
        let amp = 1.0 / (n as f64).sqrt();
        let vectors: Vec<CVector> = (0..n)
            .map(|k| {
                CVector::from_fn(n, |j, _| {
                    let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    Complex64::from_polar(amp, phase)
                })
            })
            .collect();
        observable_from_basis(&vectors, q).expect("Fourier basis is orthonormal")
    }

    /// Rank-one measurement in a random orthonormal basis.
    pub fn random<R: Rng + ?Sized>(q: &Qudit, rng: &mut R) -> Self {
        let vectors = random::orthonormal_basis(q.dim(), rng);
        observable_from_basis(&vectors, q).expect("Gram–Schmidt output is orthonormal")
    }

    /// The same measurement after the basis rotation `U = exp(−iθG)`, `Pₖ ↦ U Pₖ U†`.
    pub fn rotated(&self, q: &Qudit, direction: &CMatrix, theta: f64) -> Result<Self> {
        if hermiticity_residual(direction) > PROJECTOR_TOL {
            return Err(Error::InvalidArgument("rotation direction must be Hermitian".into()));
        }
        let u = unitary_propagator(direction, theta);
        let ud = u.adjoint();
        let mats: Vec<CMatrix> = self.matrices(q).iter().map(|p| &u * p * &ud).collect();
        Self::from_projector_matrices(&mats, q)
    }
}

impl Serialize for ProjectiveObservable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.outcomes.serialize(s)
    }
}

pub fn observable_from_basis(vectors: &[CVector], q: &Qudit) -> Result<ProjectiveObservable> {
    for (j, u) in vectors.iter().enumerate() {
        if u.len() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                found: u.len(),
            });
        }
        for (k, v) in vectors.iter().enumerate() {
            let expected = if j == k { 1.0 } else { 0.0 };
            if (u.dotc(v) - c(expected)).norm() > PROJECTOR_TOL {
                return Err(Error::InvalidObservable(format!(
                    "basis vectors {j} and {k} are not orthonormal"
                )));
            }
        }
    }
    let mats: Vec<CMatrix> = vectors.iter().map(outer).collect();
    ProjectiveObservable::from_projector_matrices(&mats, q)
}

/// `pₖ = u₀⁽ᵏ⁾ + u⁽ᵏ⁾·r`
pub fn outcome_probabilities(obs: &ProjectiveObservable, state: &BlochState) -> Result<Vec<f64>> {
    if obs.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: state.dim(),
        });
    }
    Ok(obs.outcomes.iter().map(|p| p.probability(state)).collect())
}

/// Probability of outcome `k` of `remote` on the second subsystem and the
/// resulting Bloch vector of the first subsystem.
pub fn conditional_state(
    sys: &Bipartite,
    joint: &JointBlochState,
    remote: &ProjectiveObservable,
    k: usize,
) -> Result<(f64, BlochState)> {
    if remote.dim() != sys.dims().1 || joint.dims() != sys.dims() {
        return Err(Error::DimensionMismatch {
            expected: sys.dims().1,
            found: remote.dim(),
        });
    }
    let proj = remote
        .outcomes
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome index {k} out of range 0..{}", remote.len())))?;
    let prob = proj.u0 + proj.u.dot(&joint.r2);
    if prob <= BRANCH_EPS {
        return Err(Error::ZeroProbabilityBranch {
            outcome: k,
            probability: prob,
        });
    }
    let r = (&joint.r1 * proj.u0 + &joint.r12 * &proj.u) / prob;
    Ok((prob, BlochState::new(sys.dims().0, r)?))
}

/// Distribution of `local` on the first subsystem at time `t` after `remote`
/// was measured on the second one at `t = 0`.
pub fn local_distribution(
    sys: &Bipartite,
    joint: &JointBlochState,
    remote: &ProjectiveObservable,
    local: &ProjectiveObservable,
    dynamics: &Dynamics<'_>,
    t: f64,
) -> Result<Vec<f64>> {
    if local.dim() != sys.dims().0 {
        return Err(Error::DimensionMismatch {
            expected: sys.dims().0,
            found: local.dim(),
        });
    }
    let mut dist = vec![0.0; local.len()];
    for k in 0..remote.len() {
        let (prob, cond) = match conditional_state(sys, joint, remote, k) {
            Ok(branch) => branch,
            Err(Error::ZeroProbabilityBranch { .. }) => continue,
            Err(e) => return Err(e),
        };
        let evolved = dynamics.evolve_reduced(sys, Subsystem::First, &cond, t)?;
        for (acc, v) in dist.iter_mut().zip(&local.outcomes) {
            *acc += prob * v.probability(&evolved);
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{to_bloch, DensityMatrix};
    use crate::dynamics::{BlochHamiltonian, EvolutionLaw, IntegratorOptions};
    use crate::linalg::{identity, kron, trace_product};
    use crate::oracle::collapse;
    use crate::random::{hilbert_schmidt, stream_rng};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn rank_one_qubit_projector() {
        let q = Qudit::new(2).unwrap();
        let p = (identity(2) + q.basis().get(2)).scale(0.5);
        let proj = projector_from_matrix(&p, &q).unwrap();
        assert_eq!(proj.u0, 0.5);
        assert!(close(proj.u.as_slice(), &[0.0, 0.0, 0.5], 1e-15));
        assert_eq!(proj.rank(), 1);
        let id = projector_from_matrix(&identity(2), &q).unwrap();
        assert_eq!(id.u0, 1.0);
        assert!(id.u.amax() < 1e-15);
    }

    #[test]
    fn qutrit_rank_two_projector_round_trip() {
        let q = Qudit::new(3).unwrap();
        let p = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]));
        let proj = projector_from_matrix(&p, &q).unwrap();
        assert!((proj.u0 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(proj.rank(), 2);
        let traces = q.basis().traces(&p);
        for (ui, t) in proj.u.iter().zip(traces) {
            assert!((ui - t.re / 3.0).abs() < 1e-15);
        }
        assert!(max_abs(&(proj.matrix(&q) - p)) <= 1e-12);
    }

    #[test]
    fn rejects_non_projectors() {
        let q = Qudit::new(2).unwrap();
        let half = identity(2).scale(0.5);
        assert!(matches!(
            projector_from_matrix(&half, &q),
            Err(Error::InvalidProjector(_))
        ));
        let mut skew = CMatrix::zeros(2, 2);
        skew[(0, 1)] = c(1.0);
        assert!(matches!(
            projector_from_matrix(&skew, &q),
            Err(Error::InvalidProjector(_))
        ));
    }

    #[test]
    fn footnote_constraints_hold_in_our_scaling() {
        // P² = P in coordinates: u₀ = u₀² + (N/2)|u|², uₖ = 2u₀uₖ + (N/2) Σ zᵢⱼₖ uᵢuⱼ
        let mut rng = stream_rng(4, 0);
        for n in 2..=4 {
            let q = Qudit::new(n).unwrap();
            let nf = n as f64;
            let obs = ProjectiveObservable::random(&q, &mut rng);
            for p in obs.outcomes() {
                assert!((p.u0 - p.u0 * p.u0 - nf / 2.0 * p.u.norm_squared()).abs() < 1e-12);
                let k = q.constants();
                for l in 0..q.coords() {
                    let mut quad = Complex64::new(0.0, 0.0);
                    for e in k.z_entries().iter().filter(|e| e.k == l) {
                        quad += Complex64::new(e.g, e.f) * p.u[e.i] * p.u[e.j];
                    }
                    let rhs = 2.0 * p.u0 * p.u[l] + nf / 2.0 * quad.re;
                    assert!((rhs - p.u[l]).abs() < 1e-12 && quad.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn qubit_preset_bases() {
        let q = Qudit::new(2).unwrap();
        let z = ProjectiveObservable::computational(&q);
        assert!(close(z.outcomes()[0].u.as_slice(), &[0.0, 0.0, 0.5], 1e-15));
        assert!(close(z.outcomes()[1].u.as_slice(), &[0.0, 0.0, -0.5], 1e-15));
        let x = ProjectiveObservable::fourier(&q);
        assert!(close(x.outcomes()[0].u.as_slice(), &[0.5, 0.0, 0.0], 1e-15));
        assert!(close(x.outcomes()[1].u.as_slice(), &[-0.5, 0.0, 0.0], 1e-15));
        for o in x.outcomes() {
            assert!((o.u0 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn qutrit_computational_basis_is_complete() {
        let q = Qudit::new(3).unwrap();
        let obs = ProjectiveObservable::computational(&q);
        assert_eq!(obs.len(), 3);
        let sum = obs
            .outcomes()
            .iter()
            .fold(DVector::zeros(8), |a: DVector<f64>, p| a + &p.u);
        assert!(sum.amax() < 1e-15);
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let q = Qudit::new(2).unwrap();
        let v = vec![
            CVector::from_vec(vec![c(1.0), c(0.0)]),
            CVector::from_vec(vec![c(1.0), c(1.0)]),
        ];
        assert!(matches!(
            observable_from_basis(&v, &q),
            Err(Error::InvalidObservable(_))
        ));
    }

    #[test]
    fn incomplete_observable_is_rejected() {
        let q = Qudit::new(3).unwrap();
        let obs = ProjectiveObservable::computational(&q);
        let partial = obs.outcomes()[..2].to_vec();
        assert!(matches!(
            ProjectiveObservable::new(partial, &q),
            Err(Error::InvalidObservable(_))
        ));
    }

    #[test]
    fn coarse_grained_observable_is_allowed() {
        let q = Qudit::new(3).unwrap();
        let mats = [
            CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(1.0), c(0.0)])),
            CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(0.0), c(1.0)])),
        ];
        let obs = ProjectiveObservable::from_projector_matrices(&mats, &q).unwrap();
        assert_eq!(obs.len(), 2);
    }

    #[test]
    fn born_rule_examples() {
        let q = Qudit::new(2).unwrap();
        let mixed = BlochState::zero(2);
        let x = ProjectiveObservable::fourier(&q);
        assert!(close(&outcome_probabilities(&x, &mixed).unwrap(), &[0.5, 0.5], 1e-15));
        let up = BlochState::new(2, DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        let z = ProjectiveObservable::computational(&q);
        assert!(close(&outcome_probabilities(&z, &up).unwrap(), &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn born_rule_matches_trace() {
        let q = Qudit::new(3).unwrap();
        let mut rng = stream_rng(6, 0);
        for _ in 0..20 {
            let rho = DensityMatrix::new(hilbert_schmidt(3, &mut rng)).unwrap();
            let s = to_bloch(&rho, &q).unwrap();
            let obs = ProjectiveObservable::random(&q, &mut rng);
            let probs = outcome_probabilities(&obs, &s).unwrap();
            let oracle: Vec<f64> = obs
                .matrices(&q)
                .iter()
                .map(|p| trace_product(rho.matrix(), p).re)
                .collect();
            assert!(close(&probs, &oracle, 1e-12));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(probs.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
        }
    }

    #[test]
    fn singlet_conditionals() {
        let sys = Bipartite::new(2, 2).unwrap();
        let singlet = sys.singlet().unwrap();
        let z = ProjectiveObservable::computational(sys.second());
        let (p, cond) = conditional_state(&sys, &singlet, &z, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(cond.r().as_slice(), &[0.0, 0.0, -1.0], 1e-14));
        let x = ProjectiveObservable::fourier(sys.second());
        let (p, cond) = conditional_state(&sys, &singlet, &x, 1).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(cond.r().as_slice(), &[1.0, 0.0, 0.0], 1e-14));
        let (_, oracle) = collapse(&sys, &singlet, &x, 1).unwrap();
        assert!(close(cond.r().as_slice(), oracle.r().as_slice(), 1e-11));
    }

    #[test]
    fn product_state_conditionals_equal_marginal() {
        let sys = Bipartite::new(2, 3).unwrap();
        let mut rng = stream_rng(7, 0);
        let rho1 = DensityMatrix::new(hilbert_schmidt(2, &mut rng)).unwrap();
        let rho2 = DensityMatrix::new(hilbert_schmidt(3, &mut rng)).unwrap();
        let joint = sys.coordinates(&kron(rho1.matrix(), rho2.matrix()));
        let obs = ProjectiveObservable::random(sys.second(), &mut rng);
        for k in 0..obs.len() {
            let (_, cond) = conditional_state(&sys, &joint, &obs, k).unwrap();
            assert!((cond.r() - &joint.r1).amax() < 1e-12);
        }
    }

    #[test]
    fn zero_probability_branch() {
        let sys = Bipartite::new(2, 2).unwrap();
        let joint = sys.ground_product().unwrap();
        let z = ProjectiveObservable::computational(sys.second());
        assert!(matches!(
            conditional_state(&sys, &joint, &z, 1),
            Err(Error::ZeroProbabilityBranch { outcome: 1, .. })
        ));
        let law = EvolutionLaw::Linear;
        let h = BlochHamiltonian::zero(&sys);
        let dynamics = Dynamics::new(&law, &h, IntegratorOptions::default());
        let local = ProjectiveObservable::computational(sys.first());
        let dist = local_distribution(&sys, &joint, &z, &local, &dynamics, 0.5).unwrap();
        assert!(close(&dist, &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn local_distribution_at_time_zero_is_born_marginal() {
        let sys = Bipartite::new(2, 3).unwrap();
        let mut rng = stream_rng(10, 0);
        let joint = sys.random_interior(0.2, &mut rng);
        let remote = ProjectiveObservable::random(sys.second(), &mut rng);
        let local = ProjectiveObservable::random(sys.first(), &mut rng);
        let law = EvolutionLaw::Linear;
        let h = BlochHamiltonian::random(&sys, 1.0, &mut rng);
        let dynamics = Dynamics::new(&law, &h, IntegratorOptions::default());
        let dist = local_distribution(&sys, &joint, &remote, &local, &dynamics, 0.0).unwrap();
        let marginal = BlochState::new(2, joint.r1.clone()).unwrap();
        let expected = outcome_probabilities(&local, &marginal).unwrap();
        assert!(close(&dist, &expected, 1e-14));
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let q = Qudit::new(3).unwrap();
        let obs = ProjectiveObservable::fourier(&q);
        let rot = obs.rotated(&q, q.basis().get(3), 0.0).unwrap();
        for (a, b) in obs.outcomes().iter().zip(rot.outcomes()) {
            assert!((&a.u - &b.u).amax() < 1e-14);
        }
    }
}
