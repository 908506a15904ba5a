//! Bloch coordinates of single and bipartite states.
//!
//! ```text
//! ρ   = (1/N)(I + r·σ)                                  rᵢ    = (N/2) Tr(ρ σᵢ)
//! ρ₁₂ = (1/N₁N₂)(I + r1·σ⊗I + I⊗r2·λ + Σ r12ᵢⱼ σᵢ⊗λⱼ)     r12ᵢⱼ = (N₁N₂/4) Tr(ρ σᵢ⊗λⱼ)
//! ```
//!
//! Physicality is always decided on the reconstructed matrix (minimum
//! eigenvalue), never from the norm of `r`: for `N > 2` the set of valid Bloch
//! vectors is a proper subset of the ball.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermiticity_residual, identity, kron, min_eigenvalue, outer, trace_out_first, trace_out_second, trace_product,
    CMatrix, CVector,
};
use crate::random;
use crate::su_basis::Qudit;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// A matrix counts as positive semidefinite when its smallest eigenvalue is at least `−PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "matrix is {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_residual(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -PSD_TOL {
            return Err(Error::Unphysical { min_eigenvalue: min });
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        Self::new(outer(&(psi / Complex64::new(norm, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }
}

/// Bloch vector of a single `N`-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochState {
    dim: usize,
    r: DVector<f64>,
}

impl BlochState {
    pub fn new(dim: usize, r: DVector<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if r.len() != dim * dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim - 1,
                found: r.len(),
            });
        }
        Ok(Self { dim, r })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            r: DVector::zeros(dim * dim - 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> &DVector<f64> {
        &self.r
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.r
    }

    /// `(1/N)(I + r·σ)` without a physicality check.
    pub fn matrix(&self, q: &Qudit) -> CMatrix {
        let n = self.dim as f64;
        (identity(self.dim) + q.basis().combine(self.r.as_slice())).scale(1.0 / n)
    }
}

/// Bloch coordinates `(r1, r2, r12)` of a bipartite `N₁ × N₂` system.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBlochState {
    dims: (usize, usize),
    pub r1: DVector<f64>,
    pub r2: DVector<f64>,
    pub r12: DMatrix<f64>,
}

impl JointBlochState {
    pub fn new(dims: (usize, usize), r1: DVector<f64>, r2: DVector<f64>, r12: DMatrix<f64>) -> Result<Self> {
        let (d1, d2) = coord_counts(dims)?;
        for (expected, found) in [(d1, r1.len()), (d2, r2.len()), (d1, r12.nrows()), (d2, r12.ncols())] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(Self { dims, r1, r2, r12 })
    }

    pub fn zero(dims: (usize, usize)) -> Self {
        let (d1, d2) = (dims.0 * dims.0 - 1, dims.1 * dims.1 - 1);
        Self {
            dims,
            r1: DVector::zeros(d1),
            r2: DVector::zeros(d2),
            r12: DMatrix::zeros(d1, d2),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Length of the flattened coordinate vector `d1 + d2 + d1·d2`.
    pub fn flat_len(&self) -> usize {
        let (d1, d2) = (self.r1.len(), self.r2.len());
        d1 + d2 + d1 * d2
    }

    /// `[r1, r2, r12 (row-major)]`
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.write_flat(&mut out);
        out
    }

    pub fn write_flat(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.r1.iter());
        out.extend(self.r2.iter());
        for i in 0..self.r12.nrows() {
            for j in 0..self.r12.ncols() {
                out.push(self.r12[(i, j)]);
            }
        }
    }

    pub fn from_flat(dims: (usize, usize), flat: &[f64]) -> Result<Self> {
        let (d1, d2) = coord_counts(dims)?;
        if flat.len() != d1 + d2 + d1 * d2 {
            return Err(Error::DimensionMismatch {
                expected: d1 + d2 + d1 * d2,
                found: flat.len(),
            });
        }
        Ok(Self {
            dims,
            r1: DVector::from_column_slice(&flat[..d1]),
            r2: DVector::from_column_slice(&flat[d1..d1 + d2]),
            r12: DMatrix::from_row_slice(d1, d2, &flat[d1 + d2..]),
        })
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.r1
            .iter()
            .chain(self.r2.iter())
            .chain(self.r12.iter())
            .all(|x| x.is_finite())
    }
}

fn coord_counts(dims: (usize, usize)) -> Result<(usize, usize)> {
    for n in [dims.0, dims.1] {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
    }
    Ok((dims.0 * dims.0 - 1, dims.1 * dims.1 - 1))
}

/// Generator sets of both subsystems and the embedded operators `σᵢ⊗I`, `I⊗λⱼ`, `σᵢ⊗λⱼ`.
#[derive(Debug, Clone)]
pub struct Bipartite {
    first: Qudit,
    second: Qudit,
    embedded_first: Vec<CMatrix>,
    embedded_second: Vec<CMatrix>,
    /// Row-major over `(i, j)`.
    embedded_cross: Vec<CMatrix>,
}

impl Bipartite {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        let first = Qudit::new(n1)?;
        let second = Qudit::new(n2)?;
        let id1 = identity(n1);
        let id2 = identity(n2);
        let embedded_first = first.basis().generators().iter().map(|s| kron(s, &id2)).collect();
        let embedded_second = second.basis().generators().iter().map(|l| kron(&id1, l)).collect();
        let mut embedded_cross = Vec::with_capacity(first.coords() * second.coords());
        for s in first.basis().generators() {
            for l in second.basis().generators() {
                embedded_cross.push(kron(s, l));
            }
        }
        Ok(Self {
            first,
            second,
            embedded_first,
            embedded_second,
            embedded_cross,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.first.dim(), self.second.dim())
    }

    pub fn joint_dim(&self) -> usize {
        self.first.dim() * self.second.dim()
    }

    /// `(d1, d2)` with `dₖ = Nₖ² − 1`.
    pub fn coords(&self) -> (usize, usize) {
        (self.first.coords(), self.second.coords())
    }

    pub fn flat_len(&self) -> usize {
        let (d1, d2) = self.coords();
        d1 + d2 + d1 * d2
    }

    pub fn first(&self) -> &Qudit {
        &self.first
    }

    pub fn second(&self) -> &Qudit {
        &self.second
    }

    pub fn qudit(&self, which: Subsystem) -> &Qudit {
        match which {
            Subsystem::First => &self.first,
            Subsystem::Second => &self.second,
        }
    }

    pub fn embedded_first(&self, i: usize) -> &CMatrix {
        &self.embedded_first[i]
    }

    pub fn embedded_second(&self, j: usize) -> &CMatrix {
        &self.embedded_second[j]
    }

    pub fn embedded_cross(&self, i: usize, j: usize) -> &CMatrix {
        &self.embedded_cross[i * self.second.coords() + j]
    }

    /// Linear coordinate extraction; applies to any operator, traceless or not.
    pub fn coordinates(&self, m: &CMatrix) -> JointBlochState {
        let (n1, n2) = self.dims();
        let (d1, d2) = self.coords();
        let s1 = n1 as f64 / 2.0;
        let s2 = n2 as f64 / 2.0;
        let s12 = (n1 * n2) as f64 / 4.0;
        let r1 = DVector::from_fn(d1, |i, _| s1 * trace_product(m, &self.embedded_first[i]).re);
        let r2 = DVector::from_fn(d2, |j, _| s2 * trace_product(m, &self.embedded_second[j]).re);
        let r12 = DMatrix::from_fn(d1, d2, |i, j| {
            s12 * trace_product(m, &self.embedded_cross[i * d2 + j]).re
        });
        JointBlochState {
            dims: (n1, n2),
            r1,
            r2,
            r12,
        }
    }

    /// Traceless part `r1·σ⊗I + I⊗r2·λ + Σ r12ᵢⱼ σᵢ⊗λⱼ` of `N₁N₂·ρ`.
    pub fn traceless_operator(&self, s: &JointBlochState) -> CMatrix {
        let d = self.joint_dim();
        let mut out = CMatrix::zeros(d, d);
        for (x, op) in s.r1.iter().zip(&self.embedded_first) {
            if *x != 0.0 {
                out += op.scale(*x);
            }
        }
        for (x, op) in s.r2.iter().zip(&self.embedded_second) {
            if *x != 0.0 {
                out += op.scale(*x);
            }
        }
        let d2 = self.second.coords();
        for i in 0..s.r12.nrows() {
            for j in 0..d2 {
                let x = s.r12[(i, j)];
                if x != 0.0 {
                    out += self.embedded_cross[i * d2 + j].scale(x);
                }
            }
        }
        out
    }

    /// Reconstructed joint matrix without a physicality check.
    pub fn matrix(&self, s: &JointBlochState) -> CMatrix {
        let d = self.joint_dim();
        (identity(d) + self.traceless_operator(s)).scale(1.0 / d as f64)
    }

    fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if dims != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.joint_dim(),
                found: dims.0 * dims.1,
            });
        }
        Ok(())
    }

    /// Two-qubit singlet `(|01⟩ − |10⟩)/√2`.
    pub fn singlet(&self) -> Result<JointBlochState> {
        if self.dims() != (2, 2) {
            return Err(Error::InvalidArgument("the singlet is defined for two qubits".into()));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![c(0.0), c(h), c(-h), c(0.0)]);
        joint_to_bloch(&DensityMatrix::pure(&psi)?, self)
    }

    /// `Σᵢ |ii⟩/√N` for `N₁ = N₂ = N`.
    pub fn maximally_entangled(&self) -> Result<JointBlochState> {
        let (n1, n2) = self.dims();
        if n1 != n2 {
            return Err(Error::InvalidArgument(
                "maximally entangled state needs equal dimensions".into(),
            ));
        }
        let amp = 1.0 / (n1 as f64).sqrt();
        let psi = CVector::from_fn(n1 * n2, |k, _| if k % (n2 + 1) == 0 { c(amp) } else { c(0.0) });
        joint_to_bloch(&DensityMatrix::pure(&psi)?, self)
    }

    /// `ρ₁ ⊗ ρ₂`
    pub fn product(&self, s1: &BlochState, s2: &BlochState) -> Result<JointBlochState> {
        if s1.dim() != self.first.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.first.dim(),
                found: s1.dim(),
            });
        }
        if s2.dim() != self.second.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.second.dim(),
                found: s2.dim(),
            });
        }
        Ok(JointBlochState {
            dims: self.dims(),
            r1: s1.r().clone(),
            r2: s2.r().clone(),
            r12: s1.r() * s2.r().transpose(),
        })
    }

    /// `|0⟩⟨0| ⊗ |0⟩⟨0|`
    pub fn ground_product(&self) -> Result<JointBlochState> {
        let (n1, n2) = self.dims();
        let ground = |n: usize| {
            let mut v = CVector::zeros(n);
            v[0] = c(1.0);
            v
        };
        let s1 = to_bloch(&DensityMatrix::pure(&ground(n1))?, &self.first)?;
        let s2 = to_bloch(&DensityMatrix::pure(&ground(n2))?, &self.second)?;
        self.product(&s1, &s2)
    }

    /// Full-rank random state: Hilbert–Schmidt sample mixed with `I/(N₁N₂)` at weight `mix`.
    pub fn random_interior<R: Rng + ?Sized>(&self, mix: f64, rng: &mut R) -> JointBlochState {
        let rho = random::interior_state(self.joint_dim(), mix, rng);
        self.coordinates(&rho)
    }

    /// Hilbert–Schmidt random joint state.
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R) -> JointBlochState {
        self.random_interior(0.0, rng)
    }
}

pub fn to_bloch(rho: &DensityMatrix, q: &Qudit) -> Result<BlochState> {
    if rho.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: rho.dim(),
        });
    }
    Ok(bloch_coordinates(rho.matrix(), q))
}

/// `rᵢ = (N/2) Re Tr(m σᵢ)` for any square matrix of the right size.
pub fn bloch_coordinates(m: &CMatrix, q: &Qudit) -> BlochState {
    let scale = q.dim() as f64 / 2.0;
    let r = DVector::from_iterator(q.coords(), q.basis().traces(m).into_iter().map(|t| scale * t.re));
    BlochState { dim: q.dim(), r }
}

pub fn from_bloch(state: &BlochState, q: &Qudit) -> Result<DensityMatrix> {
    if state.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: state.dim(),
        });
    }
    let m = state.matrix(q);
    let min = min_eigenvalue(&m);
    if min < -PSD_TOL {
        return Err(Error::Unphysical { min_eigenvalue: min });
    }
    Ok(DensityMatrix { matrix: m })
}

pub fn joint_to_bloch(rho: &DensityMatrix, sys: &Bipartite) -> Result<JointBlochState> {
    if rho.dim() != sys.joint_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.joint_dim(),
            found: rho.dim(),
        });
    }
    Ok(sys.coordinates(rho.matrix()))
}

pub fn joint_from_bloch(state: &JointBlochState, sys: &Bipartite) -> Result<DensityMatrix> {
    sys.check_dims(state.dims())?;
    let m = sys.matrix(state);
    let min = min_eigenvalue(&m);
    if min < -PSD_TOL {
        return Err(Error::Unphysical { min_eigenvalue: min });
    }
    Ok(DensityMatrix { matrix: m })
}

pub fn reduce(state: &JointBlochState, which: Subsystem) -> BlochState {
    match which {
        Subsystem::First => BlochState {
            dim: state.dims.0,
            r: state.r1.clone(),
        },
        Subsystem::Second => BlochState {
            dim: state.dims.1,
            r: state.r2.clone(),
        },
    }
}

/// Matrix-route reduction: reconstruct, partial trace, convert back.
pub fn reduce_by_partial_trace(state: &JointBlochState, sys: &Bipartite, which: Subsystem) -> BlochState {
    let (n1, n2) = sys.dims();
    let m = sys.matrix(state);
    match which {
        Subsystem::First => bloch_coordinates(&trace_out_second(&m, n1, n2), sys.first()),
        Subsystem::Second => bloch_coordinates(&trace_out_first(&m, n1, n2), sys.second()),
    }
}

/// `Tr(ρ²) = (1/N)(1 + 2|r|²/N)`
pub fn purity(state: &BlochState) -> f64 {
    let n = state.dim as f64;
    (1.0 + 2.0 * state.r.norm_squared() / n) / n
}

// JSON layouts: {"dims":[N],"r":[...]} and {"dims":[N1,N2],"r1":[...],"r2":[...],"r12":[[...]]}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlochJson {
    dims: Vec<usize>,
    r: Vec<f64>,
}

impl Serialize for BlochState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlochJson {
            dims: vec![self.dim],
            r: self.r.iter().copied().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlochState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BlochJson::deserialize(d)?;
        let [n] = raw.dims[..] else {
            return Err(D::Error::custom("dims must hold exactly one entry"));
        };
        BlochState::new(n, DVector::from_vec(raw.r)).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointJson {
    dims: Vec<usize>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r12: Vec<Vec<f64>>,
}

impl Serialize for JointBlochState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JointJson {
            dims: vec![self.dims.0, self.dims.1],
            r1: self.r1.iter().copied().collect(),
            r2: self.r2.iter().copied().collect(),
            r12: self.r12.row_iter().map(|row| row.iter().copied().collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointBlochState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = JointJson::deserialize(d)?;
        let [n1, n2] = raw.dims[..] else {
            return Err(D::Error::custom("dims must hold exactly two entries"));
        };
        let (d1, d2) = coord_counts((n1, n2)).map_err(D::Error::custom)?;
        if raw.r12.len() != d1 || raw.r12.iter().any(|row| row.len() != d2) {
            return Err(D::Error::custom(format!("r12 must be {d1}×{d2}")));
        }
        let flat: Vec<f64> = raw.r12.into_iter().flatten().collect();
        JointBlochState::new(
            (n1, n2),
            DVector::from_vec(raw.r1),
            DVector::from_vec(raw.r2),
            DMatrix::from_row_slice(d1, d2, &flat),
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::random::{hilbert_schmidt, stream_rng};

    fn qubit() -> Qudit {
        Qudit::new(2).unwrap()
    }

    #[test]
    fn maximally_mixed_has_zero_vector() {
        for n in 2..=4 {
            let q = Qudit::new(n).unwrap();
            let s = to_bloch(&DensityMatrix::maximally_mixed(n), &q).unwrap();
            assert!(s.r().amax() < 1e-15);
            let back = from_bloch(&BlochState::zero(n), &q).unwrap();
            assert!(max_abs(&(back.matrix() - identity(n).scale(1.0 / n as f64))) < 1e-15);
        }
    }

    #[test]
    fn qubit_ground_state_points_up() {
        let q = qubit();
        let psi = CVector::from_vec(vec![c(1.0), c(0.0)]);
        let s = to_bloch(&DensityMatrix::pure(&psi).unwrap(), &q).unwrap();
        assert_eq!(s.r().as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn plus_state_from_x_axis() {
        let q = qubit();
        let s = BlochState::new(2, DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let rho = from_bloch(&s, &q).unwrap();
        let expected = CMatrix::from_element(2, 2, c(0.5));
        assert!(max_abs(&(rho.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn outside_ball_is_unphysical() {
        let s = BlochState::new(2, DVector::from_vec(vec![0.0, 0.0, 2.0])).unwrap();
        match from_bloch(&s, &qubit()) {
            Err(Error::Unphysical { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("expected unphysical-state error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let q = Qudit::new(3).unwrap();
        assert!(matches!(
            to_bloch(&DensityMatrix::maximally_mixed(2), &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn qutrit_round_trip() {
        let q = Qudit::new(3).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..20 {
            let rho = DensityMatrix::new(hilbert_schmidt(3, &mut rng)).unwrap();
            let back = from_bloch(&to_bloch(&rho, &q).unwrap(), &q).unwrap();
            assert!(max_abs(&(back.matrix() - rho.matrix())) <= 1e-12);
        }
    }

    #[test]
    fn singlet_coordinates() {
        let sys = Bipartite::new(2, 2).unwrap();
        let s = sys.singlet().unwrap();
        assert!(s.r1.amax() < 1e-15 && s.r2.amax() < 1e-15);
        assert!((&s.r12 + DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
        let rho = joint_from_bloch(&s, &sys).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_identity_correlations_are_unphysical() {
        let sys = Bipartite::new(2, 2).unwrap();
        let mut s = JointBlochState::zero((2, 2));
        s.r12 = DMatrix::identity(3, 3);
        match joint_from_bloch(&s, &sys) {
            Err(Error::Unphysical { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("expected unphysical-state error, got {other:?}"),
        }
    }

    #[test]
    fn zero_blocks_give_maximally_mixed() {
        let sys = Bipartite::new(2, 3).unwrap();
        let rho = joint_from_bloch(&JointBlochState::zero((2, 3)), &sys).unwrap();
        assert!(max_abs(&(rho.matrix() - identity(6).scale(1.0 / 6.0))) < 1e-15);
        let back = joint_to_bloch(&rho, &sys).unwrap();
        assert!(back.to_flat().iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn product_state_factorizes() {
        let sys = Bipartite::new(2, 3).unwrap();
        let mut rng = stream_rng(5, 0);
        let rho1 = DensityMatrix::new(hilbert_schmidt(2, &mut rng)).unwrap();
        let rho2 = DensityMatrix::new(hilbert_schmidt(3, &mut rng)).unwrap();
        let joint = DensityMatrix::new(kron(rho1.matrix(), rho2.matrix())).unwrap();
        let s = joint_to_bloch(&joint, &sys).unwrap();
        let outer = &s.r1 * s.r2.transpose();
        assert!((&s.r12 - outer).amax() <= 1e-12);
        assert_eq!(reduce(&s, Subsystem::First).r(), &s.r1);
        let s1 = to_bloch(&rho1, sys.first()).unwrap();
        assert!((s.r1.clone() - s1.r()).amax() <= 1e-12);
    }

    #[test]
    fn reduce_matches_partial_trace() {
        let mut rng = stream_rng(8, 0);
        for dims in [(2, 2), (2, 3), (3, 3)] {
            let sys = Bipartite::new(dims.0, dims.1).unwrap();
            for _ in 0..10 {
                let s = sys.random_state(&mut rng);
                for which in [Subsystem::First, Subsystem::Second] {
                    let fast = reduce(&s, which);
                    let slow = reduce_by_partial_trace(&s, &sys, which);
                    assert!((fast.r() - slow.r()).amax() <= 1e-12);
                }
            }
        }
        let sys = Bipartite::new(2, 2).unwrap();
        assert!(reduce(&sys.singlet().unwrap(), Subsystem::First).r().amax() < 1e-15);
    }

    #[test]
    fn purity_formula() {
        assert!((purity(&BlochState::zero(3)) - 1.0 / 3.0).abs() < 1e-15);
        let up = BlochState::new(2, DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        assert!((purity(&up) - 1.0).abs() < 1e-15);
        let q = Qudit::new(3).unwrap();
        let mut rng = stream_rng(2, 0);
        let rho = DensityMatrix::new(hilbert_schmidt(3, &mut rng)).unwrap();
        let s = to_bloch(&rho, &q).unwrap();
        assert!((purity(&s) - rho.purity()).abs() <= 1e-12);
        let pure_norm = s.r().norm_squared() <= 3.0 + 1e-10;
        assert!(pure_norm);
    }

    #[test]
    fn json_layout() {
        let sys = Bipartite::new(2, 2).unwrap();
        let s = sys.singlet().unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"dims":[2,2],"r1":["#));
        let back: JointBlochState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"dims":[2,2],"r1":[0,0,0],"r2":[0,0,0],"r12":[[0,0],[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<JointBlochState>(bad).is_err());
    }
}
