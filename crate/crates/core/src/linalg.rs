//! Dense complex matrix helpers shared by the state, measurement and oracle code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry of `|A|`.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let herm = (a + a.adjoint()).scale(0.5);
    let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a)[0]
}

/// `exp(−i·t·H)` for Hermitian `H`, through its eigendecomposition.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let q = &eig.eigenvectors;
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| (-I * e * t).exp()),
    );
    q * CMatrix::from_diagonal(&phases) * q.adjoint()
}

/// Partial trace of an `(n1·n2)`-dimensional operator over the second factor.
pub fn trace_out_second(rho: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n1, n1, |a, b| (0..n2).map(|k| rho[(a * n2 + k, b * n2 + k)]).sum())
}

/// Partial trace of an `(n1·n2)`-dimensional operator over the first factor.
pub fn trace_out_first(rho: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n2, n2, |a, b| (0..n1).map(|k| rho[(k * n2 + a, k * n2 + b)]).sum())
}

/// `|v⟩⟨v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
