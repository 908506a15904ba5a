//! Seeded random ensembles: Hilbert–Schmidt states, Haar-like bases, Hermitian directions.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{identity, CMatrix, CVector};

/// Deterministic generator for ensemble member `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Hilbert–Schmidt random density matrix `GG†/Tr(GG†)`.
pub fn hilbert_schmidt<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace();
    gg / tr
}

/// Hilbert–Schmidt state mixed with `I/n` at weight `mix`; full rank whenever `mix > 0`.
pub fn interior_state<R: Rng + ?Sized>(n: usize, mix: f64, rng: &mut R) -> CMatrix {
    hilbert_schmidt(n, rng).scale(1.0 - mix) + identity(n).scale(mix / n as f64)
}

/// Random orthonormal basis (columns of a Gram–Schmidt orthonormalized Ginibre matrix).
pub fn orthonormal_basis<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<CVector> {
    let g = ginibre(n, rng);
    let mut out: Vec<CVector> = Vec::with_capacity(n);
    for col in 0..n {
        let mut v: CVector = g.column(col).into_owned();
        for u in &out {
            let overlap = u.dotc(&v);
            v -= u * overlap;
        }
        let norm = v.norm();
        out.push(v / Complex64::new(norm, 0.0));
    }
    out
}

/// Random pure state vector.
pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(n, |_, _| Complex64::new(normal(rng), normal(rng)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Random real vector with standard normal entries scaled by `scale`.
pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| scale * normal(rng)).collect()
}

/// Unit-norm random direction.
pub fn unit_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let v = gaussian_vector(len, 1.0, rng);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}
