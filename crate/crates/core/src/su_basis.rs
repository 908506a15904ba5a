//! Generalized Gell-Mann generators of `SU(N)` and their structure constants.
//!
//! Generators are normalized as `Tr(σᵢσⱼ) = 2δᵢⱼ` and ordered the way the
//! Gell-Mann matrices are numbered: for every column `k = 1..N−1` the
//! symmetric/antisymmetric pairs `(j, k)` with `j < k`, followed by the
//! diagonal generator supported on the first `k + 1` levels. For `N = 2` this
//! gives `(σx, σy, σz)`; for `N = 3` it gives `λ₁ … λ₈`.
//!
//! Structure constants come from traces,
//!
//! ```text
//! fᵢⱼₖ = Tr([σᵢ,σⱼ]σₖ) / 4i        gᵢⱼₖ = Tr({σᵢ,σⱼ}σₖ) / 4
//! ```
//!
//! so that `σᵢσⱼ = (2/N)δᵢⱼ I + Σₖ zᵢⱼₖ σₖ` with `zᵢⱼₖ = gᵢⱼₖ + i fᵢⱼₖ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, trace_product, CMatrix, I};

/// Entries below this magnitude are treated as structural zeros in the sparse views.
const SPARSITY_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, `N² − 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> &CMatrix {
        &self.generators[i]
    }

    /// `Σᵢ xᵢ σᵢ`
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (x, g) in coeffs.iter().zip(&self.generators) {
            if *x != 0.0 {
                out += g.scale(*x);
            }
        }
        out
    }

    /// `Tr(A σᵢ)` for every generator.
    pub fn traces(&self, a: &CMatrix) -> Vec<Complex64> {
        self.generators.iter().map(|g| trace_product(a, g)).collect()
    }

    /// Gram matrix `Tr(σᵢσⱼ)`.
    pub fn gram(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        nalgebra::DMatrix::from_fn(n, n, |i, j| trace_product(&self.generators[i], &self.generators[j]).re)
    }
}

/// Builds the canonical generalized Gell-Mann set for `SU(n)`.
pub fn build_generators(n: usize) -> Result<GeneratorSet> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mut generators = Vec::with_capacity(n * n - 1);
    for k in 1..n {
        for j in 0..k {
            let mut sym = CMatrix::zeros(n, n);
            sym[(j, k)] = c(1.0);
            sym[(k, j)] = c(1.0);
            generators.push(sym);

            let mut anti = CMatrix::zeros(n, n);
            anti[(j, k)] = -I;
            anti[(k, j)] = I;
            generators.push(anti);
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(n, n);
        for l in 0..k {
            diag[(l, l)] = c(norm);
        }
        diag[(k, k)] = c(-(k as f64) * norm);
        generators.push(diag);
    }
    Ok(GeneratorSet { dim: n, generators })
}

/// One nonzero entry of a rank-3 structure tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// One entry of `z = g + i f` with at least one nonzero part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub g: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureConstants {
    dim: usize,
    #[serde(skip)]
    len: usize,
    /// Row-major `f[i][j][k]`.
    f: Vec<f64>,
    /// Row-major `g[i][j][k]`.
    g: Vec<f64>,
    #[serde(skip)]
    f_sparse: Vec<Entry>,
    #[serde(skip)]
    z_sparse: Vec<ZEntry>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.len + j) * self.len + k
    }

    pub fn f(&self, i: usize, j: usize, k: usize) -> f64 {
        self.f[self.idx(i, j, k)]
    }

    pub fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        self.g[self.idx(i, j, k)]
    }

    /// `zᵢⱼₖ = gᵢⱼₖ + i fᵢⱼₖ`
    pub fn z(&self, i: usize, j: usize, k: usize) -> Complex64 {
        Complex64::new(self.g(i, j, k), self.f(i, j, k))
    }

    /// Nonzero entries of `f`, in row-major order.
    pub fn f_entries(&self) -> &[Entry] {
        &self.f_sparse
    }

    /// Entries where `z` is nonzero, in row-major order.
    pub fn z_entries(&self) -> &[ZEntry] {
        &self.z_sparse
    }

    /// `f` as nested arrays `[i][j][k]`.
    pub fn f_nested(&self) -> Vec<Vec<Vec<f64>>> {
        self.nested(&self.f)
    }

    /// `g` as nested arrays `[i][j][k]`.
    pub fn g_nested(&self) -> Vec<Vec<Vec<f64>>> {
        self.nested(&self.g)
    }

    fn nested(&self, flat: &[f64]) -> Vec<Vec<Vec<f64>>> {
        flat.chunks(self.len * self.len)
            .map(|plane| plane.chunks(self.len).map(<[f64]>::to_vec).collect())
            .collect()
    }
}

pub fn structure_constants(basis: &GeneratorSet) -> StructureConstants {
    let len = basis.len();
    let mut f = vec![0.0; len * len * len];
    let mut g = vec![0.0; len * len * len];
    for i in 0..len {
        for j in 0..len {
            let prod = basis.get(i) * basis.get(j);
            let rev = basis.get(j) * basis.get(i);
            let comm = &prod - &rev;
            let anti = &prod + &rev;
            for k in 0..len {
                let idx = (i * len + j) * len + k;
                f[idx] = (trace_product(&comm, basis.get(k)) / (I * 4.0)).re;
                g[idx] = trace_product(&anti, basis.get(k)).re / 4.0;
            }
        }
    }
    let mut f_sparse = Vec::new();
    let mut z_sparse = Vec::new();
    for i in 0..len {
        for j in 0..len {
            for k in 0..len {
                let idx = (i * len + j) * len + k;
                let (fv, gv) = (f[idx], g[idx]);
                let fv = if fv.abs() < SPARSITY_CUTOFF { 0.0 } else { fv };
                let gv = if gv.abs() < SPARSITY_CUTOFF { 0.0 } else { gv };
                if fv != 0.0 {
                    f_sparse.push(Entry { i, j, k, value: fv });
                }
                if fv != 0.0 || gv != 0.0 {
                    z_sparse.push(ZEntry { i, j, k, g: gv, f: fv });
                }
            }
        }
    }
    StructureConstants {
        dim: basis.dim(),
        len,
        f,
        g,
        f_sparse,
        z_sparse,
    }
}

/// Generators of one subsystem together with their structure constants.
#[derive(Debug, Clone)]
pub struct Qudit {
    basis: GeneratorSet,
    constants: StructureConstants,
}

impl Qudit {
    pub fn new(n: usize) -> Result<Self> {
        let basis = build_generators(n)?;
        let constants = structure_constants(&basis);
        Ok(Self { basis, constants })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Number of Bloch coordinates, `N² − 1`.
    pub fn coords(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &GeneratorSet {
        &self.basis
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn identity(&self) -> CMatrix {
        identity(self.dim())
    }
}
