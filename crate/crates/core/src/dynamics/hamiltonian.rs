use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::{Bipartite, Subsystem};
use crate::error::{Error, Result};
use crate::linalg::{identity, CMatrix};
use crate::random::gaussian_vector;

/// `H = H0·I + H1·(σ⊗I) + H2·(I⊗λ) + Σ H12ᵢⱼ σᵢ⊗λⱼ` (units with ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BlochHamiltonian {
    dims: (usize, usize),
    pub h0: f64,
    pub h1: DVector<f64>,
    pub h2: DVector<f64>,
    pub h12: DMatrix<f64>,
}

impl BlochHamiltonian {
    pub fn new(sys: &Bipartite, h0: f64, h1: DVector<f64>, h2: DVector<f64>, h12: DMatrix<f64>) -> Result<Self> {
        let (d1, d2) = sys.coords();
        for (expected, found) in [(d1, h1.len()), (d2, h2.len()), (d1, h12.nrows()), (d2, h12.ncols())] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let all = std::iter::once(&h0).chain(h1.iter()).chain(h2.iter()).chain(h12.iter());
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Hamiltonian coefficients must be finite".into()));
        }
        Ok(Self {
            dims: sys.dims(),
            h0,
            h1,
            h2,
            h12,
        })
    }

    pub fn zero(sys: &Bipartite) -> Self {
        let (d1, d2) = sys.coords();
        Self {
            dims: sys.dims(),
            h0: 0.0,
            h1: DVector::zeros(d1),
            h2: DVector::zeros(d2),
            h12: DMatrix::zeros(d1, d2),
        }
    }

    /// Interaction-free Hamiltonian `H1·(σ⊗I) + H2·(I⊗λ)`.
    pub fn local(sys: &Bipartite, h1: DVector<f64>, h2: DVector<f64>) -> Result<Self> {
        let (d1, d2) = sys.coords();
        Self::new(sys, 0.0, h1, h2, DMatrix::zeros(d1, d2))
    }

    /// Gaussian coefficients with standard deviation `scale` in every block.
    pub fn random<R: Rng + ?Sized>(sys: &Bipartite, scale: f64, rng: &mut R) -> Self {
        let (d1, d2) = sys.coords();
        Self {
            dims: sys.dims(),
            h0: 0.0,
            h1: DVector::from_vec(gaussian_vector(d1, scale, rng)),
            h2: DVector::from_vec(gaussian_vector(d2, scale, rng)),
            h12: DMatrix::from_vec(d1, d2, gaussian_vector(d1 * d2, scale, rng)),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn local_field(&self, which: Subsystem) -> &DVector<f64> {
        match which {
            Subsystem::First => &self.h1,
            Subsystem::Second => &self.h2,
        }
    }

    /// True iff every `H12ᵢⱼ` is exactly zero.
    pub fn is_interaction_free(&self) -> bool {
        self.h12.iter().all(|x| *x == 0.0)
    }

    /// The same Hamiltonian with `H12` removed.
    pub fn local_part(&self) -> Self {
        Self {
            h12: DMatrix::zeros(self.h12.nrows(), self.h12.ncols()),
            ..self.clone()
        }
    }

    pub fn matrix(&self, sys: &Bipartite) -> CMatrix {
        let d = sys.joint_dim();
        let mut h = identity(d).scale(self.h0);
        for (i, x) in self.h1.iter().enumerate() {
            h += sys.embedded_first(i).scale(*x);
        }
        for (j, x) in self.h2.iter().enumerate() {
            h += sys.embedded_second(j).scale(*x);
        }
        for i in 0..self.h12.nrows() {
            for j in 0..self.h12.ncols() {
                let x = self.h12[(i, j)];
                if x != 0.0 {
                    h += sys.embedded_cross(i, j).scale(x);
                }
            }
        }
        h
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianJson {
    #[serde(rename = "H0", default)]
    h0: f64,
    #[serde(rename = "H1")]
    h1: Vec<f64>,
    #[serde(rename = "H2")]
    h2: Vec<f64>,
    #[serde(rename = "H12")]
    h12: Vec<Vec<f64>>,
}

fn levels(coords: usize) -> Option<usize> {
    let n = ((coords + 1) as f64).sqrt().round() as usize;
    (n >= 2 && n * n == coords + 1).then_some(n)
}

impl Serialize for BlochHamiltonian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HamiltonianJson {
            h0: self.h0,
            h1: self.h1.iter().copied().collect(),
            h2: self.h2.iter().copied().collect(),
            h12: self.h12.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlochHamiltonian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = HamiltonianJson::deserialize(d)?;
        let n1 = levels(raw.h1.len()).ok_or_else(|| D::Error::custom("H1 length must be N²−1 for some N ≥ 2"))?;
        let n2 = levels(raw.h2.len()).ok_or_else(|| D::Error::custom("H2 length must be N²−1 for some N ≥ 2"))?;
        let (d1, d2) = (raw.h1.len(), raw.h2.len());
        if raw.h12.len() != d1 || raw.h12.iter().any(|r| r.len() != d2) {
            return Err(D::Error::custom(format!("H12 must be {d1}×{d2}")));
        }
        let flat: Vec<f64> = raw.h12.into_iter().flatten().collect();
        Ok(Self {
            dims: (n1, n2),
            h0: raw.h0,
            h1: DVector::from_vec(raw.h1),
            h2: DVector::from_vec(raw.h2),
            h12: DMatrix::from_row_slice(d1, d2, &flat),
        })
    }
}
