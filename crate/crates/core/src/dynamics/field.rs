//! Vector fields on joint Bloch coordinates.
//!
//! With `ρ̇ = −i[H, ρ]` and the coordinate conventions of [`crate::bloch`],
//! the structure-constant form of the equations of motion is
//!
//! ```text
//! ṙ1ₖ   = 2 Σ f¹ₘₙₖ H1ₘ r1ₙ + (4/N₂) Σ ξ H12ₘₙ Σₐ f¹ₘₐₖ r12ₐₙ
//! ṙ2ₗ   = 2 Σ f²ₙ_b_ₗ H2ₙ r2_b + (4/N₁) Σ ξ H12ₘₙ Σ_b f²ₙ_bₗ r12ₘ_b
//! ṙ12ₚq = 2 Σ f¹ₘₙₚ H1ₘ r12ₙq + 2 Σ f²ₙ_bq H2ₙ r12ₚ_b
//!       + 2 Σᵢ ξ H12ᵢq Σₐ f¹ᵢₐₚ r1ₐ + 2 Σᵢ ξ H12ₚᵢ Σ_b f²ᵢ_bq r2_b
//!       + 2 Σ ξ H12ₘₙ Σₐ_b Im(z¹ₘₐₚ z²ₙ_bq) r12ₐ_b
//! ```
//!
//! Only the terms proportional to `H12` carry a ξ weight; with every ξ equal
//! to one this is exactly the commutator generator built by
//! [`linear_generator`], and with `H12 = 0` no ξ is ever evaluated.

use nalgebra::{DMatrix, DVector};

use crate::bloch::{Bipartite, JointBlochState};
use crate::dynamics::hamiltonian::BlochHamiltonian;
use crate::dynamics::law::{EvolutionLaw, ReducedFlow, XiFunctions, XiTerm};
use crate::error::{Error, Result};
use crate::linalg::{commutator, CMatrix, I};
use crate::su_basis::Qudit;

/// Bloch-coordinate generator of `−i[H, ρ]`, obtained by pushing every
/// coordinate direction through the commutator and reading the result back.
///
/// The returned matrix acts on flattened coordinates `[r1, r2, r12]`.
pub fn linear_generator(sys: &Bipartite, h: &BlochHamiltonian) -> DMatrix<f64> {
    let (d1, d2) = sys.coords();
    let dim = sys.flat_len();
    let hm = h.matrix(sys);
    let norm = 1.0 / sys.joint_dim() as f64;
    let mut out = DMatrix::zeros(dim, dim);
    let mut push = |col: usize, op: &CMatrix| {
        let drho: CMatrix = commutator(&hm, op) * (-I * norm);
        let coords = sys.coordinates(&drho).to_flat();
        out.set_column(col, &DVector::from_vec(coords));
    };
    for i in 0..d1 {
        push(i, sys.embedded_first(i));
    }
    for j in 0..d2 {
        push(d1 + j, sys.embedded_second(j));
    }
    for i in 0..d1 {
        for j in 0..d2 {
            push(d1 + d2 + i * d2 + j, sys.embedded_cross(i, j));
        }
    }
    out
}

/// Single-system generator `Lₖₙ = 2 Σₘ fₘₙₖ hₘ`, so that `ṙ = L r` under `H = h·σ`.
pub fn local_generator(q: &Qudit, h: &DVector<f64>) -> DMatrix<f64> {
    let d = q.coords();
    let mut out = DMatrix::zeros(d, d);
    for e in q.constants().f_entries() {
        let hm = h[e.i];
        if hm != 0.0 {
            out[(e.k, e.j)] += 2.0 * e.value * hm;
        }
    }
    out
}

fn local_terms(sys: &Bipartite, h: &BlochHamiltonian, s: &JointBlochState) -> JointBlochState {
    let (d1, d2) = sys.coords();
    let l1 = local_generator(sys.first(), &h.h1);
    let l2 = local_generator(sys.second(), &h.h2);
    let mut out = JointBlochState::zero(sys.dims());
    out.r1 = &l1 * &s.r1;
    out.r2 = &l2 * &s.r2;
    // r12 ↦ L1 r12 + r12 L2ᵀ
    out.r12 = &l1 * &s.r12 + &s.r12 * l2.transpose();
    debug_assert_eq!(out.r12.shape(), (d1, d2));
    out
}

/// Structure-constant vector field with ξ-weighted interaction terms.
pub fn xi_field(
    sys: &Bipartite,
    h: &BlochHamiltonian,
    s: &JointBlochState,
    xi: &XiFunctions,
) -> Result<JointBlochState> {
    let mut out = local_terms(sys, h, s);
    if h.is_interaction_free() {
        return Ok(out);
    }
    let (n1, n2) = sys.dims();
    let (d1, d2) = sys.coords();
    let f1 = sys.first().constants();
    let f2 = sys.second().constants();
    let h12 = &h.h12;

    // ṙ1ₖ: T1[k][(m,n)] = Σₐ f¹ₘₐₖ r12ₐₙ
    let mut t1 = DMatrix::<f64>::zeros(d1, d1 * d2);
    for e in f1.f_entries() {
        for n in 0..d2 {
            if h12[(e.i, n)] != 0.0 {
                t1[(e.k, e.i * d2 + n)] += e.value * s.r12[(e.j, n)];
            }
        }
    }
    for k in 0..d1 {
        let mut acc = 0.0;
        for m in 0..d1 {
            for n in 0..d2 {
                let (hv, tv) = (h12[(m, n)], t1[(k, m * d2 + n)]);
                if hv != 0.0 && tv != 0.0 {
                    acc += xi.eval(XiTerm::First { i: k, m, n }, s)? * hv * tv;
                }
            }
        }
        out.r1[k] += 4.0 / n2 as f64 * acc;
    }

    // ṙ2ₗ: T2[l][(m,n)] = Σ_b f²ₙ_bₗ r12ₘ_b
    let mut t2 = DMatrix::<f64>::zeros(d2, d1 * d2);
    for e in f2.f_entries() {
        for m in 0..d1 {
            if h12[(m, e.i)] != 0.0 {
                t2[(e.k, m * d2 + e.i)] += e.value * s.r12[(m, e.j)];
            }
        }
    }
    for l in 0..d2 {
        let mut acc = 0.0;
        for m in 0..d1 {
            for n in 0..d2 {
                let (hv, tv) = (h12[(m, n)], t2[(l, m * d2 + n)]);
                if hv != 0.0 && tv != 0.0 {
                    acc += xi.eval(XiTerm::Second { i: l, m, n }, s)? * hv * tv;
                }
            }
        }
        out.r2[l] += 4.0 / n1 as f64 * acc;
    }

    // ṙ12 cross terms: c1[p][i] = Σₐ f¹ᵢₐₚ r1ₐ, c2[q][i] = Σ_b f²ᵢ_bq r2_b
    let mut c1 = DMatrix::<f64>::zeros(d1, d1);
    for e in f1.f_entries() {
        c1[(e.k, e.i)] += e.value * s.r1[e.j];
    }
    let mut c2 = DMatrix::<f64>::zeros(d2, d2);
    for e in f2.f_entries() {
        c2[(e.k, e.i)] += e.value * s.r2[e.j];
    }
    for p in 0..d1 {
        for q in 0..d2 {
            let mut acc = 0.0;
            for i in 0..d1 {
                let (hv, cv) = (h12[(i, q)], c1[(p, i)]);
                if hv != 0.0 && cv != 0.0 {
                    acc += xi.eval(XiTerm::CrossFirst { p, q, i }, s)? * hv * cv;
                }
            }
            for i in 0..d2 {
                let (hv, cv) = (h12[(p, i)], c2[(q, i)]);
                if hv != 0.0 && cv != 0.0 {
                    acc += xi.eval(XiTerm::CrossSecond { p, q, i }, s)? * hv * cv;
                }
            }
            out.r12[(p, q)] += 2.0 * acc;
        }
    }

    // ṙ12 bilinear term: T12[(p,q)][(m,n)] = Σₐ_b Im(z¹ₘₐₚ z²ₙ_bq) r12ₐ_b
    let width = d1 * d2;
    let mut t12 = vec![0.0; width * width];
    for a in f1.z_entries() {
        for b in f2.z_entries() {
            if h12[(a.i, b.i)] == 0.0 {
                continue;
            }
            let im = a.g * b.f + a.f * b.g;
            if im != 0.0 {
                let row = a.k * d2 + b.k;
                let col = a.i * d2 + b.i;
                t12[row * width + col] += im * s.r12[(a.j, b.j)];
            }
        }
    }
    for p in 0..d1 {
        for q in 0..d2 {
            let row = p * d2 + q;
            let mut acc = 0.0;
            for m in 0..d1 {
                for n in 0..d2 {
                    let tv = t12[row * width + m * d2 + n];
                    if tv != 0.0 {
                        acc += xi.eval(XiTerm::Correlation { p, q, m, n }, s)? * h12[(m, n)] * tv;
                    }
                }
            }
            out.r12[(p, q)] += 2.0 * acc;
        }
    }
    Ok(out)
}

/// Time derivative of the joint coordinates under `law`.
pub fn vector_field(
    sys: &Bipartite,
    law: &EvolutionLaw,
    h: &BlochHamiltonian,
    s: &JointBlochState,
) -> Result<JointBlochState> {
    check_dims(sys, h, s)?;
    match law {
        EvolutionLaw::Linear => {
            let l = linear_generator(sys, h);
            let d = l * DVector::from_vec(s.to_flat());
            JointBlochState::from_flat(sys.dims(), d.as_slice())
        }
        EvolutionLaw::Xi(xi) => xi_field(sys, h, s, xi),
        EvolutionLaw::Custom(custom) => custom.joint_field(sys, h, s),
    }
}

pub(crate) fn check_dims(sys: &Bipartite, h: &BlochHamiltonian, s: &JointBlochState) -> Result<()> {
    for dims in [h.dims(), s.dims()] {
        if dims != sys.dims() {
            return Err(Error::DimensionMismatch {
                expected: sys.joint_dim(),
                found: dims.0 * dims.1,
            });
        }
    }
    Ok(())
}

/// Flow of an isolated subsystem under `law` with local field `h_local`.
///
/// Linear and ξ laws reduce to the same linear precession: every ξ multiplies
/// an interaction term and there is none.
pub fn reduced_flow(law: &EvolutionLaw, q: &Qudit, h_local: &DVector<f64>) -> Result<ReducedFlow> {
    if h_local.len() != q.coords() {
        return Err(Error::DimensionMismatch {
            expected: q.coords(),
            found: h_local.len(),
        });
    }
    match law {
        EvolutionLaw::Linear | EvolutionLaw::Xi(_) => {
            let l = local_generator(q, h_local);
            Ok(Box::new(move |r, out| {
                let d = r.len();
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for n in 0..d {
                        acc += l[(k, n)] * r[n];
                    }
                    *o = acc;
                }
                Ok(())
            }))
        }
        EvolutionLaw::Custom(custom) => custom.reduced_flow(q, h_local),
    }
}
