//! Evolution of joint Bloch coordinates under linear and nonlinear laws.

mod field;
mod hamiltonian;
mod integrate;
mod law;

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};
use rand::Rng;
use serde::Serialize;

pub use field::{linear_generator, local_generator, reduced_flow, vector_field, xi_field};
pub use hamiltonian::BlochHamiltonian;
pub use integrate::{integrate, IntegratorOptions, Method, Solution};
pub use law::{CustomLaw, EvolutionLaw, PoleSink, ReducedFlow, XiFunctions, XiTerm};

use crate::bloch::{
    from_bloch, joint_from_bloch, to_bloch, Bipartite, BlochState, DensityMatrix, JointBlochState, Subsystem,
};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::random::hilbert_schmidt;
use crate::su_basis::Qudit;

/// Result of a joint evolution, with the physicality of the end state.
#[derive(Debug, Clone, Serialize)]
pub struct Evolved {
    pub time: f64,
    pub state: JointBlochState,
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub steps: usize,
}

enum PreparedField<'a> {
    Matrix(DMatrix<f64>),
    Joint {
        sys: &'a Bipartite,
        law: &'a EvolutionLaw,
        h: &'a BlochHamiltonian,
    },
}

impl PreparedField<'_> {
    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        match self {
            PreparedField::Matrix(l) => {
                let n = y.len();
                let yv = DVectorView::from_slice(y, n);
                let mut out = DVectorViewMut::from_slice(dy, n);
                out.gemv(1.0, l, &yv, 0.0);
                Ok(())
            }
            PreparedField::Joint { sys, law, h } => {
                let s = JointBlochState::from_flat(sys.dims(), y)?;
                let d = vector_field(sys, law, h, &s)?;
                let mut i = 0;
                for v in d.r1.iter().chain(d.r2.iter()) {
                    dy[i] = *v;
                    i += 1;
                }
                for row in d.r12.row_iter() {
                    for v in row.iter() {
                        dy[i] = *v;
                        i += 1;
                    }
                }
                Ok(())
            }
        }
    }
}

fn prepare<'a>(sys: &'a Bipartite, law: &'a EvolutionLaw, h: &'a BlochHamiltonian) -> PreparedField<'a> {
    match law {
        EvolutionLaw::Linear => PreparedField::Matrix(linear_generator(sys, h)),
        _ => PreparedField::Joint { sys, law, h },
    }
}

fn annotate(sys: &Bipartite, state: JointBlochState, time: f64, steps: usize) -> Evolved {
    let min = min_eigenvalue(&sys.matrix(&state));
    Evolved {
        time,
        physical: min >= -crate::bloch::PSD_TOL,
        min_eigenvalue: min,
        state,
        steps,
    }
}

/// Integrates the joint equations of motion up to time `t`.
///
/// The physicality of the result is reported, never enforced.
pub fn evolve(
    sys: &Bipartite,
    law: &EvolutionLaw,
    h: &BlochHamiltonian,
    s0: &JointBlochState,
    t: f64,
    opts: &IntegratorOptions,
) -> Result<Evolved> {
    let mut samples = trajectory(sys, law, h, s0, &[t], opts)?;
    Ok(samples.pop().expect("one sample per requested time"))
}

/// Joint states at each of the nondecreasing `times`.
pub fn trajectory(
    sys: &Bipartite,
    law: &EvolutionLaw,
    h: &BlochHamiltonian,
    s0: &JointBlochState,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<Evolved>> {
    field::check_dims(sys, h, s0)?;
    opts.validate()?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("sample times must be finite and ≥ 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be nondecreasing".into()));
    }
    let prepared = prepare(sys, law, h);
    let mut y = s0.to_flat();
    let mut now = 0.0;
    let mut steps = 0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > now {
            let sol = integrate(|y, dy| prepared.eval(y, dy), &y, t - now, opts).map_err(|e| match e {
                Error::Integration { time, reason } => Error::Integration {
                    time: now + time,
                    reason,
                },
                other => other,
            })?;
            y = sol.y;
            steps += sol.accepted + sol.rejected;
            now = t;
        }
        let state = JointBlochState::from_flat(sys.dims(), &y)?;
        out.push(annotate(sys, state, t, steps));
    }
    Ok(out)
}

/// Evolves an isolated subsystem with local field `h_local`.
pub fn evolve_reduced(
    q: &Qudit,
    law: &EvolutionLaw,
    h_local: &DVector<f64>,
    r0: &BlochState,
    t: f64,
    opts: &IntegratorOptions,
) -> Result<BlochState> {
    if r0.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: r0.dim(),
        });
    }
    if t == 0.0 {
        return Ok(r0.clone());
    }
    let flow = reduced_flow(law, q, h_local)?;
    let sol = integrate(|y, dy| flow(y, dy), r0.r().as_slice(), t, opts)?;
    BlochState::new(q.dim(), DVector::from_vec(sol.y))
}

/// A law, a Hamiltonian and integrator settings: everything needed to move a state forward.
#[derive(Debug, Clone, Copy)]
pub struct Dynamics<'a> {
    pub law: &'a EvolutionLaw,
    pub hamiltonian: &'a BlochHamiltonian,
    pub options: IntegratorOptions,
}

impl<'a> Dynamics<'a> {
    pub fn new(law: &'a EvolutionLaw, hamiltonian: &'a BlochHamiltonian, options: IntegratorOptions) -> Self {
        Self {
            law,
            hamiltonian,
            options,
        }
    }

    pub fn evolve(&self, sys: &Bipartite, s0: &JointBlochState, t: f64) -> Result<Evolved> {
        evolve(sys, self.law, self.hamiltonian, s0, t, &self.options)
    }

    /// Evolves subsystem `which` on its own, driven by its local field only.
    pub fn evolve_reduced(&self, sys: &Bipartite, which: Subsystem, r0: &BlochState, t: f64) -> Result<BlochState> {
        evolve_reduced(
            sys.qudit(which),
            self.law,
            self.hamiltonian.local_field(which),
            r0,
            t,
            &self.options,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropagatorFit {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// `max |r(t; r₀) − A r₀|` over the probe states.
    pub residual: f64,
}

/// Fits `r(t; r₀) ≈ A r₀` for subsystem `which` and measures how far the
/// reduced flow is from linear on fresh random probes.
#[allow(clippy::too_many_arguments)]
pub fn reduced_propagator_fit<R: Rng + ?Sized>(
    sys: &Bipartite,
    law: &EvolutionLaw,
    h: &BlochHamiltonian,
    which: Subsystem,
    t: f64,
    probes: usize,
    opts: &IntegratorOptions,
    rng: &mut R,
) -> Result<PropagatorFit> {
    if !h.is_interaction_free() {
        return Err(Error::NotInteractionFree);
    }
    let q = sys.qudit(which);
    let h_local = h.local_field(which);
    let d = q.coords();
    let mut matrix = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut scale = 1.0;
        let probe = loop {
            let mut r = DVector::zeros(d);
            r[j] = scale;
            let s = BlochState::new(q.dim(), r)?;
            if from_bloch(&s, q).is_ok() {
                break s;
            }
            scale /= 2.0;
        };
        let evolved = evolve_reduced(q, law, h_local, &probe, t, opts)?;
        matrix.set_column(j, &(evolved.into_vector() / scale));
    }
    let mut residual = 0.0_f64;
    for _ in 0..probes {
        let rho = DensityMatrix::new(hilbert_schmidt(q.dim(), rng))?;
        let r0 = to_bloch(&rho, q)?;
        let evolved = evolve_reduced(q, law, h_local, &r0, t, opts)?;
        let predicted = &matrix * r0.r();
        residual = residual.max((evolved.r() - predicted).amax());
    }
    Ok(PropagatorFit { matrix, residual })
}

/// Physicality check used by callers that hold only coordinates.
pub fn is_physical(sys: &Bipartite, s: &JointBlochState) -> bool {
    joint_from_bloch(s, sys).is_ok()
}
