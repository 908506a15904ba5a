use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::bloch::{bloch_coordinates, Bipartite, JointBlochState};
use crate::dynamics::field::{local_generator, xi_field};
use crate::dynamics::hamiltonian::BlochHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::su_basis::Qudit;

/// Identifies one interaction-mediated term of the joint equations of motion.
///
/// `(m, n)` always names the entry `H12ₘₙ` the term is proportional to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XiTerm {
    /// `H12ₘₙ r12` contribution to `dr1ᵢ/dt`.
    First { i: usize, m: usize, n: usize },
    /// `H12ₘₙ r12` contribution to `dr2ᵢ/dt`.
    Second { i: usize, m: usize, n: usize },
    /// `H12ₘₙ r12` contribution to `dr12ₚq/dt`.
    Correlation { p: usize, q: usize, m: usize, n: usize },
    /// `H12ᵢq r1` contribution to `dr12ₚq/dt`.
    CrossFirst { p: usize, q: usize, i: usize },
    /// `H12ₚᵢ r2` contribution to `dr12ₚq/dt`.
    CrossSecond { p: usize, q: usize, i: usize },
}

type XiFn = dyn Fn(XiTerm, &JointBlochState) -> f64 + Send + Sync;

/// State-dependent weights on the interaction terms.
#[derive(Clone)]
pub struct XiFunctions {
    name: String,
    func: Arc<XiFn>,
}

impl fmt::Debug for XiFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("XiFunctions").field("name", &self.name).finish()
    }
}

impl XiFunctions {
    pub const PRESETS: [&'static str; 3] = ["one", "purity1", "corrnorm"];

    pub fn from_fn<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(XiTerm, &JointBlochState) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    /// `ξ ≡ 1`, which reproduces the linear law.
    pub fn one() -> Self {
        Self::from_fn("one", |_, _| 1.0)
    }

    /// `ξ = Tr ρ₁²`
    pub fn purity1() -> Self {
        Self::from_fn("purity1", |_, s| {
            let n = s.dims().0 as f64;
            (1.0 + 2.0 * s.r1.norm_squared() / n) / n
        })
    }

    /// `ξ = 1 / (1 + ‖r12‖²_F)`
    pub fn corrnorm() -> Self {
        Self::from_fn("corrnorm", |_, s| 1.0 / (1.0 + s.r12.norm_squared()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(Self::one()),
            "purity1" => Ok(Self::purity1()),
            "corrnorm" => Ok(Self::corrnorm()),
            other => Err(Error::InvalidArgument(format!(
                "unknown ξ preset {other:?} (expected one of {:?})",
                Self::PRESETS
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, term: XiTerm, state: &JointBlochState) -> Result<f64> {
        let v = (self.func)(term, state);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteXi { term })
        }
    }
}

/// A law given directly by its joint and reduced vector fields.
pub trait CustomLaw: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn joint_field(&self, sys: &Bipartite, h: &BlochHamiltonian, s: &JointBlochState) -> Result<JointBlochState>;

    /// Vector field of one isolated subsystem with local field `h_local`.
    fn reduced_flow(&self, q: &Qudit, h_local: &DVector<f64>) -> Result<ReducedFlow>;
}

/// Autonomous vector field on single-system Bloch coordinates.
pub type ReducedFlow = Box<dyn Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync>;

#[derive(Debug, Clone)]
pub enum EvolutionLaw {
    /// `ρ̇ = −i[H, ρ]`
    Linear,
    /// Interaction terms weighted by state-dependent ξ factors.
    Xi(XiFunctions),
    Custom(Arc<dyn CustomLaw>),
}

impl EvolutionLaw {
    pub fn name(&self) -> String {
        match self {
            EvolutionLaw::Linear => "linear".into(),
            EvolutionLaw::Xi(xi) => format!("xi:{}", xi.name()),
            EvolutionLaw::Custom(c) => c.name(),
        }
    }

    pub fn polesink(epsilon: f64) -> Self {
        EvolutionLaw::Custom(Arc::new(PoleSink::new(epsilon)))
    }
}

/// Local nonlinear flow that drags every Bloch vector towards the pole `|0⟩⟨0|`:
///
/// ```text
/// dr/dt = L_H r + ε (R ê − (r·ê) r / R),    R = √(N(N−1)/2)
/// ```
///
/// where `R ê` is the Bloch vector of `|0⟩`. For a qubit this is
/// `dr/dt = ε(ẑ − z r)`, which keeps pure states pure and gives
/// `z(t) = tanh(εt + artanh z₀)` on the z-axis. It depends on nothing but the
/// local state, so it is a positive control for the signaling audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSink {
    pub epsilon: f64,
}

impl PoleSink {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    fn pole(q: &Qudit) -> (DVector<f64>, f64) {
        let n = q.dim();
        let mut ground = CMatrix::zeros(n, n);
        ground[(0, 0)] = c(1.0);
        let radius = ((n * (n - 1)) as f64 / 2.0).sqrt();
        let e = bloch_coordinates(&ground, q).into_vector() / radius;
        (e, radius)
    }

    fn add_sink(&self, q: &Qudit, r: &[f64], out: &mut [f64]) {
        let (e, radius) = Self::pole(q);
        sink(self.epsilon, &e, radius, r, out);
    }
}

impl CustomLaw for PoleSink {
    fn name(&self) -> String {
        format!("polesink:{}", self.epsilon)
    }

    fn joint_field(&self, sys: &Bipartite, h: &BlochHamiltonian, s: &JointBlochState) -> Result<JointBlochState> {
        let mut out = xi_field(sys, h, s, &XiFunctions::one())?;
        let mut d1 = vec![0.0; s.r1.len()];
        self.add_sink(sys.first(), s.r1.as_slice(), &mut d1);
        let mut d2 = vec![0.0; s.r2.len()];
        self.add_sink(sys.second(), s.r2.as_slice(), &mut d2);
        out.r1 += DVector::from_vec(d1);
        out.r2 += DVector::from_vec(d2);
        Ok(out)
    }

    fn reduced_flow(&self, q: &Qudit, h_local: &DVector<f64>) -> Result<ReducedFlow> {
        let lin = local_generator(q, h_local);
        let (e, radius) = Self::pole(q);
        let epsilon = self.epsilon;
        Ok(Box::new(move |r, out| {
            for (k, o) in out.iter_mut().enumerate() {
                *o = (0..r.len()).map(|n| lin[(k, n)] * r[n]).sum();
            }
            sink(epsilon, &e, radius, r, out);
            Ok(())
        }))
    }
}

fn sink(epsilon: f64, e: &DVector<f64>, radius: f64, r: &[f64], out: &mut [f64]) {
    let along: f64 = r.iter().zip(e.iter()).map(|(a, b)| a * b).sum();
    for i in 0..out.len() {
        out[i] += epsilon * (radius * e[i] - along * r[i] / radius);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in XiFunctions::PRESETS {
            assert_eq!(XiFunctions::preset(name).unwrap().name(), name);
        }
        assert!(XiFunctions::preset("cubic").is_err());
    }

    #[test]
    fn preset_values() {
        let sys = Bipartite::new(2, 2).unwrap();
        let singlet = sys.singlet().unwrap();
        let term = XiTerm::First { i: 0, m: 0, n: 0 };
        assert_eq!(XiFunctions::one().eval(term, &singlet).unwrap(), 1.0);
        assert!((XiFunctions::purity1().eval(term, &singlet).unwrap() - 0.5).abs() < 1e-15);
        assert!((XiFunctions::corrnorm().eval(term, &singlet).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_finite_xi_is_an_error() {
        let xi = XiFunctions::from_fn("nan", |_, _| f64::NAN);
        let s = JointBlochState::zero((2, 2));
        assert!(matches!(
            xi.eval(XiTerm::First { i: 0, m: 0, n: 0 }, &s),
            Err(Error::NonFiniteXi { .. })
        ));
    }

    #[test]
    fn polesink_pole_is_ground_state() {
        let q = Qudit::new(2).unwrap();
        let (e, radius) = PoleSink::pole(&q);
        assert_eq!(radius, 1.0);
        assert!((e - DVector::from_vec(vec![0.0, 0.0, 1.0])).amax() < 1e-15);
        // pure states stay on the sphere of radius R
        for n in 2..=4 {
            let q = Qudit::new(n).unwrap();
            let (e, radius) = PoleSink::pole(&q);
            let r: Vec<f64> = e.iter().map(|x| x * radius).collect();
            let mut out = vec![0.0; r.len()];
            PoleSink::new(0.3).add_sink(&q, &r, &mut out);
            assert!(out.iter().all(|x| x.abs() < 1e-14));
        }
    }
}
