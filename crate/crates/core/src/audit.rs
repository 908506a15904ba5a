//! Finite-difference audit of the no-signaling conditions.
//!
//! The local distribution `ℙ⁽¹⁾(t; v⁽ᵖ⁾)` of the first subsystem after a
//! measurement on the second one must not depend on
//!
//! 1. the remote reduced state `r2`,
//! 2. the correlations `r12`,
//! 3. which observable was measured remotely.
//!
//! Each dependence is estimated as a total central-difference derivative: the
//! perturbed parameter changes the branch weights and the collapsed initial
//! states, every branch is re-evolved and the distribution re-summed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{Bipartite, JointBlochState, Subsystem};
use crate::dynamics::{reduced_propagator_fit, BlochHamiltonian, Dynamics, EvolutionLaw, IntegratorOptions};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measurement::{local_distribution, ProjectiveObservable};
use crate::random::{stream_rng, unit_vector};

/// How many times a finite-difference step is halved before a component is declared infeasible.
pub const MAX_HALVINGS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    /// Central-difference step.
    pub fd_step: f64,
    pub pass_tolerance: f64,
    pub ensemble_size: usize,
    pub times: Vec<f64>,
    pub seed: u64,
    /// Weight of `I/(N₁N₂)` mixed into every sampled state, keeping it full rank.
    pub mix: f64,
    /// Random probe states for the reduced-propagator fit.
    pub probes: usize,
    /// Branch evolution settings. A fixed-step method makes the numerical flow
    /// map exactly linear for linear laws, so finite differences see no
    /// step-size-control noise.
    pub integrator: IntegratorOptions,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            pass_tolerance: 1e-6,
            ensemble_size: 50,
            times: vec![0.25, 0.5, 1.0],
            seed: 0,
            mix: 0.2,
            probes: 8,
            integrator: IntegratorOptions::rk4(1e-2),
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return bad("fd_step must be > 0");
        }
        if !(self.pass_tolerance.is_finite() && self.pass_tolerance > 0.0) {
            return bad("pass_tolerance must be > 0");
        }
        if self.ensemble_size == 0 {
            return bad("ensemble_size must be ≥ 1");
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("times must be a nonempty list of finite values ≥ 0");
        }
        if !(0.0..=1.0).contains(&self.mix) {
            return bad("mix must lie in [0, 1]");
        }
        self.integrator.validate()
    }
}

/// Everything that fixes one local distribution `ℙ⁽¹⁾(t; ·)`.
#[derive(Debug, Clone, Copy)]
pub struct Setting<'a> {
    pub sys: &'a Bipartite,
    pub dynamics: Dynamics<'a>,
    pub joint: &'a JointBlochState,
    pub remote: &'a ProjectiveObservable,
    pub local: &'a ProjectiveObservable,
    pub t: f64,
}

impl Setting<'_> {
    pub fn distribution(&self) -> Result<Vec<f64>> {
        local_distribution(self.sys, self.joint, self.remote, self.local, &self.dynamics, self.t)
    }

    fn distribution_with(&self, joint: &JointBlochState, remote: &ProjectiveObservable) -> Result<Vec<f64>> {
        local_distribution(self.sys, joint, remote, self.local, &self.dynamics, self.t)
    }
}

/// A central-difference estimate, maximized over local outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    pub value: f64,
    /// Step actually used after any halving.
    pub step: f64,
    /// Local outcome attaining the maximum.
    pub outcome: usize,
}

fn max_slope(plus: &[f64], minus: &[f64], step: f64) -> Derivative {
    let mut best = Derivative {
        value: 0.0,
        step,
        outcome: 0,
    };
    for (p, (a, b)) in plus.iter().zip(minus).enumerate() {
        let slope = ((a - b) / (2.0 * step)).abs();
        if slope > best.value || slope.is_nan() {
            best = Derivative {
                value: slope,
                step,
                outcome: p,
            };
        }
    }
    best
}

fn perturbed_derivative(
    setting: &Setting<'_>,
    fd_step: f64,
    component: String,
    perturb: impl Fn(&mut JointBlochState, f64),
) -> Result<Derivative> {
    let mut step = fd_step;
    for _ in 0..=MAX_HALVINGS {
        let mut plus = setting.joint.clone();
        perturb(&mut plus, step);
        let mut minus = setting.joint.clone();
        perturb(&mut minus, -step);
        if crate::dynamics::is_physical(setting.sys, &plus) && crate::dynamics::is_physical(setting.sys, &minus) {
            let a = setting.distribution_with(&plus, setting.remote)?;
            let b = setting.distribution_with(&minus, setting.remote)?;
            return Ok(max_slope(&a, &b, step));
        }
        step /= 2.0;
    }
    Err(Error::PerturbationInfeasible { component })
}

/// `∂ℙ⁽¹⁾/∂r2ₖ`
pub fn d_remote_state(setting: &Setting<'_>, k: usize, fd_step: f64) -> Result<Derivative> {
    if k >= setting.joint.r2.len() {
        return Err(Error::InvalidArgument(format!("r2 component {k} out of range")));
    }
    perturbed_derivative(setting, fd_step, format!("r2[{k}]"), |s, h| s.r2[k] += h)
}

/// `∂ℙ⁽¹⁾/∂r12ᵢⱼ`
pub fn d_correlations(setting: &Setting<'_>, (i, j): (usize, usize), fd_step: f64) -> Result<Derivative> {
    if i >= setting.joint.r12.nrows() || j >= setting.joint.r12.ncols() {
        return Err(Error::InvalidArgument(format!("r12 component ({i}, {j}) out of range")));
    }
    perturbed_derivative(setting, fd_step, format!("r12[{i}][{j}]"), |s, h| s.r12[(i, j)] += h)
}

/// Derivative of `ℙ⁽¹⁾` along the family of remote observables
/// `Pₖ(θ) = e^{−iθG} Pₖ e^{iθG}` at `θ = 0`.
pub fn d_remote_observable(setting: &Setting<'_>, direction: &CMatrix, fd_step: f64) -> Result<Derivative> {
    let q = setting.sys.second();
    let plus = setting.remote.rotated(q, direction, fd_step)?;
    let minus = setting.remote.rotated(q, direction, -fd_step)?;
    let a = setting.distribution_with(setting.joint, &plus)?;
    let b = setting.distribution_with(setting.joint, &minus)?;
    Ok(max_slope(&a, &b, fd_step))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelWitness {
    /// Total-variation distance between the two local distributions.
    pub delta: f64,
    pub distributions: [Vec<f64>; 2],
}

/// Local distributions at time `t` for two different remote measurement
/// choices, and their total-variation distance.
pub fn signaling_channel_demo(
    sys: &Bipartite,
    dynamics: &Dynamics<'_>,
    joint: &JointBlochState,
    remote: [&ProjectiveObservable; 2],
    local: &ProjectiveObservable,
    t: f64,
) -> Result<ChannelWitness> {
    let a = local_distribution(sys, joint, remote[0], local, dynamics, t)?;
    let b = local_distribution(sys, joint, remote[1], local, dynamics, t)?;
    let delta = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    Ok(ChannelWitness {
        delta,
        distributions: [a, b],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    SignalingDetected,
}

/// Residuals of one ensemble member at one time.
#[derive(Debug, Clone, Serialize)]
pub struct CaseResidual {
    pub member: usize,
    pub time: f64,
    pub d_remote_state: f64,
    pub worst_remote_component: usize,
    pub d_correlations: f64,
    pub worst_correlation: (usize, usize),
    pub d_remote_observable: f64,
    pub infeasible_components: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseFailure {
    pub member: Option<usize>,
    pub time: f64,
    pub condition: String,
    pub error: String,
}

/// The configuration attaining one of the reported maxima.
#[derive(Debug, Clone, Serialize)]
pub struct WorstCase {
    pub member: usize,
    pub time: f64,
    pub component: String,
    pub value: f64,
    pub state: JointBlochState,
    pub remote: ProjectiveObservable,
    pub local: ProjectiveObservable,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct WorstCases {
    pub remote_state: Option<WorstCase>,
    pub correlations: Option<WorstCase>,
    pub remote_observable: Option<WorstCase>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub law: String,
    pub dims: (usize, usize),
    pub max_d_remote_state: f64,
    pub max_d_correlations: f64,
    pub max_d_remote_observable: f64,
    /// Largest deviation of the interaction-free reduced flows from a linear map.
    pub linearity_residual: f64,
    pub verdict: Verdict,
    pub worst_case: WorstCases,
    pub infeasible_components: usize,
    pub failures: Vec<CaseFailure>,
    pub config: AuditConfig,
    pub cases: Vec<CaseResidual>,
}

impl AuditReport {
    pub fn residuals(&self) -> [f64; 4] {
        [
            self.max_d_remote_state,
            self.max_d_correlations,
            self.max_d_remote_observable,
            self.linearity_residual,
        ]
    }

    /// Per-case residuals, one row per (member, time).
    pub fn cases_csv(&self) -> String {
        let mut out = String::from(
            "member,time,d_remote_state,worst_remote_component,d_correlations,worst_correlation_i,worst_correlation_j,d_remote_observable,infeasible_components\n",
        );
        for c in &self.cases {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{:.16e},{},{},{:.16e},{}\n",
                c.member,
                c.time,
                c.d_remote_state,
                c.worst_remote_component,
                c.d_correlations,
                c.worst_correlation.0,
                c.worst_correlation.1,
                c.d_remote_observable,
                c.infeasible_components
            ));
        }
        out
    }
}

/// One randomly drawn audit scenario.
#[derive(Debug, Clone)]
pub struct Member {
    pub joint: JointBlochState,
    pub remote: ProjectiveObservable,
    pub local: ProjectiveObservable,
    /// Hermitian, traceless, unit Frobenius-norm rotation generator on the second subsystem.
    pub direction: CMatrix,
}

impl Member {
    pub fn draw<R: Rng + ?Sized>(sys: &Bipartite, mix: f64, rng: &mut R) -> Self {
        let joint = sys.random_interior(mix, rng);
        let remote = ProjectiveObservable::random(sys.second(), rng);
        let local = ProjectiveObservable::random(sys.first(), rng);
        let g = unit_vector(sys.second().coords(), rng);
        let direction = sys.second().basis().combine(&g).scale(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            joint,
            remote,
            local,
            direction,
        }
    }
}

struct MemberOutcome {
    member: Member,
    cases: Vec<CaseResidual>,
    failures: Vec<CaseFailure>,
}

fn run_member(sys: &Bipartite, dynamics: Dynamics<'_>, config: &AuditConfig, index: usize) -> MemberOutcome {
    let mut rng = stream_rng(config.seed, index as u64);
    let member = Member::draw(sys, config.mix, &mut rng);
    let (d1, d2) = sys.coords();
    let mut cases = Vec::with_capacity(config.times.len());
    let mut failures = Vec::new();
    for &t in &config.times {
        let setting = Setting {
            sys,
            dynamics,
            joint: &member.joint,
            remote: &member.remote,
            local: &member.local,
            t,
        };
        let mut case = CaseResidual {
            member: index,
            time: t,
            d_remote_state: 0.0,
            worst_remote_component: 0,
            d_correlations: 0.0,
            worst_correlation: (0, 0),
            d_remote_observable: 0.0,
            infeasible_components: 0,
        };
        let mut fail = |condition: &str, e: Error| {
            failures.push(CaseFailure {
                member: Some(index),
                time: t,
                condition: condition.to_string(),
                error: e.to_string(),
            })
        };
        for k in 0..d2 {
            match d_remote_state(&setting, k, config.fd_step) {
                Ok(d) if d.value.is_finite() => {
                    if d.value > case.d_remote_state {
                        case.d_remote_state = d.value;
                        case.worst_remote_component = k;
                    }
                }
                Ok(_) => fail(
                    "remote_state",
                    Error::InvalidArgument(format!("non-finite derivative for r2[{k}]")),
                ),
                Err(Error::PerturbationInfeasible { .. }) => case.infeasible_components += 1,
                Err(e) => fail("remote_state", e),
            }
        }
        for i in 0..d1 {
            for j in 0..d2 {
                match d_correlations(&setting, (i, j), config.fd_step) {
                    Ok(d) if d.value.is_finite() => {
                        if d.value > case.d_correlations {
                            case.d_correlations = d.value;
                            case.worst_correlation = (i, j);
                        }
                    }
                    Ok(_) => fail(
                        "correlations",
                        Error::InvalidArgument(format!("non-finite derivative for r12[{i}][{j}]")),
                    ),
                    Err(Error::PerturbationInfeasible { .. }) => case.infeasible_components += 1,
                    Err(e) => fail("correlations", e),
                }
            }
        }
        match d_remote_observable(&setting, &member.direction, config.fd_step) {
            Ok(d) if d.value.is_finite() => case.d_remote_observable = d.value,
            Ok(_) => fail(
                "remote_observable",
                Error::InvalidArgument("non-finite derivative".into()),
            ),
            Err(e) => fail("remote_observable", e),
        }
        cases.push(case);
    }
    MemberOutcome {
        member,
        cases,
        failures,
    }
}

fn worst(
    outcomes: &[MemberOutcome],
    value: impl Fn(&CaseResidual) -> f64,
    component: impl Fn(&CaseResidual) -> String,
) -> (f64, Option<WorstCase>) {
    let mut best: Option<(&MemberOutcome, &CaseResidual)> = None;
    for o in outcomes {
        for c in &o.cases {
            if best.is_none_or(|(_, b)| value(c) > value(b)) {
                best = Some((o, c));
            }
        }
    }
    match best {
        None => (0.0, None),
        Some((o, c)) => (
            value(c),
            Some(WorstCase {
                member: c.member,
                time: c.time,
                component: component(c),
                value: value(c),
                state: o.member.joint.clone(),
                remote: o.member.remote.clone(),
                local: o.member.local.clone(),
            }),
        ),
    }
}

/// Sweeps a seeded ensemble of interior states, observable pairs and times.
///
/// Branches are evolved by the interaction-free reduced flow of the first
/// subsystem (the parties are spatially separated after the measurement), and
/// the same local part of `h` is used for the reduced-linearity fit of both
/// subsystems. The report is identical for identical inputs regardless of
/// thread scheduling.
pub fn audit(sys: &Bipartite, law: &EvolutionLaw, h: &BlochHamiltonian, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    if h.dims() != sys.dims() {
        return Err(Error::DimensionMismatch {
            expected: sys.joint_dim(),
            found: h.dims().0 * h.dims().1,
        });
    }
    let dynamics = Dynamics::new(law, h, config.integrator);
    let outcomes: Vec<MemberOutcome> = (0..config.ensemble_size)
        .into_par_iter()
        .map(|i| run_member(sys, dynamics, config, i))
        .collect();

    let local_h = h.local_part();
    let fit_jobs: Vec<(usize, f64, Subsystem)> = config
        .times
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| [(i, t, Subsystem::First), (i, t, Subsystem::Second)])
        .collect();
    let fits: Vec<(f64, Subsystem, Result<f64>)> = fit_jobs
        .into_par_iter()
        .enumerate()
        .map(|(job, (_, t, which))| {
            let mut rng = stream_rng(config.seed, (config.ensemble_size + job) as u64);
            let fit = reduced_propagator_fit(
                sys,
                law,
                &local_h,
                which,
                t,
                config.probes,
                &config.integrator,
                &mut rng,
            )
            .map(|f| f.residual);
            (t, which, fit)
        })
        .collect();

    let mut failures: Vec<CaseFailure> = outcomes.iter().flat_map(|o| o.failures.iter().cloned()).collect();
    let mut linearity_residual = 0.0_f64;
    for (t, which, fit) in fits {
        match fit {
            Ok(r) if r.is_finite() => linearity_residual = linearity_residual.max(r),
            Ok(_) => failures.push(CaseFailure {
                member: None,
                time: t,
                condition: format!("linearity:{which:?}").to_lowercase(),
                error: "non-finite residual".into(),
            }),
            Err(e) => failures.push(CaseFailure {
                member: None,
                time: t,
                condition: format!("linearity:{which:?}").to_lowercase(),
                error: e.to_string(),
            }),
        }
    }

    let (max_rs, worst_rs) = worst(
        &outcomes,
        |c| c.d_remote_state,
        |c| format!("r2[{}]", c.worst_remote_component),
    );
    let (max_corr, worst_corr) = worst(
        &outcomes,
        |c| c.d_correlations,
        |c| format!("r12[{}][{}]", c.worst_correlation.0, c.worst_correlation.1),
    );
    let (max_obs, worst_obs) = worst(&outcomes, |c| c.d_remote_observable, |_| "rotation".into());

    let residuals = [max_rs, max_corr, max_obs, linearity_residual];
    let verdict = if residuals.iter().all(|r| *r <= config.pass_tolerance) {
        Verdict::Pass
    } else {
        Verdict::SignalingDetected
    };
    Ok(AuditReport {
        law: law.name(),
        dims: sys.dims(),
        max_d_remote_state: max_rs,
        max_d_correlations: max_corr,
        max_d_remote_observable: max_obs,
        linearity_residual,
        verdict,
        worst_case: WorstCases {
            remote_state: worst_rs,
            correlations: worst_corr,
            remote_observable: worst_obs,
        },
        infeasible_components: outcomes
            .iter()
            .flat_map(|o| &o.cases)
            .map(|c| c.infeasible_components)
            .sum(),
        failures,
        config: config.clone(),
        cases: outcomes.into_iter().flat_map(|o| o.cases).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(times: Vec<f64>) -> AuditConfig {
        AuditConfig {
            ensemble_size: 4,
            times,
            ..AuditConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(AuditConfig::default().validate().is_ok());
        for bad in [
            AuditConfig {
                fd_step: 0.0,
                ..AuditConfig::default()
            },
            AuditConfig {
                pass_tolerance: -1.0,
                ..AuditConfig::default()
            },
            AuditConfig {
                ensemble_size: 0,
                ..AuditConfig::default()
            },
            AuditConfig {
                times: vec![],
                ..AuditConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn linear_law_passes_small_audit() {
        let sys = Bipartite::new(2, 2).unwrap();
        let h = BlochHamiltonian::random(&sys, 1.0, &mut stream_rng(1, 0));
        let report = audit(&sys, &EvolutionLaw::Linear, &h, &small_config(vec![0.5])).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.residuals());
        assert!(report.failures.is_empty());
        assert_eq!(report.cases.len(), 4);
    }

    #[test]
    fn polesink_is_flagged() {
        let sys = Bipartite::new(2, 2).unwrap();
        let h = BlochHamiltonian::zero(&sys);
        let report = audit(&sys, &EvolutionLaw::polesink(0.1), &h, &small_config(vec![1.0])).unwrap();
        assert_eq!(report.verdict, Verdict::SignalingDetected);
        assert!(report.worst_case.remote_observable.is_some());
    }

    #[test]
    fn time_zero_residuals_vanish_for_any_law() {
        let sys = Bipartite::new(2, 3).unwrap();
        let h = BlochHamiltonian::random(&sys, 1.0, &mut stream_rng(2, 0));
        for law in [EvolutionLaw::Linear, EvolutionLaw::polesink(0.3)] {
            let report = audit(&sys, &law, &h, &small_config(vec![0.0])).unwrap();
            for r in report.residuals() {
                assert!(r <= 1e-10, "{}: {r}", law.name());
            }
        }
    }

    #[test]
    fn infeasible_perturbation_is_reported() {
        // a pure state sits on the boundary; every ± step leaves the physical set
        let sys = Bipartite::new(2, 2).unwrap();
        let joint = sys.singlet().unwrap();
        let h = BlochHamiltonian::zero(&sys);
        let law = EvolutionLaw::Linear;
        let z = ProjectiveObservable::computational(sys.second());
        let local = ProjectiveObservable::computational(sys.first());
        let setting = Setting {
            sys: &sys,
            dynamics: Dynamics::new(&law, &h, IntegratorOptions::default()),
            joint: &joint,
            remote: &z,
            local: &local,
            t: 0.5,
        };
        assert!(matches!(
            d_remote_state(&setting, 2, 1e-5),
            Err(Error::PerturbationInfeasible { .. })
        ));
    }

    #[test]
    fn csv_has_one_row_per_case() {
        let sys = Bipartite::new(2, 2).unwrap();
        let h = BlochHamiltonian::zero(&sys);
        let report = audit(&sys, &EvolutionLaw::Linear, &h, &small_config(vec![0.25, 0.5])).unwrap();
        assert_eq!(report.cases_csv().lines().count(), 1 + 8);
    }
}
