//! Side-by-side audit of an interaction-coupled ξ law and the pole-sink control.

use blochsig::audit::signaling_channel_demo;
use blochsig::random::stream_rng;
use blochsig::{
    audit, AuditConfig, Bipartite, BlochHamiltonian, Dynamics, EvolutionLaw, ProjectiveObservable, Verdict, XiFunctions,
};
use serde::Serialize;

use crate::error::CliResult;
use crate::output;

pub const POLESINK_EPSILON: f64 = 0.1;

#[derive(Debug, Serialize)]
pub struct DemoRow {
    pub law: String,
    pub interaction: bool,
    pub max_d_remote_state: f64,
    pub max_d_correlations: f64,
    pub max_d_remote_observable: f64,
    pub linearity_residual: f64,
    /// Singlet, remote computational vs Hadamard-like basis, local computational, t = 1.
    pub channel_delta: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Serialize)]
pub struct DemoOutput {
    pub version: &'static str,
    pub seed: u64,
    pub rows: Vec<DemoRow>,
}

pub fn rows(seed: u64) -> blochsig::Result<Vec<DemoRow>> {
    let sys = Bipartite::new(2, 2)?;
    let config = AuditConfig {
        seed,
        ..AuditConfig::default()
    };
    let coupled = BlochHamiltonian::random(&sys, 1.0, &mut stream_rng(seed, u64::MAX));
    let cases = [
        (EvolutionLaw::Xi(XiFunctions::corrnorm()), coupled),
        (EvolutionLaw::polesink(POLESINK_EPSILON), BlochHamiltonian::zero(&sys)),
    ];
    let singlet = sys.singlet()?;
    let z = ProjectiveObservable::computational(sys.second());
    let x = ProjectiveObservable::fourier(sys.second());
    let local = ProjectiveObservable::computational(sys.first());
    cases
        .iter()
        .map(|(law, h)| {
            let report = audit(&sys, law, h, &config)?;
            let dynamics = Dynamics::new(law, h, config.integrator);
            let w = signaling_channel_demo(&sys, &dynamics, &singlet, [&z, &x], &local, 1.0)?;
            Ok(DemoRow {
                law: report.law.clone(),
                interaction: !h.is_interaction_free(),
                max_d_remote_state: report.max_d_remote_state,
                max_d_correlations: report.max_d_correlations,
                max_d_remote_observable: report.max_d_remote_observable,
                linearity_residual: report.linearity_residual,
                channel_delta: w.delta,
                verdict: report.verdict,
            })
        })
        .collect()
}

fn table(rows: &[DemoRow]) -> String {
    let mut out = format!(
        "{:<14} {:>5} {:>11} {:>11} {:>11} {:>11} {:>11}  {}\n",
        "law", "H12", "dP/dr2", "dP/dr12", "dP/dobs", "linearity", "delta", "verdict"
    );
    for r in rows {
        out += &format!(
            "{:<14} {:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}  {}\n",
            r.law,
            if r.interaction { "yes" } else { "no" },
            r.max_d_remote_state,
            r.max_d_correlations,
            r.max_d_remote_observable,
            r.linearity_residual,
            r.channel_delta,
            match r.verdict {
                Verdict::Pass => "pass",
                Verdict::SignalingDetected => "signaling-detected",
            }
        );
    }
    out
}

/// Prints the comparison and reports whether both verdicts came out as expected.
pub fn run(seed: u64, as_json: bool) -> CliResult<bool> {
    let rows = rows(seed)?;
    let expected = rows.len() == 2 && rows[0].verdict == Verdict::Pass && rows[1].verdict == Verdict::SignalingDetected;
    let text = if as_json {
        output::json(&DemoOutput {
            version: blochsig::VERSION,
            seed,
            rows,
        })?
    } else {
        table(&rows)
    };
    output::emit(&text, None)?;
    Ok(expected)
}
