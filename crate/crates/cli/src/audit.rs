use std::path::Path;

use blochsig::audit::{signaling_channel_demo, ChannelWitness};
use blochsig::{AuditReport, BlochHamiltonian, Dynamics, JointBlochState, Verdict};
use serde::Serialize;

use crate::config::{self, Format, LawSpec, NamedObservable};
use crate::error::CliResult;
use crate::output;

#[derive(Serialize)]
pub struct Channel<'a> {
    pub state: &'a str,
    pub remote: [&'a str; 2],
    pub local: &'a str,
    pub time: f64,
    #[serde(flatten)]
    pub witness: ChannelWitness,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    dims: (usize, usize),
    law: &'a LawSpec,
    hamiltonian_source: &'a str,
    hamiltonian: &'a BlochHamiltonian,
    state_source: &'a str,
    state: &'a JointBlochState,
    remote: &'a [NamedObservable; 2],
    local: &'a NamedObservable,
}

#[derive(Serialize)]
struct AuditOutput<'a> {
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    config: ConfigEcho<'a>,
    channel: Channel<'a>,
    report: &'a AuditReport,
}

/// Runs the audit and returns the verdict; the caller maps it to an exit code.
pub fn run(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<Format>,
    seed: Option<u64>,
    no_timestamp: bool,
) -> CliResult<Verdict> {
    let mut cfg = config::load(config_path)?;
    if let Some(seed) = seed {
        cfg.audit.seed = seed;
    }
    let report = blochsig::audit(&cfg.sys, &cfg.law, &cfg.hamiltonian, &cfg.audit)?;
    let time = cfg.audit.times.iter().copied().fold(0.0, f64::max);
    let dynamics = Dynamics::new(&cfg.law, &cfg.hamiltonian, cfg.audit.integrator);
    let witness = signaling_channel_demo(
        &cfg.sys,
        &dynamics,
        &cfg.state,
        [&cfg.remote[0].outcomes, &cfg.remote[1].outcomes],
        &cfg.local.outcomes,
        time,
    )?;
    eprintln!(
        "{}: {} (channel delta {:.6})",
        report.law,
        match report.verdict {
            Verdict::Pass => "pass",
            Verdict::SignalingDetected => "signaling-detected",
        },
        witness.delta
    );
    let text = match format.or(cfg.output.format).unwrap_or_default() {
        Format::Csv => report.cases_csv(),
        Format::Json => output::json(&AuditOutput {
            version: blochsig::VERSION,
            timestamp: output::timestamp(no_timestamp),
            config: ConfigEcho {
                dims: cfg.sys.dims(),
                law: &cfg.law_spec,
                hamiltonian_source: &cfg.hamiltonian_label,
                hamiltonian: &cfg.hamiltonian,
                state_source: &cfg.state_label,
                state: &cfg.state,
                remote: &cfg.remote,
                local: &cfg.local,
            },
            channel: Channel {
                state: &cfg.state_label,
                remote: [&cfg.remote[0].label, &cfg.remote[1].label],
                local: &cfg.local.label,
                time,
                witness,
            },
            report: &report,
        })?,
    };
    output::emit(&text, out.or(cfg.output.path.as_deref()))?;
    Ok(report.verdict)
}
